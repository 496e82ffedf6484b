#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace strata {

/// Deterministic pseudo-random stream identified by (seed, stream id).
///
/// Streams are never shared between workers. Two streams built from the same
/// pair produce the same sequence on every platform: the engine is
/// std::mt19937_64 (fully specified by the standard) and uniforms are formed
/// from the top 53 bits instead of going through std::uniform_real_distribution,
/// whose algorithm is implementation-defined.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id);

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Index drawn from a cumulative distribution (last entry treated as 1).
  std::size_t categorical(std::span<const double> cdf);

  /// Independent child stream; same (seed, stream id, salt) gives the same child.
  RandomStream derive(std::uint64_t salt) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer, used to decorrelate (seed, stream id) pairs.
std::uint64_t mix64(std::uint64_t x);

}  // namespace strata
