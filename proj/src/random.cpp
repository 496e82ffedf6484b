#include "strata/random.hpp"

#include <algorithm>

namespace strata {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(mix64(seed)), static_cast<std::uint32_t>(mix64(seed) >> 32),
                    static_cast<std::uint32_t>(mix64(stream_id ^ 0x5bd1e995ULL)),
                    static_cast<std::uint32_t>(mix64(stream_id ^ 0x5bd1e995ULL) >> 32)};
  engine_.seed(seq);
}

RandomStream RandomStream::derive(std::uint64_t salt) const {
  return RandomStream(seed_, mix64(stream_id_ ^ mix64(salt + 0x632be59bd9b4e019ULL)));
}

std::size_t RandomStream::categorical(std::span<const double> cdf) {
  if (cdf.size() <= 1) return 0;
  const double u = uniform();
  auto it = std::upper_bound(cdf.begin(), cdf.end() - 1, u);
  return static_cast<std::size_t>(it - cdf.begin());
}

}  // namespace strata
