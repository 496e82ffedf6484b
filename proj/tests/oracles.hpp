#pragma once

// Independent reference computations used to check the library. None of
// these call into strata; they work from closed forms for the fixtures.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

inline double ln_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline double binomial_pmf(int n, int k, double p) {
  return std::exp(ln_choose(n, k) + k * std::log(p) + (n - k) * std::log1p(-p));
}

/// P(K in {k : keep(k)}) for K ~ Binomial(n, p).
inline double binomial_mass(int n, double p, const std::function<bool(int)>& keep) {
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    if (keep(k)) s += binomial_pmf(n, k, p);
  }
  return s;
}

// M3 facts. The score of a sequence with k diagonal points is
// ln 2 + ln√2 · k / n and H = ln 2 + ½ ln√2.
inline const double kLnSqrt2 = 0.5 * std::log(2.0);
inline const double kM3Entropy = std::log(2.0) + 0.5 * kLnSqrt2;

inline bool m3_weakly_typical(int n, int k, double delta) {
  return std::abs(kLnSqrt2 * (static_cast<double>(k) / n - 0.5)) <= delta + 1e-12;
}

inline double m3_typical_probability(int n, double delta) {
  return binomial_mass(n, 0.5, [&](int k) { return m3_weakly_typical(n, k, delta); });
}

/// ρ^{⊗n}(T^c) for M3: weak or strong typicality fails.
inline double m3_tv_defect(int n, double delta, double xi) {
  const double eta = std::pow(n, -0.5 + xi);
  return binomial_mass(n, 0.5, [&](int k) {
    const bool strong = std::abs(static_cast<double>(k) / n - 0.5) < eta;
    return !(strong && m3_weakly_typical(n, k, delta));
  });
}

/// ln μ^{⊗n}(W_δ) for M3: Σ over typical k of C(n,k) (√2)^k.
inline double m3_log_typical_volume(int n, double delta) {
  std::vector<double> terms;
  for (int k = 0; k <= n; ++k) {
    if (m3_weakly_typical(n, k, delta)) terms.push_back(ln_choose(n, k) + k * kLnSqrt2);
  }
  const double top = *std::max_element(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += std::exp(t - top);
  return top + std::log(s);
}

struct Enumeration {
  std::uint64_t count = 0;
  double probability = 0.0;
};

/// Brute-force weak typical set of a pmf on n letters (counting measure).
inline Enumeration enumerate_typical(const std::vector<double>& pmf, int n, double delta) {
  double h = 0.0;
  for (double p : pmf) h -= p * std::log(p);
  Enumeration e;
  std::function<void(int, double, double)> rec = [&](int depth, double log_p, double p) {
    if (depth == n) {
      if (std::abs(-log_p / n - h) <= delta + 1e-12) {
        ++e.count;
        e.probability += p;
      }
      return;
    }
    for (double q : pmf) rec(depth + 1, log_p + std::log(q), p * q);
  };
  rec(0, 0.0, 1.0);
  return e;
}

struct ScheduleValues {
  double eta, delta_prime, epsilon;
};

inline ScheduleValues schedule(double n, double xi, double k) {
  const double eta = std::pow(n, xi - 0.5);
  return {eta, -k * eta * std::log(eta), 2.0 * k * std::exp(-2.0 * n * eta * eta)};
}

/// Rényi defect of a 1-d segment [a, a+L] whose density has two pieces split
/// at parameter b (mass m on the first piece), computed cell by cell.
inline double two_piece_segment_defect(double a, double length, double b, double m, int level) {
  const double f1 = m / (b * length), f2 = (1.0 - m) / ((1.0 - b) * length);
  const double split = a + b * length, end = a + length;
  const double side = std::ldexp(1.0, -level);
  double total = 0.0;
  for (auto j = static_cast<std::int64_t>(std::floor(a / side)); j * side < end; ++j) {
    const double lo = std::max(j * side, a), hi = std::min((j + 1) * side, end);
    if (hi <= lo) continue;
    const double l1 = std::max(0.0, std::min(hi, split) - lo), l2 = std::max(0.0, hi - std::max(lo, split));
    const double p = f1 * l1 + f2 * l2;
    total += -p * std::log(p) + p * std::log(hi - lo);
  }
  return total;
}

inline double two_piece_segment_entropy(double length, double b, double m) {
  const double f1 = m / (b * length), f2 = (1.0 - m) / ((1.0 - b) * length);
  return -(m * std::log(f1) + (1.0 - m) * std::log(f2));
}

// Values computed once with an independent Python/scipy script and frozen.
inline constexpr double kM3TypicalProbability100 = 0.9999999956626331;   // n = 100, δ = 0.1
inline constexpr double kCentralBinomial100 = 0.07958923738717877;       // C(100,50) / 2^100
inline constexpr double kM3Defect200 = 4.994264864177523e-4;             // δ = ξ = 0.1
inline constexpr double kM3Defect2000 = 1.9202460847881815e-5;
inline constexpr double kM3LogVolume100 = 88.1373456205043;              // δ = 0.1
inline constexpr double kM3StrongFailure100 = 0.0017899303914868491;     // ξ = 0.1
inline constexpr double kM3StrongFailure1000 = 5.790595138772814e-05;

/// Binomial standard error of a proportion p over `trials`.
inline double binomial_se(double p, std::size_t trials) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

}  // namespace oracle
