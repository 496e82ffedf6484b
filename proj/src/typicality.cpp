#include "strata/typicality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace strata {

Schedule schedule(std::size_t n, double xi, std::size_t alphabet_size) {
  require(xi > 0.0 && xi < 0.5, ErrorCode::BadExponent, "xi must lie in (0, 1/2), got " + std::to_string(xi));
  require(n >= 1, ErrorCode::PreconditionViolation, "schedule needs n >= 1");
  require(alphabet_size >= 1, ErrorCode::PreconditionViolation, "alphabet must be nonempty");
  Schedule s;
  s.n = n;
  s.xi = xi;
  s.alphabet_size = alphabet_size;
  const double nn = static_cast<double>(n);
  const double a = static_cast<double>(alphabet_size);
  s.eta = std::pow(nn, -0.5 + xi);
  s.delta_prime = -a * s.eta * std::log(s.eta);
  s.epsilon = 2.0 * a * std::exp(-2.0 * nn * s.eta * s.eta);
  return s;
}

EmpiricalType type_from_counts(std::vector<std::size_t> counts) {
  EmpiricalType t;
  t.n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  require(t.n >= 1, ErrorCode::PreconditionViolation, "empirical type needs n >= 1");
  t.pmf.reserve(counts.size());
  for (std::size_t c : counts) t.pmf.push_back(static_cast<double>(c) / static_cast<double>(t.n));
  t.counts = std::move(counts);
  return t;
}

EmpiricalType empirical_type(std::span<const Label> labels, std::size_t alphabet_size) {
  std::vector<std::size_t> counts(alphabet_size, 0);
  for (Label y : labels) {
    require(y < alphabet_size, ErrorCode::PreconditionViolation, "label outside the alphabet");
    ++counts[y];
  }
  return type_from_counts(std::move(counts));
}

double negative_log_likelihood(const StratifiedMeasure& measure, std::span<const Point> points) {
  std::vector<double> terms;
  terms.reserve(points.size());
  for (const auto& x : points) {
    const double l = log_density(measure, x);
    if (!std::isfinite(l)) return std::numeric_limits<double>::infinity();
    terms.push_back(-l);
  }
  std::sort(terms.begin(), terms.end());
  // Neumaier summation over the sorted terms.
  double sum = 0.0, carry = 0.0;
  for (double t : terms) {
    const double next = sum + t;
    carry += std::abs(sum) >= std::abs(t) ? (sum - next) + t : (t - next) + sum;
    sum = next;
  }
  return sum + carry;
}

double weak_log_score(const StratifiedMeasure& measure, std::span<const Point> points) {
  require(!points.empty(), ErrorCode::PreconditionViolation, "weak_log_score needs n >= 1");
  return negative_log_likelihood(measure, points) / static_cast<double>(points.size());
}

bool within_weak_tolerance(double score, double entropy, double delta) {
  if (!std::isfinite(score)) return false;
  return std::abs(score - entropy) <= delta + kRelTol * std::max(1.0, std::abs(entropy));
}

bool is_weakly_typical(const StratifiedMeasure& measure, std::span<const Point> points, double delta) {
  require(delta >= 0.0, ErrorCode::PreconditionViolation, "delta must be nonnegative");
  return within_weak_tolerance(weak_log_score(measure, points), mixture_entropy(measure).total, delta);
}

bool is_strongly_typical(const EmpiricalType& type, std::span<const double> q, double eta) {
  require(eta > 0.0, ErrorCode::PreconditionViolation, "eta must be positive");
  require(type.pmf.size() == q.size(), ErrorCode::PreconditionViolation, "type and Q differ in alphabet size");
  // Compared in count units, |N(a) - n Q(a)| < n η, which keeps boundary
  // cases such as N = 60, n = 100, Q = 0.5, η = 0.1 exact.
  const double n = static_cast<double>(type.n);
  for (std::size_t a = 0; a < q.size(); ++a) {
    if (q[a] == 0.0 && type.counts[a] > 0) return false;
    if (!(std::abs(static_cast<double>(type.counts[a]) - n * q[a]) < n * eta)) return false;
  }
  return true;
}

bool is_strongly_typical(std::span<const Label> labels, std::span<const double> q, double eta) {
  return is_strongly_typical(empirical_type(labels, q.size()), q, eta);
}

std::int64_t stratum_dimension(std::span<const Label> labels, std::span<const int> dims) {
  std::int64_t m = 0;
  for (Label y : labels) {
    require(y < dims.size(), ErrorCode::PreconditionViolation, "label outside the alphabet");
    m += dims[y];
  }
  return m;
}

Interval dimension_interval(std::size_t n, double xi, std::span<const double> q, std::span<const int> dims,
                            IntervalMode mode) {
  require(xi > 0.0 && xi < 0.5, ErrorCode::BadExponent, "xi must lie in (0, 1/2)");
  require(q.size() == dims.size() && !q.empty(), ErrorCode::PreconditionViolation, "q and dims must match");
  const double nn = static_cast<double>(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) mean += q[i] * dims[i];
  const double center = nn * mean;
  if (q.size() == 1) return {nn * dims[0], nn * dims[0]};
  double half = std::pow(nn, 0.5 + xi);
  if (mode == IntervalMode::Derived) {
    half *= static_cast<double>(std::accumulate(dims.begin(), dims.end(), 0));
  }
  return {center - half, center + half};
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  require(p.size() == q.size(), ErrorCode::PreconditionViolation, "pmfs differ in alphabet size");
  double theta = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) theta += std::abs(p[a] - q[a]);
  return theta;
}

TvEntropyBound entropy_tv_bound(std::span<const double> p, std::span<const double> q) {
  TvEntropyBound r;
  r.theta = total_variation(p, q);
  r.entropy_gap = std::abs(shannon_entropy(p) - shannon_entropy(q));
  if (r.theta > 0.5) return r;
  r.bound = r.theta > 0.0 ? -r.theta * std::log(r.theta / static_cast<double>(p.size())) : 0.0;
  r.holds = r.entropy_gap <= r.bound + kRelTol * std::max(1.0, r.bound);
  return r;
}

}  // namespace strata
