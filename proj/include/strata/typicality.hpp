#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "strata/measure.hpp"

namespace strata {

/// Per-n typicality parameters under the η-convention η_n = n^(-1/2+ξ).
struct Schedule {
  std::size_t n = 0;
  double xi = 0.0;
  double eta = 0.0;            // η_n
  double delta_prime = 0.0;    // δ'_n = -|E_Y| η_n ln η_n
  double epsilon = 0.0;        // ε_n = 2 |E_Y| exp(-2 n η_n²)
  std::size_t alphabet_size = 0;
};

Schedule schedule(std::size_t n, double xi, std::size_t alphabet_size);

/// Counts N(a; y) and the induced pmf of a label sequence.
struct EmpiricalType {
  std::vector<std::size_t> counts;
  std::vector<double> pmf;
  std::size_t n = 0;
  bool operator==(const EmpiricalType&) const = default;
};

EmpiricalType empirical_type(std::span<const Label> labels, std::size_t alphabet_size);
EmpiricalType type_from_counts(std::vector<std::size_t> counts);

struct TypicalityParams {
  double delta = 0.1;
  Schedule schedule;
};

/// -Σ ln f(x_i), summed in sorted order (exactly permutation invariant). +inf
/// when a point is off the support.
double negative_log_likelihood(const StratifiedMeasure& measure, std::span<const Point> points);

/// -(1/n) Σ ln f(x_i). The terms are summed in sorted order, so the score is
/// exactly invariant under permutations of the points. +inf when a point is
/// off the support.
double weak_log_score(const StratifiedMeasure& measure, std::span<const Point> points);

/// |score - H| <= δ, with H the measure's total entropy. A relative slack of
/// kRelTol absorbs rounding so that exact-equality cases (δ = 0) are decided
/// as in exact arithmetic.
bool within_weak_tolerance(double score, double entropy, double delta);
bool is_weakly_typical(const StratifiedMeasure& measure, std::span<const Point> points, double delta);

/// P << Q and |P(a) - Q(a)| < η for every label a.
bool is_strongly_typical(const EmpiricalType& type, std::span<const double> q, double eta);
bool is_strongly_typical(std::span<const Label> labels, std::span<const double> q, double eta);

/// m(y) = Σ_j m_{y_j}.
std::int64_t stratum_dimension(std::span<const Label> labels, std::span<const int> dims);

enum class IntervalMode { Literal, Derived };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Interval for m(y) over strongly typical y, centred on n Σ q_i m_i.
/// Literal uses half-width n^(1/2+ξ); Derived multiplies it by Σ m_i,
/// which is what the count bounds |N(i;y) - n q_i| <= n η_n actually give.
Interval dimension_interval(std::size_t n, double xi, std::span<const double> q, std::span<const int> dims,
                            IntervalMode mode);

/// Σ_a |P(a) - Q(a)|.
double total_variation(std::span<const double> p, std::span<const double> q);

struct TvEntropyBound {
  double theta = 0.0;
  double bound = 0.0;
  double entropy_gap = 0.0;     // |H(P) - H(Q)|
  std::optional<bool> holds;    // nullopt when θ > 1/2 (bound not applicable)
};

/// Continuity of entropy in total variation: |H(P)-H(Q)| <= -θ ln(θ/|E_Y|) for θ <= 1/2.
TvEntropyBound entropy_tv_bound(std::span<const double> p, std::span<const double> q);

}  // namespace strata
