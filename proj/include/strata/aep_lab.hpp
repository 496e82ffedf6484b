#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "strata/measure.hpp"
#include "strata/random.hpp"
#include "strata/typicality.hpp"

namespace strata {

enum class EstimateMethod { MonteCarlo, ImportanceSampling, Exhaustive };
std::string_view to_string(EstimateMethod m);

struct EstimateWithCI {
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t trials = 0;
  EstimateMethod method = EstimateMethod::MonteCarlo;
};

/// Parallel trial execution. Trials are split into fixed-size blocks; block b
/// draws from RandomStream(seed, f(stream_id, b)) and partial sums are merged
/// in block order, so results do not depend on the thread count.
struct LabOptions {
  unsigned threads = 1;
};

/// Fraction of length-n i.i.d. sequences that are weakly δ-typical.
EstimateWithCI estimate_typical_probability(const StratifiedMeasure& measure, std::size_t n, double delta,
                                            std::size_t trials, const RandomStream& stream,
                                            LabOptions options = {});

struct TypicalVolume {
  EstimateWithCI log_volume;    // ln μ^{⊗n}(W), delta-method SE
  EstimateWithCI probability;   // ρ^{⊗n}(W) from the same draws
};

/// Importance-sampling estimate of μ^{⊗n}(W_δ) = E_ρ[1_W / f]. Throws
/// DegenerateWeights when no draw is typical.
TypicalVolume estimate_typical_volume(const StratifiedMeasure& measure, std::size_t n, double delta,
                                      std::size_t trials, const RandomStream& stream, LabOptions options = {});

/// H^{m(y)} of the doubly typical stratum T(y), by conditional importance
/// sampling x_i ~ ρ_{y_i}. Returns the log-volume. y must be strongly typical
/// under params.schedule.
EstimateWithCI estimate_stratum_volume(const StratifiedMeasure& measure, std::span<const Label> y,
                                       const TypicalityParams& params, std::size_t trials,
                                       const RandomStream& stream, LabOptions options = {});

/// Summary of one doubly typical stratum T(y).
struct StratumReport {
  std::vector<Label> labels;
  EmpiricalType type;
  std::int64_t dimension = 0;        // m(y)
  EstimateWithCI log_volume;         // ln H^{m(y)}(T(y))
  EstimateWithCI probability;        // ρ^{⊗n}(T(y)) = Π q_{y_i} · P(x weakly typical | y)
};

StratumReport stratum_report(const StratifiedMeasure& measure, std::span<const Label> y,
                             const TypicalityParams& params, std::size_t trials, const RandomStream& stream,
                             LabOptions options = {});

struct TvDefect {
  EstimateWithCI defect;           // ρ^{⊗n}(T^c)
  EstimateWithCI weak_failure;     // ρ^{⊗n}(W^c)
  EstimateWithCI strong_failure;   // (π_*ρ)^{⊗n}(A^c)
  Schedule schedule;
};

TvDefect estimate_tv_defect(const StratifiedMeasure& measure, std::size_t n, double delta, double xi,
                            std::size_t trials, const RandomStream& stream, LabOptions options = {});
/// Same, with explicit (δ, η); infinite values disable the corresponding test.
TvDefect estimate_tv_defect(const StratifiedMeasure& measure, std::size_t n, const TypicalityParams& params,
                            std::size_t trials, const RandomStream& stream, LabOptions options = {});

/// 1_{T(y)}(x) for the doubly typical set: π(x) = y, x weakly typical, y strongly typical.
bool in_doubly_typical_stratum(const StratifiedMeasure& measure, std::span<const Point> points,
                               std::span<const Label> y, const TypicalityParams& params);

/// Checks 1_{T(y)}(x) = 1_{T(σy)}(σx) and score(σx) = score(x) exactly.
/// permutation[i] is the source index of position i (σ·x)_i = x_{σ(i)}.
bool type_symmetry_property(const StratifiedMeasure& measure, const LabeledSequence& seq,
                            std::span<const std::size_t> permutation, const TypicalityParams& params);

struct TightnessReport {
  std::size_t sampled = 0;
  std::size_t in_b = 0;
  double fraction_in_b = 0.0;
  double threshold = 0.0;                 // H(X|Y) - ε + δ + δ'_n
  double log_count_per_n = 0.0;           // (1/n) ln Σ |T_P| over distinct sampled types in B
  std::vector<double> log_volume_per_n;   // per sampled stratum; -inf when degenerate
  Schedule schedule;
};

/// Diagnostic for the tightness of the stratum-volume bound. No gate.
TightnessReport tightness_diagnostic(const StratifiedMeasure& measure, std::size_t n, double delta, double xi,
                                     double epsilon, std::size_t sampled_types, std::size_t trials,
                                     const RandomStream& stream, LabOptions options = {});

struct AdjacentTypeReport {
  std::vector<std::size_t> counts;
  std::vector<std::size_t> adjacent_counts;   // one label moved
  double log_probability = 0.0;               // ln ρ^{⊗n}(T(y))
  double adjacent_log_probability = 0.0;
  double log_ratio = 0.0;
};

/// Compares ρ^{⊗n}(T(y)) for y and for a sequence of an adjacent type (one
/// occurrence of the most frequent label replaced by the next label).
AdjacentTypeReport adjacent_type_discrepancy(const StratifiedMeasure& measure, std::span<const Label> y,
                                             const TypicalityParams& params, std::size_t trials,
                                             const RandomStream& stream, LabOptions options = {});

struct ExhaustiveResult {
  std::uint64_t count = 0;      // |W|
  double probability = 0.0;     // ρ^{⊗n}(W)
  double volume = 0.0;          // μ^{⊗n}(W), counting measure
};

/// Full enumeration of E_X^n for a measure made only of atoms.
ExhaustiveResult exhaustive_oracle(const StratifiedMeasure& measure, std::size_t n, double delta);

/// ln of the multinomial coefficient n! / Π counts!.
double log_multinomial(std::span<const std::size_t> counts);

}  // namespace strata
