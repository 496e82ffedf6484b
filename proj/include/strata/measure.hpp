#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "strata/error.hpp"
#include "strata/geometry.hpp"
#include "strata/random.hpp"

namespace strata {

/// Zero-based stratum label (component index in standard form).
using Label = std::uint32_t;

/// One m-rectifiable probability component. After standard-form grouping a
/// component may be an inner mixture of several disjoint catalog shapes of the
/// same dimension; `inner_weights` are their renormalized weights.
struct RectifiableComponent {
  int dimension = 0;
  std::vector<double> inner_weights;
  std::vector<Shape> pieces;

  static RectifiableComponent single(Shape shape);

  /// dρ_i/dμ_i at x, or nullopt off the carrier.
  std::optional<double> local_density(std::span<const double> x) const;
  double carrier_measure() const;
  Point sample(RandomStream& stream) const;
};

/// One entry of a measure description: a weight and a catalog shape.
struct WeightedShape {
  double weight = 0.0;
  Shape shape;
  bool operator==(const WeightedShape&) const = default;
};

struct LabeledSequence {
  std::vector<Point> points;
  std::vector<Label> labels;
  std::size_t size() const { return points.size(); }
};

struct Diagnostic {
  ErrorCode code;
  std::string message;
};

/// Lists every standard-form violation without building anything.
std::vector<Diagnostic> validate_components(std::span<const WeightedShape> specs);

/// Standard-form stratified measure Σ q_i ρ_i with m_1 < ... < m_k.
/// Immutable after construction; safe to share across threads.
class StratifiedMeasure {
 public:
  const std::vector<RectifiableComponent>& components() const { return components_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t ambient_dimension() const { return ambient_; }
  std::size_t size() const { return components_.size(); }
  std::vector<int> dimensions() const;

  /// Index of the lowest-dimensional carrier containing x.
  std::optional<Label> locate(std::span<const double> x) const;

  /// Cumulative label weights, for categorical draws.
  const std::vector<double>& label_cdf() const { return cdf_; }

  friend StratifiedMeasure build_standard_form(std::span<const WeightedShape> specs);

 private:
  std::size_t ambient_ = 0;
  std::vector<RectifiableComponent> components_;
  std::vector<double> weights_;
  std::vector<double> cdf_;
};

/// Groups equal-dimension shapes into composite components and orders them by
/// dimension. Throws the first diagnostic of validate_components.
StratifiedMeasure build_standard_form(std::span<const WeightedShape> specs);

/// ln(q_i · dρ_i/dμ_i(x)) for the carrier containing x; -inf elsewhere.
double log_density(const StratifiedMeasure& measure, std::span<const double> x);

LabeledSequence sample(const StratifiedMeasure& measure, RandomStream& stream, std::size_t n);

/// Draw from ρ_{label} only (conditional on the stratum label).
Point sample_component(const StratifiedMeasure& measure, Label label, RandomStream& stream);

double component_entropy(const RectifiableComponent& component);

struct MixtureEntropy {
  double total = 0.0;
  double labels = 0.0;         // H(Y)
  double conditional = 0.0;    // H(X|Y)
};
MixtureEntropy mixture_entropy(const StratifiedMeasure& measure);

struct MonteCarloEntropy {
  double estimate = 0.0;
  double standard_error = 0.0;
};
MonteCarloEntropy entropy_monte_carlo(const StratifiedMeasure& measure, RandomStream& stream, std::size_t n);

/// Discrete Shannon entropy (nats) of a pmf.
double shannon_entropy(std::span<const double> pmf);

}  // namespace strata
