#include "strata/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace strata {

RectifiableComponent RectifiableComponent::single(Shape shape) {
  RectifiableComponent c;
  c.dimension = shape::dimension(shape);
  c.inner_weights = {1.0};
  c.pieces.push_back(std::move(shape));
  return c;
}

std::optional<double> RectifiableComponent::local_density(std::span<const double> x) const {
  for (std::size_t j = 0; j < pieces.size(); ++j) {
    if (auto f = shape::local_density(pieces[j], x)) return inner_weights[j] * *f;
  }
  return std::nullopt;
}

double RectifiableComponent::carrier_measure() const {
  double total = 0.0;
  for (const auto& p : pieces) total += shape::carrier_measure(p);
  return total;
}

Point RectifiableComponent::sample(RandomStream& stream) const {
  if (pieces.size() == 1) return shape::sample(pieces.front(), stream);
  std::vector<double> cdf(inner_weights.size());
  std::partial_sum(inner_weights.begin(), inner_weights.end(), cdf.begin());
  return shape::sample(pieces[stream.categorical(cdf)], stream);
}

std::vector<Diagnostic> validate_components(std::span<const WeightedShape> specs) {
  std::vector<Diagnostic> out;
  if (specs.empty()) {
    out.push_back({ErrorCode::InvalidComponent, "measure needs at least one component"});
    return out;
  }
  const std::size_t d = shape::ambient(specs.front().shape);
  double sum = 0.0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    const std::string where = "component " + std::to_string(i + 1) + " (" +
                              std::string(shape::kind_name(s.shape)) + ")";
    if (!std::isfinite(s.weight) || s.weight <= 0.0) {
      out.push_back({ErrorCode::ZeroWeight, where + ": weight must be positive, got " + std::to_string(s.weight)});
    }
    sum += s.weight;
    if (auto msg = shape::check(s.shape)) {
      out.push_back({ErrorCode::InvalidComponent, where + ": " + *msg});
      continue;
    }
    if (shape::ambient(s.shape) != d) {
      out.push_back({ErrorCode::AmbientMismatch, where + ": ambient dimension " +
                                                     std::to_string(shape::ambient(s.shape)) + " differs from " +
                                                     std::to_string(d)});
    }
  }
  if (std::isfinite(sum) && std::abs(sum - 1.0) > 1e-12) {
    out.push_back({ErrorCode::WeightSumMismatch, "weights sum to " + std::to_string(sum) + ", expected 1"});
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (shape::check(specs[i].shape) || shape::ambient(specs[i].shape) != d) continue;
    for (std::size_t j = i + 1; j < specs.size(); ++j) {
      if (shape::check(specs[j].shape) || shape::ambient(specs[j].shape) != d) continue;
      if (shape::dimension(specs[i].shape) != shape::dimension(specs[j].shape)) continue;
      if (shape::overlaps(specs[i].shape, specs[j].shape).value_or(false)) {
        out.push_back({ErrorCode::OverlappingCarriers, "components " + std::to_string(i + 1) + " and " +
                                                           std::to_string(j + 1) +
                                                           " share a set of positive measure"});
      }
    }
  }
  return out;
}

StratifiedMeasure build_standard_form(std::span<const WeightedShape> specs) {
  const auto diagnostics = validate_components(specs);
  if (!diagnostics.empty()) throw Error(diagnostics.front().code, diagnostics.front().message);

  std::map<int, std::vector<const WeightedShape*>> by_dimension;
  for (const auto& s : specs) by_dimension[shape::dimension(s.shape)].push_back(&s);

  StratifiedMeasure m;
  m.ambient_ = shape::ambient(specs.front().shape);
  for (const auto& [dim, group] : by_dimension) {
    RectifiableComponent c;
    c.dimension = dim;
    double q = 0.0;
    for (const auto* s : group) q += s->weight;
    for (const auto* s : group) {
      c.inner_weights.push_back(group.size() == 1 ? 1.0 : s->weight / q);
      c.pieces.push_back(s->shape);
    }
    m.components_.push_back(std::move(c));
    m.weights_.push_back(q);
  }
  m.cdf_.resize(m.weights_.size());
  std::partial_sum(m.weights_.begin(), m.weights_.end(), m.cdf_.begin());
  m.cdf_.back() = 1.0;
  return m;
}

std::vector<int> StratifiedMeasure::dimensions() const {
  std::vector<int> dims;
  dims.reserve(components_.size());
  for (const auto& c : components_) dims.push_back(c.dimension);
  return dims;
}

std::optional<Label> StratifiedMeasure::locate(std::span<const double> x) const {
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (components_[i].local_density(x)) return static_cast<Label>(i);
  }
  return std::nullopt;
}

double log_density(const StratifiedMeasure& measure, std::span<const double> x) {
  const auto& comps = measure.components();
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (auto f = comps[i].local_density(x)) {
      const double g = measure.weights()[i] * *f;
      return g > 0.0 ? std::log(g) : -std::numeric_limits<double>::infinity();
    }
  }
  return -std::numeric_limits<double>::infinity();
}

LabeledSequence sample(const StratifiedMeasure& measure, RandomStream& stream, std::size_t n) {
  LabeledSequence seq;
  seq.points.reserve(n);
  seq.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = static_cast<Label>(stream.categorical(measure.label_cdf()));
    seq.labels.push_back(label);
    seq.points.push_back(measure.components()[label].sample(stream));
  }
  return seq;
}

Point sample_component(const StratifiedMeasure& measure, Label label, RandomStream& stream) {
  require(label < measure.size(), ErrorCode::PreconditionViolation, "label out of range");
  return measure.components()[label].sample(stream);
}

double shannon_entropy(std::span<const double> pmf) {
  double h = 0.0;
  for (double p : pmf) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double component_entropy(const RectifiableComponent& component) {
  require(!component.pieces.empty(), ErrorCode::UnsupportedGeometry, "component has no carrier");
  double h = 0.0;
  for (std::size_t j = 0; j < component.pieces.size(); ++j) {
    const double w = component.inner_weights[j];
    if (w > 0.0) h += w * (shape::entropy(component.pieces[j]) - std::log(w));
  }
  return h;
}

MixtureEntropy mixture_entropy(const StratifiedMeasure& measure) {
  MixtureEntropy h;
  h.labels = shannon_entropy(measure.weights());
  for (std::size_t i = 0; i < measure.size(); ++i) {
    h.conditional += measure.weights()[i] * component_entropy(measure.components()[i]);
  }
  h.total = h.labels + h.conditional;
  return h;
}

MonteCarloEntropy entropy_monte_carlo(const StratifiedMeasure& measure, RandomStream& stream, std::size_t n) {
  require(n >= 2, ErrorCode::PreconditionViolation, "entropy_monte_carlo needs n >= 2");
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = static_cast<Label>(stream.categorical(measure.label_cdf()));
    const Point x = measure.components()[label].sample(stream);
    const double score = -log_density(measure, x);
    require(std::isfinite(score), ErrorCode::InfiniteScore, "a draw fell outside the density support");
    const double delta = score - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (score - mean);
  }
  const double var = m2 / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace strata
