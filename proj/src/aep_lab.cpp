#include "strata/aep_lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

namespace strata {

std::string_view to_string(EstimateMethod m) {
  switch (m) {
    case EstimateMethod::MonteCarlo: return "monte-carlo";
    case EstimateMethod::ImportanceSampling: return "importance-sampling";
    case EstimateMethod::Exhaustive: return "exhaustive";
  }
  return "unknown";
}

namespace {

constexpr std::size_t kBlockTrials = 64;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Runs fn(stream, acc) once per trial. Each block owns its stream and
// accumulator; accumulators are merged in block order.
template <class Acc, class Fn>
Acc run_blocks(std::size_t trials, const RandomStream& base, unsigned threads, Fn&& fn) {
  const std::size_t blocks = (trials + kBlockTrials - 1) / kBlockTrials;
  std::vector<Acc> partial(blocks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    try {
      for (std::size_t b = next.fetch_add(1); b < blocks; b = next.fetch_add(1)) {
        RandomStream stream = base.derive(b);
        const std::size_t end = std::min(trials, (b + 1) * kBlockTrials);
        for (std::size_t t = b * kBlockTrials; t < end; ++t) fn(stream, partial[b]);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(blocks);
    }
  };

  const unsigned workers = static_cast<unsigned>(std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(blocks, 1)));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  Acc total;
  for (const auto& p : partial) total.merge(p);
  return total;
}

struct Counts {
  std::size_t trials = 0;
  std::size_t hits = 0;
  std::size_t weak_fail = 0;
  std::size_t strong_fail = 0;
  void merge(const Counts& o) {
    trials += o.trials;
    hits += o.hits;
    weak_fail += o.weak_fail;
    strong_fail += o.strong_fail;
  }
};

// Mean of exp(l) over trials, kept in log-scaled form.
struct LogWeights {
  std::size_t trials = 0;
  std::size_t nonzero = 0;
  double max_log = kNegInf;
  double s1 = 0.0;
  double s2 = 0.0;

  void rescale(double new_max) {
    if (max_log != kNegInf) {
      const double f = std::exp(max_log - new_max);
      s1 *= f;
      s2 *= f * f;
    }
    max_log = new_max;
  }
  void add(double log_weight) {
    ++trials;
    if (log_weight == kNegInf) return;
    ++nonzero;
    if (log_weight > max_log) rescale(log_weight);
    const double w = std::exp(log_weight - max_log);
    s1 += w;
    s2 += w * w;
  }
  void merge(const LogWeights& o) {
    trials += o.trials;
    nonzero += o.nonzero;
    if (o.nonzero == 0) return;
    if (o.max_log > max_log) rescale(o.max_log);
    const double f = std::exp(o.max_log - max_log);
    s1 += o.s1 * f;
    s2 += o.s2 * f * f;
  }

  EstimateWithCI log_mean() const {
    require(nonzero > 0, ErrorCode::DegenerateWeights, "no typical draw observed in " + std::to_string(trials) +
                                                           " trials");
    const double t = static_cast<double>(trials);
    const double mean = s1 / t;
    double var = trials > 1 ? (s2 / t - mean * mean) * t / (t - 1.0) : 0.0;
    var = std::max(var, 0.0);
    EstimateWithCI e;
    e.value = max_log + std::log(mean);
    e.standard_error = std::sqrt(var / t) / mean;
    e.trials = trials;
    e.method = EstimateMethod::ImportanceSampling;
    return e;
  }
};

EstimateWithCI proportion(std::size_t hits, std::size_t trials) {
  EstimateWithCI e;
  e.trials = trials;
  e.method = EstimateMethod::MonteCarlo;
  if (trials == 0) return e;
  const double p = static_cast<double>(hits) / static_cast<double>(trials);
  e.value = p;
  e.standard_error = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  return e;
}

std::vector<Point> draw_points(const StratifiedMeasure& measure, std::size_t n, RandomStream& stream,
                               std::vector<Label>* labels) {
  std::vector<Point> points;
  points.reserve(n);
  if (labels) labels->clear();
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = static_cast<Label>(stream.categorical(measure.label_cdf()));
    if (labels) labels->push_back(y);
    points.push_back(measure.components()[y].sample(stream));
  }
  return points;
}

void check_strongly_typical(const StratifiedMeasure& measure, std::span<const Label> y, const TypicalityParams& params) {
  require(!y.empty(), ErrorCode::PreconditionViolation, "label sequence must be nonempty");
  require(is_strongly_typical(y, measure.weights(), params.schedule.eta), ErrorCode::PreconditionViolation,
          "label sequence is not strongly typical at eta = " + std::to_string(params.schedule.eta));
}

// Conditional draws x_i ~ ρ_{y_i}: weak typicality of x and -Σ ln f_{y_i}(x_i).
struct StratumDraw {
  bool typical = false;
  double log_inverse_density = 0.0;
};

StratumDraw draw_in_stratum(const StratifiedMeasure& measure, std::span<const Label> y, double entropy, double delta,
                            RandomStream& stream, std::vector<Point>& points) {
  points.clear();
  StratumDraw d;
  for (Label label : y) {
    points.push_back(measure.components()[label].sample(stream));
    const auto f = measure.components()[label].local_density(points.back());
    d.log_inverse_density -= f && *f > 0.0 ? std::log(*f) : kNegInf;
  }
  d.typical = within_weak_tolerance(weak_log_score(measure, points), entropy, delta);
  return d;
}

}  // namespace

EstimateWithCI estimate_typical_probability(const StratifiedMeasure& measure, std::size_t n, double delta,
                                            std::size_t trials, const RandomStream& stream, LabOptions options) {
  require(trials >= 100, ErrorCode::PreconditionViolation, "estimate_typical_probability needs trials >= 100");
  require(n >= 1, ErrorCode::PreconditionViolation, "n must be positive");
  require(delta >= 0.0, ErrorCode::PreconditionViolation, "delta must be nonnegative");
  const double h = mixture_entropy(measure).total;
  const auto counts = run_blocks<Counts>(trials, stream, options.threads, [&](RandomStream& s, Counts& acc) {
    const auto points = draw_points(measure, n, s, nullptr);
    ++acc.trials;
    if (within_weak_tolerance(weak_log_score(measure, points), h, delta)) ++acc.hits;
  });
  return proportion(counts.hits, counts.trials);
}

TypicalVolume estimate_typical_volume(const StratifiedMeasure& measure, std::size_t n, double delta,
                                      std::size_t trials, const RandomStream& stream, LabOptions options) {
  require(trials >= 1000, ErrorCode::PreconditionViolation, "estimate_typical_volume needs trials >= 1000");
  require(n >= 1, ErrorCode::PreconditionViolation, "n must be positive");
  const double h = mixture_entropy(measure).total;
  const auto acc = run_blocks<LogWeights>(trials, stream, options.threads, [&](RandomStream& s, LogWeights& w) {
    const auto points = draw_points(measure, n, s, nullptr);
    const double nll = negative_log_likelihood(measure, points);
    const bool typical = within_weak_tolerance(nll / static_cast<double>(n), h, delta);
    w.add(typical ? nll : kNegInf);
  });
  TypicalVolume v;
  v.probability = proportion(acc.nonzero, acc.trials);
  v.log_volume = acc.log_mean();
  return v;
}

namespace {

LogWeights stratum_weights(const StratifiedMeasure& measure, std::span<const Label> y, const TypicalityParams& params,
                           std::size_t trials, const RandomStream& stream, LabOptions options) {
  require(trials >= 2, ErrorCode::PreconditionViolation, "stratum volume needs trials >= 2");
  check_strongly_typical(measure, y, params);
  const double h = mixture_entropy(measure).total;
  return run_blocks<LogWeights>(trials, stream, options.threads, [&](RandomStream& s, LogWeights& w) {
    std::vector<Point> points;
    const auto d = draw_in_stratum(measure, y, h, params.delta, s, points);
    w.add(d.typical ? d.log_inverse_density : kNegInf);
  });
}

}  // namespace

EstimateWithCI estimate_stratum_volume(const StratifiedMeasure& measure, std::span<const Label> y,
                                       const TypicalityParams& params, std::size_t trials,
                                       const RandomStream& stream, LabOptions options) {
  return stratum_weights(measure, y, params, trials, stream, options).log_mean();
}

StratumReport stratum_report(const StratifiedMeasure& measure, std::span<const Label> y,
                             const TypicalityParams& params, std::size_t trials, const RandomStream& stream,
                             LabOptions options) {
  const auto w = stratum_weights(measure, y, params, trials, stream, options);
  StratumReport r;
  r.labels.assign(y.begin(), y.end());
  r.type = empirical_type(y, measure.size());
  r.dimension = stratum_dimension(y, measure.dimensions());
  r.log_volume = w.log_mean();
  double q_y = 1.0;
  for (Label a : y) q_y *= measure.weights()[a];
  r.probability = proportion(w.nonzero, w.trials);
  r.probability.value *= q_y;
  r.probability.standard_error *= q_y;
  return r;
}

TvDefect estimate_tv_defect(const StratifiedMeasure& measure, std::size_t n, double delta, double xi,
                            std::size_t trials, const RandomStream& stream, LabOptions options) {
  TypicalityParams params{delta, schedule(n, xi, measure.size())};
  return estimate_tv_defect(measure, n, params, trials, stream, options);
}

TvDefect estimate_tv_defect(const StratifiedMeasure& measure, std::size_t n, const TypicalityParams& params,
                            std::size_t trials, const RandomStream& stream, LabOptions options) {
  require(trials >= 100, ErrorCode::PreconditionViolation, "estimate_tv_defect needs trials >= 100");
  require(n >= 1, ErrorCode::PreconditionViolation, "n must be positive");
  const double h = mixture_entropy(measure).total;
  const auto counts = run_blocks<Counts>(trials, stream, options.threads, [&](RandomStream& s, Counts& acc) {
    std::vector<Label> labels;
    const auto points = draw_points(measure, n, s, &labels);
    const bool weak = within_weak_tolerance(weak_log_score(measure, points), h, params.delta);
    const bool strong = is_strongly_typical(labels, measure.weights(), params.schedule.eta);
    ++acc.trials;
    if (!weak) ++acc.weak_fail;
    if (!strong) ++acc.strong_fail;
    if (!(weak && strong)) ++acc.hits;
  });
  TvDefect r;
  r.defect = proportion(counts.hits, counts.trials);
  r.weak_failure = proportion(counts.weak_fail, counts.trials);
  r.strong_failure = proportion(counts.strong_fail, counts.trials);
  r.schedule = params.schedule;
  return r;
}

bool in_doubly_typical_stratum(const StratifiedMeasure& measure, std::span<const Point> points,
                               std::span<const Label> y, const TypicalityParams& params) {
  require(points.size() == y.size(), ErrorCode::PreconditionViolation, "points and labels differ in length");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto label = measure.locate(points[i]);
    if (!label || *label != y[i]) return false;
  }
  if (!is_strongly_typical(y, measure.weights(), params.schedule.eta)) return false;
  return within_weak_tolerance(weak_log_score(measure, points), mixture_entropy(measure).total, params.delta);
}

bool type_symmetry_property(const StratifiedMeasure& measure, const LabeledSequence& seq,
                            std::span<const std::size_t> permutation, const TypicalityParams& params) {
  const std::size_t n = seq.size();
  require(permutation.size() == n, ErrorCode::PreconditionViolation, "permutation length differs from n");
  std::vector<bool> used(n, false);
  for (std::size_t s : permutation) {
    require(s < n && !used[s], ErrorCode::PreconditionViolation, "not a permutation of {0..n-1}");
    used[s] = true;
  }
  std::vector<Point> permuted_points(n);
  std::vector<Label> permuted_labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    permuted_points[i] = seq.points[permutation[i]];
    permuted_labels[i] = seq.labels[permutation[i]];
  }
  const bool before = in_doubly_typical_stratum(measure, seq.points, seq.labels, params);
  const bool after = in_doubly_typical_stratum(measure, permuted_points, permuted_labels, params);
  const double score_before = weak_log_score(measure, seq.points);
  const double score_after = weak_log_score(measure, permuted_points);
  return before == after && score_before == score_after;
}

double log_multinomial(std::span<const std::size_t> counts) {
  double n = 0.0, out = 0.0;
  for (std::size_t c : counts) {
    n += static_cast<double>(c);
    out -= std::lgamma(static_cast<double>(c) + 1.0);
  }
  return out + std::lgamma(n + 1.0);
}

TightnessReport tightness_diagnostic(const StratifiedMeasure& measure, std::size_t n, double delta, double xi,
                                     double epsilon, std::size_t sampled_types, std::size_t trials,
                                     const RandomStream& stream, LabOptions options) {
  require(sampled_types >= 10, ErrorCode::PreconditionViolation, "tightness_diagnostic needs >= 10 sampled types");
  TightnessReport r;
  r.schedule = schedule(n, xi, measure.size());
  const TypicalityParams params{delta, r.schedule};
  r.threshold = mixture_entropy(measure).conditional - epsilon + delta + r.schedule.delta_prime;

  RandomStream label_stream = stream.derive(~0ULL);
  std::map<std::vector<std::size_t>, double> b_types;   // counts -> ln |T_P|
  const std::size_t max_attempts = 1000 * sampled_types;
  std::vector<Label> y(n);
  for (std::size_t attempt = 0; attempt < max_attempts && r.sampled < sampled_types; ++attempt) {
    for (auto& label : y) label = static_cast<Label>(label_stream.categorical(measure.label_cdf()));
    if (!is_strongly_typical(y, measure.weights(), r.schedule.eta)) continue;
    double per_n = kNegInf;
    try {
      const auto v = estimate_stratum_volume(measure, y, params, trials, stream.derive(~0ULL - 1 - r.sampled), options);
      per_n = v.value / static_cast<double>(n);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateWeights) throw;
    }
    r.log_volume_per_n.push_back(per_n);
    ++r.sampled;
    if (per_n > r.threshold) {
      ++r.in_b;
      const auto t = empirical_type(y, measure.size());
      b_types[t.counts] = log_multinomial(t.counts);
    }
  }
  r.fraction_in_b = r.sampled ? static_cast<double>(r.in_b) / static_cast<double>(r.sampled) : 0.0;
  if (b_types.empty()) {
    r.log_count_per_n = kNegInf;
  } else {
    double top = kNegInf;
    for (const auto& [counts, lc] : b_types) top = std::max(top, lc);
    double s = 0.0;
    for (const auto& [counts, lc] : b_types) s += std::exp(lc - top);
    r.log_count_per_n = (top + std::log(s)) / static_cast<double>(n);
  }
  return r;
}

AdjacentTypeReport adjacent_type_discrepancy(const StratifiedMeasure& measure, std::span<const Label> y,
                                             const TypicalityParams& params, std::size_t trials,
                                             const RandomStream& stream, LabOptions options) {
  require(measure.size() >= 2, ErrorCode::PreconditionViolation, "adjacent types need at least two labels");
  require(trials >= 100, ErrorCode::PreconditionViolation, "adjacent_type_discrepancy needs trials >= 100");
  const double h = mixture_entropy(measure).total;
  const auto& q = measure.weights();

  auto log_stratum_probability = [&](std::span<const Label> labels, std::uint64_t salt) {
    if (!is_strongly_typical(labels, q, params.schedule.eta)) return kNegInf;
    double log_q = 0.0;
    for (Label a : labels) log_q += std::log(q[a]);
    const auto c = run_blocks<Counts>(trials, stream.derive(salt), options.threads, [&](RandomStream& s, Counts& acc) {
      std::vector<Point> points;
      ++acc.trials;
      if (draw_in_stratum(measure, labels, h, params.delta, s, points).typical) ++acc.hits;
    });
    return c.hits ? log_q + std::log(static_cast<double>(c.hits) / static_cast<double>(c.trials)) : kNegInf;
  };

  AdjacentTypeReport r;
  r.counts = empirical_type(y, measure.size()).counts;
  std::vector<Label> moved(y.begin(), y.end());
  const auto top = static_cast<Label>(std::max_element(r.counts.begin(), r.counts.end()) - r.counts.begin());
  const auto other = static_cast<Label>((top + 1) % measure.size());
  *std::find(moved.begin(), moved.end(), top) = other;
  r.adjacent_counts = empirical_type(moved, measure.size()).counts;
  r.log_probability = log_stratum_probability(y, 1);
  r.adjacent_log_probability = log_stratum_probability(moved, 2);
  r.log_ratio = r.adjacent_log_probability - r.log_probability;
  return r;
}

ExhaustiveResult exhaustive_oracle(const StratifiedMeasure& measure, std::size_t n, double delta) {
  require(n >= 1, ErrorCode::PreconditionViolation, "n must be positive");
  std::vector<double> neg_log;
  std::vector<double> prob;
  for (const auto& c : measure.components()) {
    for (const auto& piece : c.pieces) {
      const auto* atoms = std::get_if<AtomSet>(&piece);
      require(atoms != nullptr, ErrorCode::UnsupportedGeometry, "exhaustive_oracle needs an atoms-only measure");
      for (const auto& p : atoms->points) {
        const double l = log_density(measure, p);
        neg_log.push_back(-l);
        prob.push_back(std::exp(l));
      }
    }
  }
  const std::size_t k = neg_log.size();
  double total = 1.0;
  for (std::size_t i = 0; i < n; ++i) total *= static_cast<double>(k);
  require(total <= 1e7, ErrorCode::TooLarge, "enumeration of " + std::to_string(total) + " tuples exceeds 1e7");

  const double h = mixture_entropy(measure).total;
  ExhaustiveResult r;
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    double score = 0.0, p = 1.0;
    for (std::size_t i : idx) {
      score += neg_log[i];
      p *= prob[i];
    }
    if (within_weak_tolerance(score / static_cast<double>(n), h, delta)) {
      ++r.count;
      r.probability += p;
    }
    std::size_t pos = n;
    while (pos-- > 0 && ++idx[pos] == k) idx[pos] = 0;
    if (pos == static_cast<std::size_t>(-1)) break;
  }
  r.volume = static_cast<double>(r.count);
  return r;
}

}  // namespace strata
