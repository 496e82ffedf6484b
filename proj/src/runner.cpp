#include "strata/runner.hpp"

#include <cmath>
#include <sstream>

#include "strata/aep_lab.hpp"
#include "strata/dyadic.hpp"
#include "strata/typicality.hpp"

namespace strata {

namespace {

constexpr std::size_t kStrataPerN = 10;
constexpr double kTightnessEpsilon = 0.3;
constexpr double kDimensionTolerance = 0.05;

// Stream ids per quantity, so every row depends only on (seed, quantity, n).
enum StreamId : std::uint64_t {
  kEntropyStream = 1,
  kProbabilityStream,
  kVolumeStream,
  kStratumLabelStream,
  kStratumStream,
  kDimensionStream,
  kDefectStream,
  kTightnessStream,
  kAdjacentStream,
};

struct Context {
  const StratifiedMeasure& measure;
  const RunParameters& p;
  std::string experiment;
  MixtureEntropy h;
  LabOptions lab;

  ReportRow row(std::string quantity, std::optional<std::size_t> n = std::nullopt) const {
    ReportRow r;
    r.experiment = experiment;
    r.quantity = std::move(quantity);
    r.n = n;
    r.delta = p.delta;
    r.xi = p.xi;
    r.trials = p.trials;
    r.seed = p.seed;
    return r;
  }

  RandomStream stream(StreamId id, std::uint64_t salt = 0) const { return RandomStream(p.seed, id).derive(salt); }
};

bool within(double estimate, double se, double lo, double hi) {
  const double slack = 3.0 * se + kRelTol * std::max({1.0, std::abs(lo), std::abs(hi)});
  return estimate >= lo - slack && estimate <= hi + slack;
}

std::string counts_text(std::span<const std::size_t> counts) {
  std::string s = "counts=";
  for (std::size_t i = 0; i < counts.size(); ++i) s += (i ? ";" : "") + std::to_string(counts[i]);
  return s;
}

// Draws label sequences from q until one is strongly typical.
std::vector<Label> typical_labels(const Context& c, std::size_t n, RandomStream& s, const Schedule& sched) {
  std::vector<Label> y(n);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    for (auto& a : y) a = static_cast<Label>(s.categorical(c.measure.label_cdf()));
    if (is_strongly_typical(y, c.measure.weights(), sched.eta)) return y;
  }
  throw Error(ErrorCode::PreconditionViolation, "no strongly typical label sequence found at n = " +
                                                    std::to_string(n));
}

void entropy_experiment(const Context& c, RunOutput& out) {
  auto total = c.row("H_total");
  total.estimate = c.h.total;
  out.rows.push_back(total);
  auto labels = c.row("H_Y");
  labels.estimate = c.h.labels;
  out.rows.push_back(labels);
  auto cond = c.row("H_X_given_Y");
  cond.estimate = c.h.conditional;
  out.rows.push_back(cond);
  for (std::size_t i = 0; i < c.measure.size(); ++i) {
    auto r = c.row("component_entropy");
    r.estimate = component_entropy(c.measure.components()[i]);
    r.detail = "component=" + std::to_string(i + 1) + ";m=" + std::to_string(c.measure.components()[i].dimension) +
               ";q=" + format_number(c.measure.weights()[i]);
    out.rows.push_back(r);
  }
  auto s = c.stream(kEntropyStream);
  const auto mc = entropy_monte_carlo(c.measure, s, c.p.trials);
  auto r = c.row("H_monte_carlo");
  r.estimate = mc.estimate;
  r.se = mc.standard_error;
  r.bound_low = c.h.total - 3.0 * mc.standard_error;
  r.bound_high = c.h.total + 3.0 * mc.standard_error;
  r.pass = within(mc.estimate, mc.standard_error, c.h.total, c.h.total);
  out.rows.push_back(r);
}

bool atoms_only(const StratifiedMeasure& m) {
  return m.size() == 1 && m.components()[0].dimension == 0;
}

void aep_experiment(const Context& c, RunOutput& out) {
  PlotSeries vol{"(1/n) ln volume", {}, {}}, hi{"H + delta", {}, {}}, lo{"H - delta", {}, {}};
  for (std::size_t n : c.p.n) {
    const auto prob = estimate_typical_probability(c.measure, n, c.p.delta, c.p.trials,
                                                   c.stream(kProbabilityStream, n), c.lab);
    auto r = c.row("typical_probability", n);
    r.estimate = prob.value;
    r.se = prob.standard_error;
    out.rows.push_back(r);

    const auto v = estimate_typical_volume(c.measure, n, c.p.delta, c.p.trials, c.stream(kVolumeStream, n), c.lab);
    const double nn = static_cast<double>(n);
    auto w = c.row("log_volume", n);
    w.estimate = v.log_volume.value;
    w.se = v.log_volume.standard_error;
    w.bound_low = std::log(v.probability.value) + nn * (c.h.total - c.p.delta);
    w.bound_high = nn * (c.h.total + c.p.delta);
    w.pass = within(*w.estimate, *w.se, *w.bound_low, *w.bound_high);
    w.detail = "typical_fraction=" + format_number(v.probability.value);
    out.rows.push_back(w);
    vol.x.push_back(nn);
    vol.y.push_back(v.log_volume.value / nn);
    hi.x.push_back(nn);
    hi.y.push_back(c.h.total + c.p.delta);
    lo.x.push_back(nn);
    lo.y.push_back(c.h.total - c.p.delta);

    if (atoms_only(c.measure)) {
      std::size_t atoms = 0;
      for (const auto& piece : c.measure.components()[0].pieces) atoms += std::get<AtomSet>(piece).points.size();
      if (std::pow(static_cast<double>(atoms), nn) <= 1e6) {
        const auto ex = exhaustive_oracle(c.measure, n, c.p.delta);
        auto e = c.row("exhaustive_volume", n);
        e.trials.reset();
        e.estimate = ex.volume;
        e.se = 0.0;
        e.detail = "count=" + std::to_string(ex.count) + ";probability=" + format_number(ex.probability);
        out.rows.push_back(e);
        auto cmp = c.row("log_volume_vs_exhaustive", n);
        cmp.estimate = v.log_volume.value;
        cmp.se = v.log_volume.standard_error;
        cmp.bound_low = cmp.bound_high = std::log(ex.volume);
        cmp.pass = within(*cmp.estimate, *cmp.se, *cmp.bound_low, *cmp.bound_high);
        out.rows.push_back(cmp);
      }
    }
  }
  out.plot_title = "Typical-set volume growth";
  out.x_label = "n";
  out.y_label = "(1/n) ln volume (nats)";
  out.plot = {vol, hi, lo};
}

void stratum_experiment(const Context& c, RunOutput& out) {
  for (std::size_t n : c.p.n) {
    const auto sched = schedule(n, c.p.xi, c.measure.size());
    const TypicalityParams params{c.p.delta, sched};
    const double nn = static_cast<double>(n);
    auto labels = c.stream(kStratumLabelStream, n);
    for (std::size_t k = 0; k < kStrataPerN; ++k) {
      const auto y = typical_labels(c, n, labels, sched);
      const auto rep = stratum_report(c.measure, y, params, c.p.trials, c.stream(kStratumStream, n).derive(k), c.lab);
      auto r = c.row("stratum_log_volume_per_n", n);
      r.estimate = rep.log_volume.value / nn;
      r.se = rep.log_volume.standard_error / nn;
      r.bound_high = c.h.conditional + c.p.delta + sched.delta_prime;
      r.pass = *r.estimate <= *r.bound_high + 3.0 * *r.se;
      r.detail = "stratum=" + std::to_string(k + 1) + ";" + counts_text(rep.type.counts) +
                 ";m=" + std::to_string(rep.dimension) + ";probability=" + format_number(rep.probability.value);
      out.rows.push_back(r);
    }
  }
}

void dims_experiment(const Context& c, RunOutput& out) {
  const DyadicOptions opts{c.p.threads};
  const auto fit = info_dimension(c.measure, c.p.first_level, c.p.last_level, opts);
  PlotSeries h{"H_#", {}, {}};
  for (std::size_t i = 0; i < fit.levels.size(); ++i) {
    auto r = c.row("quantized_entropy");
    r.level = fit.levels[i];
    r.estimate = fit.entropies[i];
    out.rows.push_back(r);
    h.x.push_back(fit.levels[i] * std::log(2.0));
    h.y.push_back(fit.entropies[i]);
  }
  double expected = 0.0;
  const auto dims = c.measure.dimensions();
  for (std::size_t i = 0; i < dims.size(); ++i) expected += c.measure.weights()[i] * dims[i];
  auto r = c.row("information_dimension");
  r.estimate = fit.slope;
  r.bound_low = expected - kDimensionTolerance;
  r.bound_high = expected + kDimensionTolerance;
  r.pass = fit.slope >= *r.bound_low && fit.slope <= *r.bound_high;
  r.detail = "levels=" + std::to_string(c.p.first_level) + ".." + std::to_string(c.p.last_level) +
             ";intercept=" + format_number(fit.intercept) + ";r2=" + format_number(fit.r_squared) +
             (fit.low_fit() ? ";warning=r2 below 0.999" : "");
  out.rows.push_back(r);

  for (std::size_t n : c.p.n) {
    const auto sched = schedule(n, c.p.xi, c.measure.size());
    const auto derived = dimension_interval(n, c.p.xi, c.measure.weights(), dims, IntervalMode::Derived);
    const auto literal = dimension_interval(n, c.p.xi, c.measure.weights(), dims, IntervalMode::Literal);
    auto s = c.stream(kDimensionStream, n);
    std::size_t typical = 0, in_derived = 0, in_literal = 0;
    std::vector<Label> y(n);
    for (std::size_t t = 0; t < c.p.trials; ++t) {
      for (auto& a : y) a = static_cast<Label>(s.categorical(c.measure.label_cdf()));
      if (!is_strongly_typical(y, c.measure.weights(), sched.eta)) continue;
      ++typical;
      const double m = static_cast<double>(stratum_dimension(y, dims));
      in_derived += derived.contains(m);
      in_literal += literal.contains(m);
    }
    const double denom = typical ? static_cast<double>(typical) : 1.0;
    auto d = c.row("dimension_in_derived_interval", n);
    d.estimate = static_cast<double>(in_derived) / denom;
    d.bound_low = derived.lo;
    d.bound_high = derived.hi;
    d.pass = in_derived == typical;
    d.detail = "strongly_typical=" + std::to_string(typical);
    out.rows.push_back(d);
    auto l = c.row("dimension_in_literal_interval", n);
    l.estimate = static_cast<double>(in_literal) / denom;
    l.bound_low = literal.lo;
    l.bound_high = literal.hi;
    l.detail = "strongly_typical=" + std::to_string(typical) + ";diagnostic";
    out.rows.push_back(l);
  }
  out.plot_title = "Quantized entropy";
  out.x_label = "l ln 2";
  out.y_label = "H_# (nats)";
  out.plot = {h};
}

void renyi_experiment(const Context& c, RunOutput& out) {
  const DyadicOptions opts{c.p.threads};
  // The limit is H_mu(rho) for measures with a single stratum.
  const std::optional<double> reference =
      c.measure.size() == 1 ? std::optional<double>(c.h.total) : std::nullopt;
  PlotSeries value{"H_# + sum p ln mu", {}, {}}, ref{"H_mu(rho)", {}, {}};
  for (int l = c.p.first_level; l <= c.p.last_level; ++l) {
    const auto d = renyi_defect(c.measure, l, opts);
    auto q = c.row("quantized_entropy");
    q.level = l;
    q.estimate = d.quantized_entropy;
    out.rows.push_back(q);
    auto t = c.row("defect_term");
    t.level = l;
    t.estimate = d.defect_term;
    out.rows.push_back(t);
    auto r = c.row("renyi_defect");
    r.level = l;
    r.estimate = d.value;
    if (reference) {
      r.bound_low = r.bound_high = *reference;
      r.detail = "error=" + format_number(d.value - *reference);
    }
    out.rows.push_back(r);
    value.x.push_back(l);
    value.y.push_back(d.value);
    if (reference) {
      ref.x.push_back(l);
      ref.y.push_back(*reference);
    }
  }
  out.plot_title = "Renyi defect";
  out.x_label = "level";
  out.y_label = "nats";
  out.plot = {value};
  if (reference) out.plot.push_back(ref);
}

void diagnose_experiment(const Context& c, RunOutput& out) {
  for (std::size_t n : c.p.n) {
    const auto sched = schedule(n, c.p.xi, c.measure.size());
    for (auto [name, v] : {std::pair{"eta", sched.eta}, {"delta_prime", sched.delta_prime},
                           {"epsilon", sched.epsilon}}) {
      auto r = c.row(name, n);
      r.trials.reset();
      r.estimate = v;
      out.rows.push_back(r);
    }
    const TypicalityParams params{c.p.delta, sched};
    const auto tv = estimate_tv_defect(c.measure, n, params, c.p.trials, c.stream(kDefectStream, n), c.lab);
    auto d = c.row("tv_defect", n);
    d.estimate = tv.defect.value;
    d.se = tv.defect.standard_error;
    d.bound_high = tv.weak_failure.value + tv.strong_failure.value;
    d.pass = tv.defect.value <= *d.bound_high + 3.0 * tv.defect.standard_error;
    d.detail = "union bound";
    out.rows.push_back(d);
    auto w = c.row("weak_failure", n);
    w.estimate = tv.weak_failure.value;
    w.se = tv.weak_failure.standard_error;
    out.rows.push_back(w);
    auto s = c.row("strong_failure", n);
    s.estimate = tv.strong_failure.value;
    s.se = tv.strong_failure.standard_error;
    s.bound_high = sched.epsilon;
    s.pass = tv.strong_failure.value <= sched.epsilon + 3.0 * tv.strong_failure.standard_error;
    out.rows.push_back(s);

    auto labels = c.stream(kAdjacentStream, n);
    const auto y = typical_labels(c, n, labels, sched);
    const auto type = empirical_type(y, c.measure.size());
    const auto bound = entropy_tv_bound(type.pmf, c.measure.weights());
    auto e = c.row("label_entropy_gap", n);
    e.trials.reset();
    e.estimate = bound.entropy_gap;
    e.bound_high = sched.delta_prime;
    e.pass = bound.entropy_gap <= sched.delta_prime + kRelTol;
    e.detail = counts_text(type.counts) + ";theta=" + format_number(bound.theta);
    out.rows.push_back(e);

    if (c.measure.size() >= 2) {
      const auto adj = adjacent_type_discrepancy(c.measure, y, params, c.p.trials, labels.derive(1), c.lab);
      auto a = c.row("adjacent_type_log_ratio", n);
      a.estimate = adj.log_ratio;
      a.detail = counts_text(adj.counts) + ";adjacent_" + counts_text(adj.adjacent_counts) + ";diagnostic";
      out.rows.push_back(a);
    }

    const auto tight = tightness_diagnostic(c.measure, n, c.p.delta, c.p.xi, kTightnessEpsilon, kStrataPerN,
                                            c.p.trials, c.stream(kTightnessStream, n), c.lab);
    auto t = c.row("tightness_fraction_in_B", n);
    t.estimate = tight.fraction_in_b;
    t.bound_low = tight.threshold;
    t.detail = "epsilon=" + format_number(kTightnessEpsilon) + ";sampled=" + std::to_string(tight.sampled) +
               ";log_count_per_n=" + format_number(tight.log_count_per_n) + ";diagnostic";
    out.rows.push_back(t);
  }
}

void cells_experiment(const Context& c, RunOutput& out) {
  std::ostringstream csv;
  for (int l = c.p.first_level; l <= c.p.last_level; ++l) {
    const auto table = cell_table(c.measure, l, DyadicOptions{c.p.threads});
    write_cell_table_csv(csv, table, c.measure.ambient_dimension(), l == c.p.first_level);
  }
  out.raw_csv = csv.str();
}

}  // namespace

RunParameters resolve_parameters(const MeasureConfig& config, const ParameterOverrides& flags, unsigned threads) {
  const ExperimentSection file = config.experiment.value_or(ExperimentSection{});
  RunParameters p;
  const auto seed = flags.seed ? flags.seed : file.seed;
  require(seed.has_value(), ErrorCode::ConfigError, "a seed is required (--seed or [experiment] seed)");
  p.seed = *seed;
  if (auto v = flags.n ? flags.n : file.n) p.n = *v;
  if (auto v = flags.delta ? flags.delta : file.delta) p.delta = *v;
  if (auto v = flags.xi ? flags.xi : file.xi) p.xi = *v;
  if (auto v = flags.trials ? flags.trials : file.trials) p.trials = *v;
  if (auto v = flags.levels ? flags.levels : file.levels) {
    require(v->size() == 2, ErrorCode::ConfigError, "levels must be given as first,last");
    p.first_level = (*v)[0];
    p.last_level = (*v)[1];
  }
  p.threads = std::max(1u, threads);
  require(!p.n.empty(), ErrorCode::ConfigError, "at least one n is required");
  for (auto n : p.n) require(n >= 1, ErrorCode::ConfigError, "n must be positive");
  require(p.delta >= 0.0, ErrorCode::ConfigError, "delta must be nonnegative");
  require(p.xi > 0.0 && p.xi < 0.5, ErrorCode::ConfigError, "xi must lie in (0, 1/2)");
  require(p.trials >= 1, ErrorCode::ConfigError, "trials must be positive");
  require(p.first_level >= 0 && p.first_level <= p.last_level && p.last_level <= 60, ErrorCode::ConfigError,
          "levels must satisfy 0 <= first <= last <= 60");
  return p;
}

RunOutput run_experiment(const std::string& experiment, const MeasureConfig& config, const RunParameters& params) {
  const auto measure = build_standard_form(config.components);
  Context c{measure, params, experiment, mixture_entropy(measure), LabOptions{params.threads}};
  RunOutput out;
  if (experiment == "entropy") {
    entropy_experiment(c, out);
  } else if (experiment == "aep") {
    aep_experiment(c, out);
  } else if (experiment == "stratum") {
    stratum_experiment(c, out);
  } else if (experiment == "dims") {
    dims_experiment(c, out);
  } else if (experiment == "renyi") {
    renyi_experiment(c, out);
  } else if (experiment == "diagnose") {
    diagnose_experiment(c, out);
  } else if (experiment == "cells") {
    cells_experiment(c, out);
  } else {
    throw Error(ErrorCode::ConfigError, "unknown experiment '" + experiment + "'");
  }
  return out;
}

}  // namespace strata
