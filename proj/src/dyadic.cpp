#include "strata/dyadic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

namespace strata {

namespace {

using ShareMap = std::map<DyadicCell, ComponentShare>;

ShareMap component_cells(const RectifiableComponent& c, Label label, double q, int level, std::size_t max_entries) {
  ShareMap out;
  for (std::size_t j = 0; j < c.pieces.size(); ++j) {
    const double w = q * c.inner_weights[j];
    shape::for_each_cell(c.pieces[j], level, max_entries, [&](const DyadicCell& cell, const shape::CellOverlap& o) {
      auto& share = out[cell];
      share.component = label;
      share.probability += w * o.mass;
      share.measure += o.measure;
    });
    require(out.size() <= max_entries, ErrorCode::TooLarge,
            "cell table at level " + std::to_string(level) + " exceeds " + std::to_string(max_entries) + " entries");
  }
  return out;
}

double neg_p_log_p(double p) { return p > 0.0 ? -p * std::log(p) : 0.0; }

}  // namespace

double cell_measure(const RectifiableComponent& component, const DyadicCell& cell) {
  double total = 0.0;
  for (const auto& piece : component.pieces) total += shape::cell_overlap(piece, cell).measure;
  return total;
}

CellTable cell_table(const StratifiedMeasure& measure, int level, DyadicOptions options) {
  require(level >= 0 && level <= 60, ErrorCode::PreconditionViolation, "level must lie in [0, 60]");
  const std::size_t k = measure.size();
  std::vector<ShareMap> per_component(k);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < k; i = next.fetch_add(1)) {
      try {
        per_component[i] = component_cells(measure.components()[i], static_cast<Label>(i), measure.weights()[i],
                                           level, options.max_entries);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  {
    const auto workers = std::clamp<std::size_t>(options.threads, 1, k);
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  std::map<DyadicCell, CellEntry> merged;
  for (const auto& shares : per_component) {
    for (const auto& [cell, share] : shares) {
      auto& e = merged[cell];
      e.probability += share.probability;
      e.measure += share.measure;
      e.shares.push_back(share);
    }
    require(merged.size() <= options.max_entries, ErrorCode::TooLarge,
            "cell table at level " + std::to_string(level) + " exceeds " + std::to_string(options.max_entries) +
                " entries");
  }

  CellTable table;
  table.level = level;
  table.entries.reserve(merged.size());
  for (auto& [cell, e] : merged) {
    if (!(e.probability > 0.0)) continue;
    e.cell = cell;
    table.entries.push_back(std::move(e));
  }
  return table;
}

double quantized_entropy(const CellTable& table) {
  double h = 0.0;
  for (const auto& e : table.entries) h += neg_p_log_p(e.probability);
  return h;
}

double quantized_entropy(const StratifiedMeasure& measure, int level, DyadicOptions options) {
  return quantized_entropy(cell_table(measure, level, options));
}

PlugInEntropy plugin_quantized_entropy(const StratifiedMeasure& measure, int level, std::size_t samples,
                                       RandomStream& stream, bool miller_madow) {
  require(samples >= 1000, ErrorCode::PreconditionViolation, "plug-in entropy needs at least 1000 samples");
  std::map<DyadicCell, std::size_t> counts;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto y = static_cast<Label>(stream.categorical(measure.label_cdf()));
    ++counts[cell_index(measure.components()[y].sample(stream), level)];
  }
  require(counts.size() <= kMaxCellEntries, ErrorCode::TooLarge, "too many occupied cells");
  PlugInEntropy r;
  r.samples = samples;
  r.occupied = counts.size();
  r.miller_madow = miller_madow;
  const double n = static_cast<double>(samples);
  for (const auto& [cell, c] : counts) r.value += neg_p_log_p(static_cast<double>(c) / n);
  if (miller_madow) r.value += static_cast<double>(r.occupied - 1) / (2.0 * n);
  return r;
}

double plugin_standard_error(const CellTable& table, std::size_t samples) {
  require(samples >= 1, ErrorCode::PreconditionViolation, "samples must be positive");
  double m1 = 0.0, m2 = 0.0;
  for (const auto& e : table.entries) {
    const double l = -std::log(e.probability);
    m1 += e.probability * l;
    m2 += e.probability * l * l;
  }
  return std::sqrt(std::max(0.0, m2 - m1 * m1) / static_cast<double>(samples));
}

DimensionFit info_dimension(const StratifiedMeasure& measure, int first_level, int last_level,
                            DyadicOptions options) {
  require(last_level - first_level >= 2, ErrorCode::PreconditionViolation, "info_dimension needs at least 3 levels");
  DimensionFit fit;
  std::vector<double> xs;
  for (int l = first_level; l <= last_level; ++l) {
    fit.levels.push_back(l);
    fit.entropies.push_back(quantized_entropy(measure, l, options));
    xs.push_back(l * std::log(2.0));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += fit.entropies[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = fit.entropies[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = fit.entropies[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  // A constant sequence is fitted exactly.
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

RenyiDefect renyi_defect(const CellTable& table) {
  RenyiDefect r;
  r.level = table.level;
  for (const auto& e : table.entries) {
    require(e.measure > 0.0, ErrorCode::PreconditionViolation, "cell with positive probability has zero measure");
    r.quantized_entropy += neg_p_log_p(e.probability);
    r.defect_term += e.probability * std::log(e.measure);
  }
  r.value = r.quantized_entropy + r.defect_term;
  return r;
}

RenyiDefect renyi_defect(const StratifiedMeasure& measure, int level, DyadicOptions options) {
  return renyi_defect(cell_table(measure, level, options));
}

double dyadic_density_estimate(const StratifiedMeasure& measure, std::span<const double> x, int level) {
  if (x.size() != measure.ambient_dimension()) return 0.0;
  const DyadicCell cell = cell_index(x, level);
  double p = 0.0, mu = 0.0;
  for (std::size_t i = 0; i < measure.size(); ++i) {
    const auto& c = measure.components()[i];
    for (std::size_t j = 0; j < c.pieces.size(); ++j) {
      const auto o = shape::cell_overlap(c.pieces[j], cell);
      p += measure.weights()[i] * c.inner_weights[j] * o.mass;
      mu += o.measure;
    }
  }
  return mu > 0.0 ? p / mu : 0.0;
}

double log_sum_gap(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorCode::PreconditionViolation, "log-sum vectors differ in length");
  double lhs = 0.0, sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    require(a[i] >= 0.0 && b[i] >= 0.0, ErrorCode::PreconditionViolation, "log-sum entries must be nonnegative");
    sa += a[i];
    sb += b[i];
    if (a[i] > 0.0) lhs += a[i] * std::log(a[i] / b[i]);
  }
  const double rhs = sa > 0.0 ? sa * std::log(sa / sb) : 0.0;
  return lhs - rhs;
}

void write_cell_table_csv(std::ostream& out, const CellTable& table, std::size_t ambient_dimension, bool header) {
  if (header) {
    out << "level";
    for (std::size_t i = 0; i < ambient_dimension; ++i) out << ",j" << i;
    out << ",p,mu_cell,component_id\n";
  }
  char buf[32];
  auto num = [&](double v) {
    const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string_view(buf, static_cast<std::size_t>(len));
  };
  for (const auto& e : table.entries) {
    for (const auto& s : e.shares) {
      out << table.level;
      for (auto j : e.cell.index) out << ',' << j;
      out << ',' << num(s.probability);
      out << ',' << num(s.measure);
      out << ',' << s.component + 1 << '\n';
    }
  }
}

}  // namespace strata
