#include "strata/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "strata/error.hpp"

namespace strata {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double cell_lower(std::int64_t j, int level) { return std::ldexp(static_cast<double>(j), -level); }

std::int64_t floor_scaled(double x, int level) {
  return static_cast<std::int64_t>(std::floor(std::ldexp(x, level)));
}

// Grid helpers. An empty breaks vector stands for the single cell [0,1]^m.
constexpr double kUnitBreaks[2] = {0.0, 1.0};
constexpr double kUnitMass[1] = {1.0};

class GridView {
 public:
  GridView(const DensityGrid& g, std::size_t m)
      : grid_(g), axes_(m), masses_(g.masses.empty() ? std::span<const double>(kUnitMass) : g.masses) {}

  std::size_t axes() const { return axes_; }
  std::span<const double> breaks(std::size_t k) const {
    return grid_.breaks.empty() ? std::span<const double>(kUnitBreaks) : std::span<const double>(grid_.breaks[k]);
  }
  std::size_t cells_on(std::size_t k) const { return breaks(k).size() - 1; }

  double cell_fraction(std::size_t flat) const {
    double frac = 1.0;
    for (std::size_t k = axes(); k-- > 0;) {
      const auto b = breaks(k);
      const std::size_t c = flat % (b.size() - 1);
      flat /= b.size() - 1;
      frac *= b[c + 1] - b[c];
    }
    return frac;
  }

  std::size_t locate(std::span<const double> t) const {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < axes(); ++k) {
      const auto b = breaks(k);
      auto it = std::upper_bound(b.begin(), b.end(), t[k]);
      std::size_t c = it == b.begin() ? 0 : static_cast<std::size_t>(it - b.begin()) - 1;
      c = std::min(c, b.size() - 2);
      flat = flat * (b.size() - 1) + c;
    }
    return flat;
  }

  double density(std::span<const double> t, double scale) const {
    const std::size_t flat = locate(t);
    return masses_[flat] / (cell_fraction(flat) * scale);
  }

  double entropy(double scale) const {
    double h = 0.0;
    for (std::size_t c = 0; c < masses_.size(); ++c) {
      if (masses_[c] > 0.0) h += masses_[c] * std::log(cell_fraction(c) * scale / masses_[c]);
    }
    return h;
  }

  // Writes the sampled parameter point into t (size axes()).
  void sample(RandomStream& stream, std::span<double> t) const {
    std::size_t flat = 0;
    if (masses_.size() > 1) {
      const double u = stream.uniform();
      double acc = 0.0;
      flat = masses_.size() - 1;
      for (std::size_t c = 0; c < masses_.size(); ++c) {
        acc += masses_[c];
        if (u < acc) {
          flat = c;
          break;
        }
      }
    }
    for (std::size_t k = axes(); k-- > 0;) {
      const auto b = breaks(k);
      const std::size_t c = flat % (b.size() - 1);
      flat /= b.size() - 1;
      t[k] = b[c] + stream.uniform() * (b[c + 1] - b[c]);
    }
  }

  // Probability of the parameter box prod_k [lo_k, hi_k].
  double mass_in(std::span<const double> lo, std::span<const double> hi) const {
    std::vector<std::vector<double>> frac(axes());
    for (std::size_t k = 0; k < axes(); ++k) {
      const auto b = breaks(k);
      frac[k].resize(b.size() - 1);
      for (std::size_t c = 0; c + 1 < b.size(); ++c) {
        const double x0 = std::max(lo[k], b[c]);
        const double x1 = std::min(hi[k], b[c + 1]);
        frac[k][c] = x1 > x0 ? (x1 - x0) / (b[c + 1] - b[c]) : 0.0;
      }
    }
    double total = 0.0;
    for (std::size_t flat = 0; flat < masses_.size(); ++flat) {
      if (masses_[flat] == 0.0) continue;
      double w = masses_[flat];
      std::size_t rest = flat;
      for (std::size_t k = axes(); k-- > 0 && w != 0.0;) {
        w *= frac[k][rest % frac[k].size()];
        rest /= frac[k].size();
      }
      total += w;
    }
    return total;
  }

 private:
  const DensityGrid& grid_;
  std::size_t axes_;
  std::span<const double> masses_;
};

std::optional<std::string> check_grid(const DensityGrid& g, std::size_t m) {
  if (g.breaks.empty() && g.masses.empty()) return std::nullopt;
  if (g.breaks.empty() && g.masses.size() == 1 && g.masses[0] == 1.0) return std::nullopt;
  if (g.breaks.size() != m) {
    return "density breaks must list one axis per carrier dimension (" + std::to_string(m) + ")";
  }
  std::size_t cells = 1;
  for (const auto& b : g.breaks) {
    if (b.size() < 2 || b.front() != 0.0 || b.back() != 1.0) {
      return std::string("density breaks must start at 0 and end at 1");
    }
    for (std::size_t i = 1; i < b.size(); ++i) {
      if (!(b[i] > b[i - 1])) return std::string("density breaks must be strictly increasing");
    }
    cells *= b.size() - 1;
  }
  if (g.masses.size() != cells) {
    return "density masses must have " + std::to_string(cells) + " entries";
  }
  double sum = 0.0;
  for (double w : g.masses) {
    if (!(w >= 0.0) || !std::isfinite(w)) return std::string("density masses must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) return std::string("density masses must sum to 1");
  return std::nullopt;
}

Point direction(const Segment& s) {
  Point d(s.start.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = s.end[i] - s.start[i];
  return d;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double segment_tolerance(const Segment& s) {
  return kRelTol * std::max({1.0, max_abs(s.start), max_abs(s.end)});
}

// Parameter interval of the segment inside a half-open cube.
std::pair<double, double> clip_segment(const Segment& s, const DyadicCell& cell) {
  double t_lo = 0.0, t_hi = 1.0;
  for (std::size_t i = 0; i < s.start.size(); ++i) {
    const double lo = cell_lower(cell.index[i], cell.level);
    const double hi = cell_lower(cell.index[i] + 1, cell.level);
    const double a = s.start[i];
    const double d = s.end[i] - a;
    if (d == 0.0) {
      if (!(a >= lo && a < hi)) return {1.0, 0.0};
      continue;
    }
    double t1 = (lo - a) / d, t2 = (hi - a) / d;
    if (t1 > t2) std::swap(t1, t2);
    t_lo = std::max(t_lo, t1);
    t_hi = std::min(t_hi, t2);
  }
  return {t_lo, t_hi};
}

double patch_tolerance(const AxisPatch& p) {
  return kRelTol * std::max({1.0, max_abs(p.anchor), max_abs(p.sides)});
}

std::optional<std::vector<double>> patch_parameters(const AxisPatch& p, std::span<const double> x) {
  if (x.size() != p.anchor.size()) return std::nullopt;
  const double tol = patch_tolerance(p);
  std::vector<bool> free(p.anchor.size(), false);
  for (int a : p.axes) free[static_cast<std::size_t>(a)] = true;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!free[i] && std::abs(x[i] - p.anchor[i]) > tol) return std::nullopt;
  }
  std::vector<double> t(p.axes.size());
  for (std::size_t k = 0; k < p.axes.size(); ++k) {
    const auto a = static_cast<std::size_t>(p.axes[k]);
    const double offset = x[a] - p.anchor[a];
    if (offset < -tol || offset > p.sides[k] + tol) return std::nullopt;
    t[k] = std::clamp(offset / p.sides[k], 0.0, 1.0);
  }
  return t;
}

// Segment representation of a 1-dimensional carrier, used for overlap tests.
std::optional<Segment> as_segment(const Shape& s) {
  if (const auto* seg = std::get_if<Segment>(&s)) return *seg;
  if (const auto* p = std::get_if<AxisPatch>(&s); p && p->axes.size() == 1) {
    Segment seg{p->anchor, p->anchor, {}};
    seg.end[static_cast<std::size_t>(p->axes[0])] += p->sides[0];
    return seg;
  }
  return std::nullopt;
}

bool segments_overlap(const Segment& a, const Segment& b) {
  const Point da = direction(a);
  const double la = norm2(da);
  const double tol = std::max(segment_tolerance(a), segment_tolerance(b));
  // Both endpoints of b must lie on the line through a.
  auto param_on_line = [&](const Point& x) -> std::optional<double> {
    double t = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) t += (x[i] - a.start[i]) * da[i];
    t /= la * la;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (std::abs(a.start[i] + t * da[i] - x[i]) > tol) return std::nullopt;
    }
    return t;
  };
  const auto t0 = param_on_line(b.start);
  const auto t1 = param_on_line(b.end);
  if (!t0 || !t1) return false;
  const double lo = std::max(0.0, std::min(*t0, *t1));
  const double hi = std::min(1.0, std::max(*t0, *t1));
  return (hi - lo) * la > tol;
}

bool patches_overlap(const AxisPatch& a, const AxisPatch& b) {
  if (a.axes != b.axes) return false;
  const double tol = std::max(patch_tolerance(a), patch_tolerance(b));
  std::vector<bool> free(a.anchor.size(), false);
  for (int ax : a.axes) free[static_cast<std::size_t>(ax)] = true;
  for (std::size_t i = 0; i < a.anchor.size(); ++i) {
    if (!free[i] && std::abs(a.anchor[i] - b.anchor[i]) > tol) return false;
  }
  for (std::size_t k = 0; k < a.axes.size(); ++k) {
    const auto i = static_cast<std::size_t>(a.axes[k]);
    const double lo = std::max(a.anchor[i], b.anchor[i]);
    const double hi = std::min(a.anchor[i] + a.sides[k], b.anchor[i] + b.sides[k]);
    if (hi - lo <= tol) return false;
  }
  return true;
}

}  // namespace

DensityGrid DensityGrid::uniform(std::size_t param_dims) {
  DensityGrid g;
  g.breaks.assign(param_dims, std::vector<double>{0.0, 1.0});
  g.masses = {1.0};
  return g;
}

AxisPatch make_box(Point lower, Point upper, DensityGrid density) {
  AxisPatch p;
  p.anchor = lower;
  p.axes.resize(lower.size());
  std::iota(p.axes.begin(), p.axes.end(), 0);
  p.sides.resize(lower.size());
  for (std::size_t i = 0; i < lower.size() && i < upper.size(); ++i) p.sides[i] = upper[i] - lower[i];
  p.density = std::move(density);
  p.box_upper = std::move(upper);
  return p;
}

DyadicCell cell_index(std::span<const double> point, int level) {
  DyadicCell c;
  c.level = level;
  c.index.reserve(point.size());
  for (double x : point) c.index.push_back(floor_scaled(x, level));
  return c;
}

namespace shape {

int dimension(const Shape& s) {
  return std::visit(overloaded{[](const AtomSet&) { return 0; }, [](const Segment&) { return 1; },
                               [](const AxisPatch& p) { return static_cast<int>(p.axes.size()); }},
                    s);
}

std::size_t ambient(const Shape& s) {
  return std::visit(overloaded{[](const AtomSet& a) { return a.points.empty() ? 0 : a.points.front().size(); },
                               [](const Segment& g) { return g.start.size(); },
                               [](const AxisPatch& p) { return p.anchor.size(); }},
                    s);
}

std::string_view kind_name(const Shape& s) {
  return std::visit(overloaded{[](const AtomSet&) -> std::string_view { return "atoms"; },
                               [](const Segment&) -> std::string_view { return "segment"; },
                               [](const AxisPatch& p) -> std::string_view { return p.box_upper ? "box" : "patch"; }},
                    s);
}

std::optional<std::string> check(const Shape& s) {
  return std::visit(
      overloaded{
          [](const AtomSet& a) -> std::optional<std::string> {
            if (a.points.empty()) return std::string("atom set needs at least one point");
            if (a.pmf.size() != a.points.size()) return std::string("atom pmf length must match points");
            const std::size_t d = a.points.front().size();
            if (d == 0) return std::string("atoms need at least one coordinate");
            double sum = 0.0;
            for (std::size_t i = 0; i < a.points.size(); ++i) {
              if (a.points[i].size() != d) return std::string("atoms must share the ambient dimension");
              if (!(a.pmf[i] >= 0.0)) return std::string("atom pmf must be nonnegative");
              sum += a.pmf[i];
              for (std::size_t j = 0; j < i; ++j) {
                if (a.points[i] == a.points[j]) return std::string("duplicate atom");
              }
            }
            if (std::abs(sum - 1.0) > 1e-12) return std::string("atom pmf must sum to 1");
            return std::nullopt;
          },
          [](const Segment& g) -> std::optional<std::string> {
            if (g.start.empty() || g.start.size() != g.end.size()) {
              return std::string("segment endpoints must share the ambient dimension");
            }
            if (!(norm2(direction(g)) > 0.0)) return std::string("segment must have positive length");
            return check_grid(g.density, 1);
          },
          [](const AxisPatch& p) -> std::optional<std::string> {
            const std::size_t d = p.anchor.size();
            if (d == 0) return std::string("patch anchor must be nonempty");
            if (p.axes.empty()) return std::string("patch needs at least one axis (use atoms for m = 0)");
            if (p.axes.size() != p.sides.size()) return std::string("patch axes and sides must have equal length");
            for (std::size_t k = 0; k < p.axes.size(); ++k) {
              if (p.axes[k] < 0 || static_cast<std::size_t>(p.axes[k]) >= d) {
                return std::string("patch axis out of range");
              }
              if (k > 0 && p.axes[k] <= p.axes[k - 1]) return std::string("patch axes must be strictly increasing");
              if (!(p.sides[k] > 0.0) || !std::isfinite(p.sides[k])) {
                return std::string("patch sides must be positive");
              }
            }
            if (p.box_upper && p.box_upper->size() != d) return std::string("box corners must share the dimension");
            return check_grid(p.density, p.axes.size());
          }},
      s);
}

double carrier_measure(const Shape& s) {
  return std::visit(overloaded{[](const AtomSet& a) { return static_cast<double>(a.points.size()); },
                               [](const Segment& g) { return norm2(direction(g)); },
                               [](const AxisPatch& p) {
                                 return std::accumulate(p.sides.begin(), p.sides.end(), 1.0, std::multiplies<>());
                               }},
                    s);
}

std::optional<double> local_density(const Shape& s, std::span<const double> x) {
  return std::visit(
      overloaded{
          [&](const AtomSet& a) -> std::optional<double> {
            for (std::size_t i = 0; i < a.points.size(); ++i) {
              const auto& p = a.points[i];
              if (p.size() != x.size()) return std::nullopt;
              const double tol = kRelTol * std::max(1.0, max_abs(p));
              bool same = true;
              for (std::size_t j = 0; j < p.size() && same; ++j) same = std::abs(p[j] - x[j]) <= tol;
              if (same) return a.pmf[i];
            }
            return std::nullopt;
          },
          [&](const Segment& g) -> std::optional<double> {
            if (x.size() != g.start.size()) return std::nullopt;
            const Point d = direction(g);
            const double len = norm2(d);
            const double tol = segment_tolerance(g);
            double t = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) t += (x[i] - g.start[i]) * d[i];
            t /= len * len;
            if (t < -tol / len || t > 1.0 + tol / len) return std::nullopt;
            t = std::clamp(t, 0.0, 1.0);
            for (std::size_t i = 0; i < x.size(); ++i) {
              if (std::abs(g.start[i] + t * d[i] - x[i]) > tol) return std::nullopt;
            }
            const double tt[1] = {t};
            return GridView(g.density, 1).density(tt, len);
          },
          [&](const AxisPatch& p) -> std::optional<double> {
            const auto t = patch_parameters(p, x);
            if (!t) return std::nullopt;
            return GridView(p.density, p.axes.size()).density(*t, carrier_measure(p));
          }},
      s);
}

double entropy(const Shape& s) {
  return std::visit(overloaded{[](const AtomSet& a) {
                                 double h = 0.0;
                                 for (double p : a.pmf) {
                                   if (p > 0.0) h -= p * std::log(p);
                                 }
                                 return h;
                               },
                               [](const Segment& g) { return GridView(g.density, 1).entropy(norm2(direction(g))); },
                               [](const AxisPatch& p) {
                                 return GridView(p.density, p.axes.size()).entropy(carrier_measure(p));
                               }},
                    s);
}

Point sample(const Shape& s, RandomStream& stream) {
  return std::visit(overloaded{[&](const AtomSet& a) {
                                 std::vector<double> cdf(a.pmf.size());
                                 std::partial_sum(a.pmf.begin(), a.pmf.end(), cdf.begin());
                                 return a.points[stream.categorical(cdf)];
                               },
                               [&](const Segment& g) {
                                 double t = 0.0;
                                 GridView(g.density, 1).sample(stream, std::span<double>(&t, 1));
                                 Point x(g.start.size());
                                 for (std::size_t i = 0; i < x.size(); ++i) {
                                   x[i] = g.start[i] + t * (g.end[i] - g.start[i]);
                                 }
                                 return x;
                               },
                               [&](const AxisPatch& p) {
                                 std::vector<double> t(p.axes.size());
                                 GridView(p.density, p.axes.size()).sample(stream, t);
                                 Point x = p.anchor;
                                 for (std::size_t k = 0; k < p.axes.size(); ++k) {
                                   x[static_cast<std::size_t>(p.axes[k])] += t[k] * p.sides[k];
                                 }
                                 return x;
                               }},
                    s);
}

CellOverlap cell_overlap(const Shape& s, const DyadicCell& cell) {
  if (cell.index.size() != ambient(s)) throw Error(ErrorCode::AmbientMismatch, "cell and carrier dimensions differ");
  return std::visit(
      overloaded{
          [&](const AtomSet& a) {
            CellOverlap o;
            for (std::size_t i = 0; i < a.points.size(); ++i) {
              if (cell_index(a.points[i], cell.level) == cell) {
                o.measure += 1.0;
                o.mass += a.pmf[i];
              }
            }
            return o;
          },
          [&](const Segment& g) {
            CellOverlap o;
            const auto [lo, hi] = clip_segment(g, cell);
            if (hi > lo) {
              o.measure = (hi - lo) * norm2(direction(g));
              const double l[1] = {lo}, h[1] = {hi};
              o.mass = GridView(g.density, 1).mass_in(l, h);
            }
            return o;
          },
          [&](const AxisPatch& p) {
            CellOverlap o;
            std::vector<bool> free(p.anchor.size(), false);
            for (int ax : p.axes) free[static_cast<std::size_t>(ax)] = true;
            for (std::size_t i = 0; i < p.anchor.size(); ++i) {
              if (free[i]) continue;
              const double lo = cell_lower(cell.index[i], cell.level);
              const double hi = cell_lower(cell.index[i] + 1, cell.level);
              if (!(p.anchor[i] >= lo && p.anchor[i] < hi)) return o;
            }
            std::vector<double> t_lo(p.axes.size()), t_hi(p.axes.size());
            double measure = 1.0;
            for (std::size_t k = 0; k < p.axes.size(); ++k) {
              const auto i = static_cast<std::size_t>(p.axes[k]);
              const double lo = cell_lower(cell.index[i], cell.level);
              const double hi = cell_lower(cell.index[i] + 1, cell.level);
              t_lo[k] = std::max(0.0, (lo - p.anchor[i]) / p.sides[k]);
              t_hi[k] = std::min(1.0, (hi - p.anchor[i]) / p.sides[k]);
              if (!(t_hi[k] > t_lo[k])) return o;
              measure *= (t_hi[k] - t_lo[k]) * p.sides[k];
            }
            o.measure = measure;
            o.mass = GridView(p.density, p.axes.size()).mass_in(t_lo, t_hi);
            return o;
          }},
      s);
}

void for_each_cell(const Shape& s, int level, std::size_t max_cells,
                   const std::function<void(const DyadicCell&, const CellOverlap&)>& visit) {
  auto too_large = [&](std::size_t count) {
    if (count > max_cells) {
      throw Error(ErrorCode::TooLarge, "level " + std::to_string(level) + " touches more than " +
                                           std::to_string(max_cells) + " cells");
    }
  };
  std::visit(
      overloaded{
          [&](const AtomSet& a) {
            too_large(a.points.size());
            std::set<DyadicCell> seen;
            for (const auto& p : a.points) {
              auto c = cell_index(p, level);
              if (seen.insert(c).second) visit(c, cell_overlap(s, c));
            }
          },
          [&](const Segment& g) {
            std::vector<double> ts{0.0, 1.0};
            for (std::size_t i = 0; i < g.start.size(); ++i) {
              const double a = g.start[i];
              const double d = g.end[i] - a;
              if (d == 0.0) continue;
              const double lo = std::min(a, g.end[i]), hi = std::max(a, g.end[i]);
              const std::int64_t j0 = static_cast<std::int64_t>(std::ceil(std::ldexp(lo, level)));
              const std::int64_t j1 = floor_scaled(hi, level);
              if (j1 >= j0) too_large(ts.size() + static_cast<std::size_t>(j1 - j0 + 1));
              for (std::int64_t j = j0; j <= j1; ++j) {
                const double t = (cell_lower(j, level) - a) / d;
                if (t > 0.0 && t < 1.0) ts.push_back(t);
              }
            }
            std::sort(ts.begin(), ts.end());
            ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
            std::set<DyadicCell> seen;
            Point mid(g.start.size());
            for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
              const double t = 0.5 * (ts[k] + ts[k + 1]);
              for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = g.start[i] + t * (g.end[i] - g.start[i]);
              auto c = cell_index(mid, level);
              if (!seen.insert(c).second) continue;
              const auto o = cell_overlap(s, c);
              if (o.measure > 0.0 || o.mass > 0.0) visit(c, o);
            }
          },
          [&](const AxisPatch& p) {
            const std::size_t d = p.anchor.size();
            std::vector<std::int64_t> first(d), last(d);
            for (std::size_t i = 0; i < d; ++i) first[i] = last[i] = floor_scaled(p.anchor[i], level);
            std::size_t count = 1;
            for (std::size_t k = 0; k < p.axes.size(); ++k) {
              const auto i = static_cast<std::size_t>(p.axes[k]);
              last[i] = floor_scaled(p.anchor[i] + p.sides[k], level);
              const auto span = static_cast<std::size_t>(last[i] - first[i] + 1);
              if (count > max_cells / span) too_large(max_cells + 1);
              count *= span;
            }
            too_large(count);
            DyadicCell c{level, first};
            while (true) {
              const auto o = cell_overlap(s, c);
              if (o.measure > 0.0 || o.mass > 0.0) visit(c, o);
              std::size_t i = d;
              while (i-- > 0) {
                if (c.index[i] < last[i]) {
                  ++c.index[i];
                  break;
                }
                c.index[i] = first[i];
              }
              if (i == static_cast<std::size_t>(-1)) break;
            }
          }},
      s);
}

std::optional<bool> overlaps(const Shape& a, const Shape& b) {
  if (dimension(a) != dimension(b)) return false;
  if (dimension(a) == 0) {
    const auto& x = std::get<AtomSet>(a);
    const auto& y = std::get<AtomSet>(b);
    for (const auto& p : y.points) {
      if (local_density(x, p).has_value()) return true;
    }
    return false;
  }
  if (dimension(a) == 1) {
    const auto sa = as_segment(a);
    const auto sb = as_segment(b);
    if (!sa || !sb) return std::nullopt;
    return segments_overlap(*sa, *sb);
  }
  const auto* pa = std::get_if<AxisPatch>(&a);
  const auto* pb = std::get_if<AxisPatch>(&b);
  if (!pa || !pb) return std::nullopt;
  return patches_overlap(*pa, *pb);
}

}  // namespace shape
}  // namespace strata
