#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "strata/random.hpp"

namespace strata {

using Point = std::vector<double>;

/// Relative tolerance for membership tests and exact-value comparisons.
inline constexpr double kRelTol = 1e-9;

/// Piecewise-constant density on the parameter box [0,1]^m.
///
/// `breaks[k]` partitions parameter axis k (first entry 0, last entry 1,
/// strictly increasing). `masses` holds the probability of each grid cell in
/// row-major order (last axis fastest) and sums to 1. An empty `breaks`
/// means the uniform density (one cell of mass 1).
struct DensityGrid {
  std::vector<std::vector<double>> breaks;
  std::vector<double> masses;

  static DensityGrid uniform(std::size_t param_dims);
  bool operator==(const DensityGrid&) const = default;
};

/// Finitely many atoms with a probability mass function (m = 0).
struct AtomSet {
  std::vector<Point> points;
  std::vector<double> pmf;
  bool operator==(const AtomSet&) const = default;
};

/// Straight segment from `start` to `end` (m = 1), density w.r.t. arc length.
struct Segment {
  Point start;
  Point end;
  DensityGrid density;
  bool operator==(const Segment&) const = default;
};

/// Axis-aligned m-dimensional rectangle: anchor + sum_k t_k * sides[k] * e_{axes[k]}.
/// A full-dimensional box is a patch over every axis; `box_upper` keeps the
/// upper corner as written in a config so it can be written back unchanged.
struct AxisPatch {
  Point anchor;
  std::vector<int> axes;
  std::vector<double> sides;
  DensityGrid density;
  std::optional<Point> box_upper;
  bool operator==(const AxisPatch&) const = default;
};

using Shape = std::variant<AtomSet, Segment, AxisPatch>;

AxisPatch make_box(Point lower, Point upper, DensityGrid density = {});

/// Half-open dyadic cube prod_i [j_i 2^-l, (j_i + 1) 2^-l).
struct DyadicCell {
  int level = 0;
  std::vector<std::int64_t> index;
  bool operator==(const DyadicCell&) const = default;
  auto operator<=>(const DyadicCell&) const = default;
};

DyadicCell cell_index(std::span<const double> point, int level);

namespace shape {

int dimension(const Shape& s);
std::size_t ambient(const Shape& s);
std::string_view kind_name(const Shape& s);

/// Checks the catalog invariants; returns a message for the first violation.
std::optional<std::string> check(const Shape& s);

/// H^m of the carrier.
double carrier_measure(const Shape& s);

/// Density w.r.t. H^m at x, or nullopt when x is not on the carrier.
std::optional<double> local_density(const Shape& s, std::span<const double> x);

/// -integral f ln f dH^m over the carrier.
double entropy(const Shape& s);

Point sample(const Shape& s, RandomStream& stream);

/// H^m(C ∩ E) and the probability of C for one dyadic cell.
struct CellOverlap {
  double mass = 0.0;
  double measure = 0.0;
};
CellOverlap cell_overlap(const Shape& s, const DyadicCell& cell);

/// Visits every level-l cell with positive H^m(C ∩ E) or positive mass.
/// Throws TooLarge when more than `max_cells` candidate cells would be visited.
void for_each_cell(const Shape& s, int level, std::size_t max_cells,
                   const std::function<void(const DyadicCell&, const CellOverlap&)>& visit);

/// True when the two same-dimension carriers share a set of positive H^m measure.
/// nullopt when the pair is not decidable by this catalog.
std::optional<bool> overlaps(const Shape& a, const Shape& b);

}  // namespace shape
}  // namespace strata
