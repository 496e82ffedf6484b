#pragma once

#include <cmath>
#include <vector>

#include "strata/measure.hpp"

namespace fixtures {

using namespace strata;

inline StratifiedMeasure build(std::vector<WeightedShape> specs) { return build_standard_form(specs); }

inline AtomSet atom(Point p) { return AtomSet{{std::move(p)}, {1.0}}; }

inline Segment segment(Point a, Point b, DensityGrid density = {}) {
  return Segment{std::move(a), std::move(b), std::move(density)};
}

// ½ δ_{0.5} + ½ Uniform[0,1] in d = 1.
inline StratifiedMeasure m1() { return build({{0.5, atom({0.5})}, {0.5, segment({0.0}, {1.0})}}); }

// ½ δ_{(0.25, 0.75)} + ½ uniform on the unit-square diagonal.
inline StratifiedMeasure m3() {
  return build({{0.5, atom({0.25, 0.75})}, {0.5, segment({0.0, 0.0}, {1.0, 1.0})}});
}

inline StratifiedMeasure three_atoms() {
  return build({{1.0, AtomSet{{{0.1}, {0.4}, {0.8}}, {0.5, 0.25, 0.25}}}});
}

inline StratifiedMeasure unit_interval() { return build({{1.0, segment({0.0}, {1.0})}}); }

inline StratifiedMeasure uniform_square() { return build({{1.0, make_box({0.0, 0.0}, {1.0, 1.0})}}); }

inline StratifiedMeasure diagonal() { return build({{1.0, segment({0.0, 0.0}, {1.0, 1.0})}}); }

inline StratifiedMeasure single_atom() { return build({{1.0, atom({0.25, 0.75})}}); }

// Segment [0.1, 0.85] with mass ½ on parameter t < 1/3 and ½ on t >= 1/3.
// The density break sits off every dyadic grid line.
inline constexpr double kOffGridStart = 0.1;
inline constexpr double kOffGridLength = 0.75;
inline constexpr double kOffGridBreak = 1.0 / 3.0;
inline StratifiedMeasure offgrid_segment() {
  DensityGrid g{{{0.0, kOffGridBreak, 1.0}}, {0.5, 0.5}};
  return build({{1.0, segment({kOffGridStart}, {kOffGridStart + kOffGridLength}, g)}});
}

// Mixed strata in d = 3: atoms, two segments, a non-uniform patch and a box.
inline StratifiedMeasure strata_3d() {
  DensityGrid seg{{{0.0, 0.5, 1.0}}, {0.7, 0.3}};
  DensityGrid patch{{{0.0, 0.5, 1.0}, {0.0, 1.0}}, {0.25, 0.75}};
  return build({{0.2, AtomSet{{{0.9, 0.9, 0.9}, {0.1, 0.9, 0.5}}, {0.5, 0.5}}},
                {0.15, segment({0.0, 0.1, 0.2}, {0.6, 0.7, 0.2}, seg)},
                {0.15, segment({0.2, 0.0, 0.8}, {0.2, 0.5, 0.8})},
                {0.3, AxisPatch{{0.0, 0.0, 0.5}, {0, 1}, {0.5, 1.0}, patch, std::nullopt}},
                {0.2, make_box({0.5, 0.0, 0.0}, {1.0, 0.5, 1.0})}});
}

inline const double kLnSqrt2 = 0.5 * std::log(2.0);

}  // namespace fixtures
