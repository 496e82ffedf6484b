#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace strata {

/// One CSV row. Every row echoes the full parameter set so it can be replayed.
struct ReportRow {
  std::string experiment;
  std::string quantity;
  std::optional<std::size_t> n;
  std::optional<double> delta;
  std::optional<double> xi;
  std::optional<std::size_t> trials;
  std::optional<int> level;
  std::uint64_t seed = 0;
  std::optional<double> estimate;
  std::optional<double> se;
  std::optional<double> bound_low;
  std::optional<double> bound_high;
  std::optional<bool> pass;
  std::string detail;
};

/// Git-style id of the build, or "unknown".
const char* build_id();

/// Column order: experiment, quantity, n, delta, xi, trials, level, seed,
/// build_id, estimate, se, bound_low, bound_high, pass, detail.
void write_csv(std::ostream& out, const std::vector<ReportRow>& rows);

/// Shortest round-trip decimal for v; "inf", "-inf" or "nan" otherwise.
std::string format_number(double v);

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Static SVG line plot. Non-finite points are skipped.
void write_svg(std::ostream& out, const std::string& title, const std::string& x_label, const std::string& y_label,
               const std::vector<PlotSeries>& series);

}  // namespace strata
