#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "strata/config.hpp"
#include "strata/report.hpp"

namespace strata {

/// Parameter overrides from the command line; unset fields fall back to the
/// config's [experiment] table and then to the defaults.
struct ParameterOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<std::size_t>> n;
  std::optional<double> delta;
  std::optional<double> xi;
  std::optional<std::size_t> trials;
  std::optional<std::vector<int>> levels;
};

struct RunParameters {
  std::uint64_t seed = 0;
  std::vector<std::size_t> n{100};
  double delta = 0.1;
  double xi = 0.1;
  std::size_t trials = 10000;
  int first_level = 3;
  int last_level = 10;
  unsigned threads = 1;
};

/// Flags over file over defaults. Throws ConfigError when no seed is given
/// anywhere or a parameter is out of range.
RunParameters resolve_parameters(const MeasureConfig& config, const ParameterOverrides& flags, unsigned threads);

struct RunOutput {
  std::vector<ReportRow> rows;
  std::string plot_title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> plot;
  std::string raw_csv;   // set instead of rows by the cells experiment
};

/// Experiments: entropy, aep, stratum, dims, renyi, diagnose, cells.
RunOutput run_experiment(const std::string& experiment, const MeasureConfig& config, const RunParameters& params);

}  // namespace strata
