#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "strata/measure.hpp"

namespace strata {

/// Experiment parameters as written in a config file; all optional.
struct ExperimentSection {
  std::optional<std::string> kind;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<std::size_t>> n;
  std::optional<double> delta;
  std::optional<double> xi;
  std::optional<std::size_t> trials;
  std::optional<std::vector<int>> levels;   // [first, last]
  std::optional<std::string> out;
  bool operator==(const ExperimentSection&) const = default;
};

/// A measure description plus optional experiment defaults.
struct MeasureConfig {
  std::size_t ambient_dimension = 0;
  std::vector<WeightedShape> components;
  std::optional<ExperimentSection> experiment;
  bool operator==(const MeasureConfig&) const = default;
};

/// Parses TOML text. Throws Error(ConfigError) with the source name and
/// position on malformed input. Shapes are not validated here.
MeasureConfig parse_config(std::string_view text, std::string_view source = "<config>");
MeasureConfig load_config(const std::filesystem::path& path);

/// Canonical TOML text. Floats use the shortest representation that reads
/// back to the same double, so parse_config(write_config(c)) == c.
std::string write_config(const MeasureConfig& config);

/// Validator diagnostics plus a check that the declared ambient dimension
/// matches every component.
std::vector<Diagnostic> validate_config(const MeasureConfig& config);

}  // namespace strata
