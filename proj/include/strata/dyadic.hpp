#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "strata/geometry.hpp"
#include "strata/measure.hpp"
#include "strata/random.hpp"

namespace strata {

inline constexpr std::size_t kMaxCellEntries = 10'000'000;

struct ComponentShare {
  Label component = 0;
  double probability = 0.0;   // q_i ρ_i(C)
  double measure = 0.0;       // μ_i(C ∩ E_i)
};

struct CellEntry {
  DyadicCell cell;
  double probability = 0.0;   // ρ(C)
  double measure = 0.0;       // μ(C ∩ E), μ = Σ μ_i
  std::vector<ComponentShare> shares;
};

/// Level-l cells with positive probability, sorted by cell index.
struct CellTable {
  int level = 0;
  std::vector<CellEntry> entries;
};

struct DyadicOptions {
  unsigned threads = 1;
  std::size_t max_entries = kMaxCellEntries;
};

/// H^m(C ∩ E) for one component's carrier.
double cell_measure(const RectifiableComponent& component, const DyadicCell& cell);

CellTable cell_table(const StratifiedMeasure& measure, int level, DyadicOptions options = {});

/// -Σ p ln p over the table.
double quantized_entropy(const CellTable& table);
double quantized_entropy(const StratifiedMeasure& measure, int level, DyadicOptions options = {});

struct PlugInEntropy {
  double value = 0.0;
  std::size_t samples = 0;
  std::size_t occupied = 0;
  bool miller_madow = false;
};

/// Quantized entropy from empirical cell frequencies of i.i.d. draws.
/// Miller-Madow adds (occupied - 1) / (2 samples).
PlugInEntropy plugin_quantized_entropy(const StratifiedMeasure& measure, int level, std::size_t samples,
                                       RandomStream& stream, bool miller_madow = true);

/// Asymptotic standard error sqrt(Var[-ln p(C)] / samples) of the plug-in estimate.
double plugin_standard_error(const CellTable& table, std::size_t samples);

struct DimensionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<int> levels;
  std::vector<double> entropies;   // H_# per level
  bool low_fit() const { return r_squared < 0.999; }
};

/// OLS fit of H_#(X_{2^l}) against l ln 2.
DimensionFit info_dimension(const StratifiedMeasure& measure, int first_level = 3, int last_level = 10,
                            DyadicOptions options = {});

struct RenyiDefect {
  int level = 0;
  double quantized_entropy = 0.0;   // H_#
  double defect_term = 0.0;         // Σ p ln μ(C ∩ E)
  double value = 0.0;               // H_# + defect_term
};

RenyiDefect renyi_defect(const CellTable& table);
RenyiDefect renyi_defect(const StratifiedMeasure& measure, int level, DyadicOptions options = {});

/// ρ(C) / μ(C ∩ E) for the level-l cell containing x; 0 when μ(C ∩ E) = 0.
double dyadic_density_estimate(const StratifiedMeasure& measure, std::span<const double> x, int level);

/// Σ a_i ln(a_i / b_i) - a ln(a / b) with a = Σ a_i, b = Σ b_i (0 ln 0 = 0).
/// Nonnegative by the log-sum inequality.
double log_sum_gap(std::span<const double> a, std::span<const double> b);

/// One row per (cell, component): level, j_0..j_{d-1}, p, mu_cell, component_id.
void write_cell_table_csv(std::ostream& out, const CellTable& table, std::size_t ambient_dimension,
                          bool header = true);

}  // namespace strata
