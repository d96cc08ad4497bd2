#pragma once

// Monte Carlo operating characteristics of the ranking + rank-sum pipeline.
//
// Each participant has a latent clinical meaningfulness score; the treated
// arm (A) is shifted by `delta`. The simulated panel observes the latent
// score plus Normal(0, noise_sd^2) noise, optionally rounded to a grid to
// produce ties, and ranks the observations (midranks on ties).

#include "impact/rank_stats.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace impact::sim {

enum class EffectFamily : std::uint8_t { LocationShiftNormal, LocationShiftLogistic };
std::string_view to_string(EffectFamily f);
std::optional<EffectFamily> parse_family(std::string_view text);

struct TiePolicy {
  enum class Kind : std::uint8_t { NoTies, RoundToGrid };
  Kind kind = Kind::NoTies;
  double step = 0.0;  // RoundToGrid only

  static TiePolicy none() { return {}; }
  static TiePolicy round_to_grid(double step) { return {Kind::RoundToGrid, step}; }
  bool operator==(const TiePolicy&) const = default;
};

struct SimConfig {
  std::size_t n_a = 10;
  std::size_t n_b = 10;
  EffectFamily family = EffectFamily::LocationShiftNormal;
  double delta = 0.0;
  double panel_noise_sd = 0.0;
  TiePolicy tie_policy;
  double alpha = 0.05;
  stats::Alternative alternative = stats::Alternative::TwoSided;
  bool continuity = false;
  stats::MethodChoice method = stats::MethodChoice::Auto;
  std::size_t exact_cap = stats::kDefaultExactCap;
  std::size_t reps = 1000;
  std::uint64_t seed = 0;

  stats::WilcoxonConfig wilcoxon() const { return {alternative, continuity, exact_cap, method}; }
  bool operator==(const SimConfig&) const = default;
};

/// Throws invalid_argument describing the first invalid field.
void validate(const SimConfig& config);

struct TrialOutcome {
  double p_value = 1.0;
  double relative_effect_a = 0.5;
  /// True when every observation tied; reported as p = 1, effect 0.5.
  bool degenerate = false;
};

/// One simulated trial driven entirely by `rep_seed`.
TrialOutcome simulate_trial(const SimConfig& config, std::uint64_t rep_seed);

struct SimResult {
  SimConfig config;
  double rejection_rate = 0.0;
  double mc_stderr = 0.0;  // sqrt(r (1 - r) / reps)
  double mean_relative_effect = 0.5;
  double relative_effect_stderr = 0.0;
  std::size_t reps_used = 0;
  std::size_t degenerate_reps = 0;

  bool operator==(const SimResult&) const = default;
};

/// Runs config.reps trials; trial i uses derive_seed(config.seed, i). With
/// threads > 1 the replicates are split across workers and reduced in rep
/// order, so the result is identical for every thread count.
SimResult run_cell(const SimConfig& config, unsigned threads = 1);

/// One SimResult per grid cell, in grid order.
std::vector<SimResult> operating_characteristics(std::span<const SimConfig> grid, unsigned threads = 1);

/// Grid file: `key = value[, value...]` lines, '#' comments. Keys:
///   n_a, n_b, family (normal|logistic), delta, noise_sd, tie_step (0 = no
///   ties), alpha, alternative, continuity (true|false), method
///   (auto|exact|normal), exact_cap, reps, seed
/// Multi-valued keys expand to the cartesian product in the key order listed
/// above, the last key varying fastest. Cell i gets seed derive_seed(seed, i).
std::vector<SimConfig> parse_grid(std::istream& in);

/// Results CSV, one row per cell, with a header.
void write_results_csv(std::span<const SimResult> results, std::ostream& out);
const std::vector<std::string>& results_columns();

}  // namespace impact::sim
