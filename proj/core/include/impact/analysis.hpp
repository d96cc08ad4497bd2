#pragma once

#include "impact/ranking_session.hpp"
#include "impact/rank_stats.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace impact::analysis {

inline constexpr const char* kExploratoryLabel = "exploratory, unblinded: not a statistically actionable result";

struct AnalysisOptions {
  stats::WilcoxonConfig stats;
  /// Level used for the significance statement in the report.
  double alpha = 0.05;

  bool operator==(const AnalysisOptions&) const = default;
};

struct RankedItem {
  HalfInteger rank;
  std::string card_id;
  records::FunctionalDomain domain = records::FunctionalDomain::OverallQOL;
  std::string text;
  std::optional<stats::Group> group;  // present only after unblinding

  bool operator==(const RankedItem&) const = default;
};

struct AnalysisReport {
  std::string analysis_id;
  std::string session_id;
  /// Index of the audit event recording this analysis's unblinding.
  std::size_t audit_event_index = 0;
  std::string chair_id;
  AnalysisOptions options;
  stats::WilcoxonResult result;
  std::vector<RankedItem> ranked_list;  // descending by rank
  std::string direction;
  std::string significance;

  bool operator==(const AnalysisReport&) const = default;
};

/// Unblinds a finalized session, runs the rank-sum test and assembles the
/// ranked anecdote report.
AnalysisReport analyze(panel::RankingSession& session, const panel::SealedMap& sealed, const panel::ArmMap& arms,
                       const AnalysisOptions& options, const std::string& analysis_id,
                       const std::string& actor = "analyst");

/// Ranked list for a session (groups omitted when `groups` is null).
std::vector<RankedItem> ranked_list(const panel::RankingSession& session, const panel::Tiers& tiers,
                                    const panel::CardGroups* groups);

std::string direction_statement(const stats::WilcoxonResult& result);
std::string significance_statement(const stats::WilcoxonResult& result, double alpha);

nlohmann::json to_json(const stats::WilcoxonResult& result);
stats::WilcoxonResult wilcoxon_result_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AnalysisReport& report);
AnalysisReport analysis_report_from_json(const nlohmann::json& j);
/// Human-readable report: statistics followed by the ranked anecdote list.
std::string render_text(const AnalysisReport& report);

struct WhatIfResult {
  stats::WilcoxonResult result;
  std::string label = kExploratoryLabel;
};

/// Recomputes the test for a hypothetical ordering of a finalized session's
/// cards. Never mutates the session.
WhatIfResult what_if(const panel::RankingSession& session, const panel::Tiers& hypothetical,
                     const panel::CardGroups& groups, const stats::WilcoxonConfig& config);
WhatIfResult what_if(const panel::RankingSession& session, const panel::SealedMap& sealed,
                     const panel::Tiers& hypothetical, const panel::ArmMap& arms,
                     const stats::WilcoxonConfig& config);
nlohmann::json to_json(const WhatIfResult& result);

enum class Strategy : std::uint8_t { AdjacentSwaps, IntraGroupExchange, FullReshuffle };
std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view text);

struct SensitivityOptions {
  Strategy strategy = Strategy::AdjacentSwaps;
  std::size_t n_perturbations = 1000;
  std::uint64_t seed = 0;
  /// Number of random adjacent tier transpositions per perturbation.
  std::size_t adjacent_swaps = 1;
};

struct SensitivitySummary {
  double min = 0;
  double q25 = 0;
  double median = 0;
  double q75 = 0;
  double max = 0;
};

struct SensitivityResult {
  double base_p = 1.0;
  std::vector<double> perturbed_p;
  Strategy strategy = Strategy::AdjacentSwaps;
  std::size_t n_perturbations = 0;
  std::uint64_t seed = 0;
  std::size_t adjacent_swaps = 0;
  SensitivitySummary summary;
  std::string label = kExploratoryLabel;
};

/// Re-analyzes perturbed versions of the finalized ordering:
///  - AdjacentSwaps: k random transpositions of neighbouring tiers;
///  - IntraGroupExchange: rank values permuted within each arm;
///  - FullReshuffle: rank values permuted across all cards (null reference).
SensitivityResult sensitivity(const panel::RankingSession& session, const panel::CardGroups& groups,
                              const SensitivityOptions& options, const stats::WilcoxonConfig& config);
SensitivityResult sensitivity(const panel::RankingSession& session, const panel::SealedMap& sealed,
                              const panel::ArmMap& arms, const SensitivityOptions& options,
                              const stats::WilcoxonConfig& config);
nlohmann::json to_json(const SensitivityResult& result);

/// Type-7 (linear interpolation) sample quantile of a sorted range.
double quantile_sorted(const std::vector<double>& sorted, double q);

}  // namespace impact::analysis
