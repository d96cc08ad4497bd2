#pragma once

// Subcommand implementations. main.cpp owns argument parsing; each command
// writes its result to `out` and returns the process exit code. Failures
// are thrown as impact::Error and rendered by main.

#include "impact/analysis.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace impact::cli {

struct StatsArgs {
  std::string alternative = "two-sided";
  std::string method = "auto";
  bool continuity = false;
  std::size_t exact_cap = stats::kDefaultExactCap;
  double alpha = 0.05;

  analysis::AnalysisOptions options() const;
};

struct IngestArgs {
  std::filesystem::path input;
  std::filesystem::path export_path;  // empty: no export
  std::string visit_policy = "last-blinded-day";
  bool no_cgi = false;
};
int ingest(const IngestArgs& args, std::ostream& out);

struct QualityArgs {
  std::filesystem::path input;
  std::filesystem::path lexicon_dir;  // empty: built-in lexicons
};
/// Exit 0 when every anecdote passes, 1 otherwise.
int quality(const QualityArgs& args, std::ostream& out);

struct SessionNewArgs {
  std::filesystem::path records;
  std::filesystem::path store;
  bool allow_ties = false;
  std::string label;
  std::string visit_policy = "last-blinded-day";
  bool no_cgi = false;
  std::vector<std::string> participants;
  std::filesystem::path lexicon_dir;
  std::uint64_t seed = 0;
};
int session_new(const SessionNewArgs& args, std::ostream& out);

struct SessionExportArgs {
  std::string session_id;
  std::filesystem::path store;
  /// session | cards | sealed | ranks-csv
  std::string part = "session";
};
int session_export(const SessionExportArgs& args, std::ostream& out);

struct ImportRanksArgs {
  std::string session_id;
  std::filesystem::path csv;
  std::filesystem::path store;
  std::string actor = "chair";
  std::optional<std::uint64_t> expected_version;
};
int session_import_ranks(const ImportRanksArgs& args, std::ostream& out);

struct FinalizeArgs {
  std::string session_id;
  std::filesystem::path store;
  std::string chair;
};
int session_finalize(const FinalizeArgs& args, std::ostream& out);

struct AnalyzeArgs {
  std::string session_id;
  std::filesystem::path arms;
  std::filesystem::path store;
  std::string analysis_id;  // empty: random
  std::string format = "text";
  StatsArgs stats;
};
int analyze(const AnalyzeArgs& args, std::ostream& out);

struct WhatIfArgs {
  std::string analysis_id;
  std::filesystem::path ordering;  // card_id,tier_index CSV or tiers JSON
  std::filesystem::path store;
};
int what_if(const WhatIfArgs& args, std::ostream& out);

struct SensitivityArgs {
  std::string analysis_id;
  std::filesystem::path store;
  std::string strategy = "adjacent-swaps";
  std::size_t n_perturbations = 1000;
  std::size_t adjacent_swaps = 1;
  std::uint64_t seed = 0;
  bool include_values = false;
};
int sensitivity(const SensitivityArgs& args, std::ostream& out);

struct SimulateArgs {
  std::filesystem::path grid;
  std::filesystem::path out_csv;  // empty: stdout
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;  // overrides the grid's master seed
};
int simulate(const SimulateArgs& args, std::ostream& out);

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path store;
  std::filesystem::path arm_store;
  std::string credential_env = "IMPACT_ARM_CREDENTIAL";
  std::uint64_t seed = 0;
};
int serve(const ServeArgs& args, std::ostream& out);

}  // namespace impact::cli
