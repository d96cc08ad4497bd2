#pragma once

// File-backed document store shared by the CLI and the HTTP service.
//
//   <root>/sessions/<session_id>.json   blinded session documents
//   <root>/sealed/<session_id>.json     card -> participant maps
//   <root>/analyses/<analysis_id>.json  analysis reports
//
// Arm maps are not kept here. They live in a separate directory that only
// analysis commands read.

#include "impact/analysis.hpp"
#include "impact/ranking_session.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace impact::app {

class FileStore {
 public:
  explicit FileStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  bool has_session(const std::string& id) const;
  panel::RankingSession load_session(const std::string& id) const;
  void save_session(const panel::RankingSession& session) const;
  std::vector<std::string> session_ids() const;

  panel::SealedMap load_sealed(const std::string& session_id) const;
  void save_sealed(const panel::SealedMap& sealed) const;

  bool has_analysis(const std::string& id) const;
  analysis::AnalysisReport load_analysis(const std::string& id) const;
  void save_analysis(const analysis::AnalysisReport& report) const;

 private:
  std::filesystem::path root_;
};

/// Ids become file names, so only [A-Za-z0-9_-] is accepted.
bool safe_id(const std::string& id);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Writes through a temporary file and a rename.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

/// Arm map document: {"participant_id": "A" | "B", ...}.
panel::ArmMap arm_map_from_json(const nlohmann::json& j);
panel::ArmMap load_arm_map(const std::filesystem::path& path);

/// Card groups recorded in an unblinded analysis report.
panel::CardGroups card_groups_from_report(const analysis::AnalysisReport& report);

/// Reads optional "alternative", "continuity", "method", "exact_cap" and
/// "alpha" keys over `base`.
analysis::AnalysisOptions options_from_json(const nlohmann::json& j, analysis::AnalysisOptions base = {});

nlohmann::json error_json(const std::string& code, const std::string& message,
                          const nlohmann::json& detail = nullptr);

}  // namespace impact::app
