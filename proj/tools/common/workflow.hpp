#pragma once

// Operations shared by the CLI and the HTTP service, so both produce the
// same documents for the same inputs.

#include "store.hpp"

#include "impact/anecdote.hpp"
#include "impact/quality.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace impact::app {

struct NewSessionRequest {
  panel::SessionOptions session;
  records::VisitPolicy policy = records::VisitPolicy::LastBlindedDay;
  bool cgi_declared = true;
  /// Restrict to these participants (an interim session) when non-empty.
  std::vector<std::string> participants;
};

struct NewSessionResult {
  panel::OpenedSession opened;
  std::vector<std::pair<std::string, records::VisitFinding>> warnings;
};

/// Selects one anecdote per participant, refuses visit-ordering errors
/// (invariant_violation, findings in the detail) and opens a session.
NewSessionResult new_session(const records::Dataset& data, const NewSessionRequest& request,
                             const quality::Lexicons& lexicons = quality::Lexicons::builtin());

nlohmann::json findings_json(const std::vector<std::pair<std::string, records::VisitFinding>>& findings);

/// Unblinds a stored session, persists the updated session and the report.
analysis::AnalysisReport run_analysis(const FileStore& store, const std::string& session_id,
                                      const panel::ArmMap& arms, const analysis::AnalysisOptions& options,
                                      const std::string& analysis_id, const std::string& actor = "analyst");

/// What-if against a stored analysis: card groups and, unless overridden,
/// the test configuration come from the report.
analysis::WhatIfResult run_what_if(const FileStore& store, const std::string& analysis_id,
                                   const panel::Tiers& hypothetical,
                                   const std::optional<analysis::AnalysisOptions>& options = std::nullopt);

analysis::SensitivityResult run_sensitivity(const FileStore& store, const std::string& analysis_id,
                                            const analysis::SensitivityOptions& options);

}  // namespace impact::app
