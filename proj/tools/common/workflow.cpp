#include "workflow.hpp"

#include "impact/error.hpp"

#include <algorithm>
#include <set>

namespace impact::app {

NewSessionResult new_session(const records::Dataset& data, const NewSessionRequest& request,
                             const quality::Lexicons& lexicons) {
  auto selection = records::select_for_analysis(data, request.policy, request.cgi_declared);

  std::vector<std::pair<std::string, records::VisitFinding>> errors;
  NewSessionResult out;
  for (auto& f : selection.findings) {
    if (!request.participants.empty() &&
        std::find(request.participants.begin(), request.participants.end(), f.first) == request.participants.end())
      continue;
    (f.second.severity == records::Severity::Error ? errors : out.warnings).push_back(std::move(f));
  }
  if (!errors.empty())
    throw Error(errc::kInvariantViolation,
                std::to_string(errors.size()) + " visit-ordering error(s) in the selected anecdotes",
                findings_json(errors));

  if (request.participants.empty()) {
    out.opened = panel::open_session(selection.anecdotes, request.session, lexicons);
  } else {
    const std::set<std::string> known = [&] {
      std::set<std::string> s;
      for (const auto& a : selection.anecdotes) s.insert(a.participant_id);
      return s;
    }();
    for (const auto& p : request.participants)
      if (!known.count(p)) throw Error(errc::kInvalidArgument, "no selected anecdote for participant " + p);
    out.opened = panel::interim_subset(selection.anecdotes, request.participants, request.session, lexicons);
  }
  return out;
}

nlohmann::json findings_json(const std::vector<std::pair<std::string, records::VisitFinding>>& findings) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [participant, f] : findings)
    arr.push_back({{"participant_id", participant},
                   {"severity", f.severity == records::Severity::Error ? "error" : "warning"},
                   {"code", f.code},
                   {"message", f.message}});
  return arr;
}

analysis::AnalysisReport run_analysis(const FileStore& store, const std::string& session_id,
                                      const panel::ArmMap& arms, const analysis::AnalysisOptions& options,
                                      const std::string& analysis_id, const std::string& actor) {
  if (!safe_id(analysis_id)) throw Error(errc::kInvalidArgument, "analysis id must match [A-Za-z0-9_-]+");
  if (store.has_analysis(analysis_id)) throw Error(errc::kDuplicateId, "analysis already exists: " + analysis_id);
  auto session = store.load_session(session_id);
  const auto sealed = store.load_sealed(session_id);
  auto report = analysis::analyze(session, sealed, arms, options, analysis_id, actor);
  store.save_session(session);
  store.save_analysis(report);
  return report;
}

analysis::WhatIfResult run_what_if(const FileStore& store, const std::string& analysis_id,
                                   const panel::Tiers& hypothetical,
                                   const std::optional<analysis::AnalysisOptions>& options) {
  const auto report = store.load_analysis(analysis_id);
  const auto session = store.load_session(report.session_id);
  const auto config = options ? options->stats : report.options.stats;
  return analysis::what_if(session, hypothetical, card_groups_from_report(report), config);
}

analysis::SensitivityResult run_sensitivity(const FileStore& store, const std::string& analysis_id,
                                            const analysis::SensitivityOptions& options) {
  const auto report = store.load_analysis(analysis_id);
  const auto session = store.load_session(report.session_id);
  return analysis::sensitivity(session, card_groups_from_report(report), options, report.options.stats);
}

}  // namespace impact::app
