#include "impact/anecdote.hpp"

#include <algorithm>
#include <map>

namespace impact::records {

std::string_view to_string(FunctionalDomain d) {
  switch (d) {
    case FunctionalDomain::Cognitive: return "cognitive";
    case FunctionalDomain::Communication: return "communication";
    case FunctionalDomain::EmotionalBehavioral: return "emotional_behavioral";
    case FunctionalDomain::Social: return "social";
    case FunctionalDomain::Motor: return "motor";
    case FunctionalDomain::Sleep: return "sleep";
    case FunctionalDomain::OverallQOL: return "overall_qol";
  }
  return "overall_qol";
}

std::optional<FunctionalDomain> parse_domain(std::string_view text) {
  for (auto d : kAllDomains)
    if (to_string(d) == text) return d;
  return std::nullopt;
}

const VisitMeta* ParticipantRecord::visit(std::int64_t day) const {
  auto it = std::find_if(visits.begin(), visits.end(), [&](const VisitMeta& v) { return v.visit_day == day; });
  return it == visits.end() ? nullptr : &*it;
}

const VisitMeta* ParticipantRecord::last_blinded_visit() const {
  auto it = std::find_if(visits.begin(), visits.end(), [](const VisitMeta& v) { return v.is_last_blinded_day; });
  return it == visits.end() ? nullptr : &*it;
}

const ParticipantRecord* Dataset::participant(std::string_view id) const {
  auto it = std::lower_bound(participants.begin(), participants.end(), id,
                             [](const ParticipantRecord& p, std::string_view key) { return p.participant_id < key; });
  if (it == participants.end() || it->participant_id != id) return nullptr;
  return &*it;
}

std::vector<VisitFinding> validate_visit_ordering(const ParticipantRecord& record, std::int64_t analyzed_visit_day,
                                                  bool cgi_declared) {
  std::vector<VisitFinding> out;
  const VisitMeta* v = record.visit(analyzed_visit_day);
  if (!v) {
    out.push_back({Severity::Error, "unknown_visit",
                   "no visit on study day " + std::to_string(analyzed_visit_day) + " for this participant"});
    return out;
  }
  if (cgi_declared && !v->cgi_done_first)
    out.push_back({Severity::Error, "cgi_not_first",
                   "anecdote on day " + std::to_string(v->visit_day) +
                       " was collected before the CGI; it must be elicited after the CGI"});
  if (!v->other_instruments_done_first)
    out.push_back({Severity::Warning, "instruments_not_first",
                   "other outcome instruments were not completed before the anecdote on day " +
                       std::to_string(v->visit_day) + "; recall may be reduced"});
  if (!v->is_last_blinded_day)
    out.push_back({Severity::Warning, "not_last_blinded_day",
                   "analyzed anecdote is from day " + std::to_string(v->visit_day) +
                       ", not the last day of blinded treatment"});
  return out;
}

Selection select_for_analysis(const Dataset& data, VisitPolicy policy, bool cgi_declared) {
  Selection sel;
  // Selected anecdotes per participant, keyed by visit day.
  std::map<std::string, std::map<std::int64_t, const Anecdote*>> selected;
  for (const auto& a : data.anecdotes)
    if (a.is_selected_biggest) selected[a.participant_id][a.collected_on] = &a;

  for (const auto& p : data.participants) {
    auto it = selected.find(p.participant_id);
    if (it == selected.end() || it->second.empty()) continue;
    const auto& by_day = it->second;
    const Anecdote* chosen = by_day.rbegin()->second;
    if (policy == VisitPolicy::LastBlindedDay) {
      if (const auto* last = p.last_blinded_visit(); last && by_day.count(last->visit_day)) {
        chosen = by_day.at(last->visit_day);
      }
    }
    sel.anecdotes.push_back(*chosen);
    for (auto& f : validate_visit_ordering(p, chosen->collected_on, cgi_declared))
      sel.findings.emplace_back(p.participant_id, std::move(f));
  }
  return sel;
}

}  // namespace impact::records
