#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace impact::records {

enum class FunctionalDomain : std::uint8_t {
  Cognitive,
  Communication,
  EmotionalBehavioral,
  Social,
  Motor,
  Sleep,
  OverallQOL,
};

inline constexpr FunctionalDomain kAllDomains[] = {
    FunctionalDomain::Cognitive,   FunctionalDomain::Communication, FunctionalDomain::EmotionalBehavioral,
    FunctionalDomain::Social,      FunctionalDomain::Motor,         FunctionalDomain::Sleep,
    FunctionalDomain::OverallQOL,
};

/// Lower snake case wire names, e.g. "emotional_behavioral", "overall_qol".
std::string_view to_string(FunctionalDomain d);
std::optional<FunctionalDomain> parse_domain(std::string_view text);

struct VisitMeta {
  std::int64_t visit_day = 0;
  bool is_last_blinded_day = false;
  bool cgi_done_first = false;
  bool other_instruments_done_first = false;

  bool operator==(const VisitMeta&) const = default;
};

/// arm_code is an opaque blinded token; the token-to-treatment mapping is
/// never stored alongside participant records.
struct ParticipantRecord {
  std::string participant_id;
  std::string site_id;
  std::string arm_code;
  std::vector<VisitMeta> visits;  // ascending visit_day

  const VisitMeta* visit(std::int64_t day) const;
  const VisitMeta* last_blinded_visit() const;

  bool operator==(const ParticipantRecord&) const = default;
};

struct Anecdote {
  std::string anecdote_id;
  std::string participant_id;
  FunctionalDomain domain = FunctionalDomain::OverallQOL;
  std::string text;
  std::int64_t collected_on = 0;  // visit_day
  bool is_selected_biggest = false;

  bool operator==(const Anecdote&) const = default;
};

/// Participants and their anecdotes in canonical order: participants by id,
/// anecdotes by (participant_id, collected_on, anecdote_id).
struct Dataset {
  std::vector<ParticipantRecord> participants;
  std::vector<Anecdote> anecdotes;

  const ParticipantRecord* participant(std::string_view id) const;

  bool operator==(const Dataset&) const = default;
};

enum class Severity : std::uint8_t { Warning, Error };

struct VisitFinding {
  Severity severity = Severity::Warning;
  std::string code;
  std::string message;
};

/// Administration-ordering checks for the visit at which the analyzed
/// anecdote was collected:
///  - error `cgi_not_first` if a CGI is declared and was not done first;
///  - warning `instruments_not_first` if other instruments came after;
///  - warning `not_last_blinded_day` if the visit is not the last blinded day;
///  - error `unknown_visit` if the record has no such visit.
std::vector<VisitFinding> validate_visit_ordering(const ParticipantRecord& record, std::int64_t analyzed_visit_day,
                                                  bool cgi_declared = true);

enum class VisitPolicy : std::uint8_t {
  LastBlindedDay,  // default; falls back to the latest visit with a warning
  Latest,
};

struct Selection {
  std::vector<Anecdote> anecdotes;  // one selected anecdote per participant
  std::vector<std::pair<std::string, VisitFinding>> findings;  // (participant_id, finding)
};

/// Picks each participant's selected anecdote for analysis under `policy` and
/// runs validate_visit_ordering on the chosen visit. Participants with an
/// ordering error are still returned; callers decide whether to proceed.
Selection select_for_analysis(const Dataset& data, VisitPolicy policy = VisitPolicy::LastBlindedDay,
                              bool cgi_declared = true);

}  // namespace impact::records
