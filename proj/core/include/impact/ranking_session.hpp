#pragma once

// Blinded expert-panel ranking.
//
// A session holds de-identified cards in a seeded presentation order. The
// card -> participant mapping lives in a separate SealedMap that ordering
// operations never see; it is joined back only when the chair's finalized
// ordering is unblinded for analysis. Status moves Open -> Finalized ->
// Unblinded and every transition appends to the audit trail.

#include "impact/anecdote.hpp"
#include "impact/quality.hpp"
#include "impact/rank_stats.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace impact::panel {

enum class SessionStatus : std::uint8_t { Open, Finalized, Unblinded };
enum class AuditAction : std::uint8_t { SessionOpened, OrderingSubmitted, Finalized, Unblinded };

std::string_view to_string(SessionStatus s);
std::string_view to_string(AuditAction a);

struct AuditEvent {
  std::string timestamp;  // UTC, ISO-8601
  std::string actor;
  AuditAction action = AuditAction::SessionOpened;
  std::string detail;

  bool operator==(const AuditEvent&) const = default;
};

struct BlindedCard {
  std::string card_id;
  std::string text;
  records::FunctionalDomain domain = records::FunctionalDomain::OverallQOL;

  bool operator==(const BlindedCard&) const = default;
};

/// Tie groups of card ids, most meaningful tier first.
using Tiers = std::vector<std::vector<std::string>>;

struct RankAssignment {
  std::string card_id;
  HalfInteger rank;  // n = most meaningful, 1 = least

  bool operator==(const RankAssignment&) const = default;
};

/// participant_id -> treatment group. Held only by the analyst.
using ArmMap = std::map<std::string, stats::Group>;
/// card_id -> treatment group, derived after unblinding.
using CardGroups = std::map<std::string, stats::Group>;

class SealedMap {
 public:
  SealedMap() = default;
  SealedMap(std::string session_id, std::map<std::string, std::string> card_to_participant);

  const std::string& session_id() const { return session_id_; }
  const std::map<std::string, std::string>& entries() const { return card_to_participant_; }
  std::size_t size() const { return card_to_participant_.size(); }

  nlohmann::json to_json() const;
  static SealedMap from_json(const nlohmann::json& j);

  bool operator==(const SealedMap&) const = default;

 private:
  std::string session_id_;
  std::map<std::string, std::string> card_to_participant_;
};

/// Produces opaque random identifiers. Tests may inject a deterministic one.
using IdSource = std::function<std::string()>;
/// 128-bit random hex tokens from the system CSPRNG, with a prefix.
IdSource random_ids(std::string prefix);

struct SessionOptions {
  bool allow_ties = false;
  std::uint64_t seed = 0;
  std::string actor = "coordinator";
  /// Free-form label, e.g. "interim-1".
  std::string label;
};

struct OpenedSession;

class RankingSession {
 public:
  const std::string& session_id() const { return session_id_; }
  const std::string& label() const { return label_; }
  const std::vector<BlindedCard>& cards() const { return cards_; }
  bool allow_ties() const { return allow_ties_; }
  SessionStatus status() const { return status_; }
  std::uint64_t shuffle_seed() const { return shuffle_seed_; }
  const std::optional<Tiers>& draft() const { return draft_; }
  const std::optional<Tiers>& ordering() const { return ordering_; }
  const std::string& chair_id() const { return chair_id_; }
  const std::vector<AuditEvent>& audit() const { return audit_; }
  /// Incremented on every mutation; used for optimistic concurrency.
  std::uint64_t version() const { return version_; }

  /// Validates that `tiers` covers this session's cards exactly (and, when
  /// `enforce_tie_policy`, that it has no ties in a forced-ranking session)
  /// and returns the midranks it implies, without touching the session.
  std::vector<RankAssignment> rank_ordering(const Tiers& tiers, bool enforce_tie_policy = true) const;

  /// Stores a draft ordering, replacing any previous draft. When
  /// `expected_version` is given and differs from version(), throws
  /// version_conflict and leaves the session unchanged.
  std::vector<RankAssignment> submit_ordering(const Tiers& tiers, const std::string& actor,
                                              std::optional<std::uint64_t> expected_version = std::nullopt);

  void finalize(const std::string& chair_id);

  /// Joins the finalized ranks to treatment groups and moves to Unblinded.
  /// Already-unblinded sessions may be re-joined; each call is logged with
  /// the requesting analysis id.
  stats::RankVector unblind(const SealedMap& sealed, const ArmMap& arms, const std::string& analysis_id,
                            const std::string& actor = "analyst");

  /// Final ranks (Finalized or Unblinded sessions only).
  std::vector<RankAssignment> final_ranks() const;

  /// Blinded document: cards, ordering, status, audit. Never contains
  /// participant ids, arm codes, site ids or visit data.
  nlohmann::json to_json() const;
  static RankingSession from_json(const nlohmann::json& j);
  /// Just the presentation cards, for the panel.
  nlohmann::json cards_json() const;

  bool operator==(const RankingSession&) const = default;

 private:
  friend OpenedSession open_session(std::span<const records::Anecdote>, const SessionOptions&,
                                    const quality::Lexicons&, const IdSource&, const IdSource&);

  void record(AuditAction action, const std::string& actor, std::string detail);

  std::string session_id_;
  std::string label_;
  std::vector<BlindedCard> cards_;
  bool allow_ties_ = false;
  SessionStatus status_ = SessionStatus::Open;
  std::uint64_t shuffle_seed_ = 0;
  std::optional<Tiers> draft_;
  std::optional<Tiers> ordering_;
  std::string chair_id_;
  std::vector<AuditEvent> audit_;
  std::uint64_t version_ = 0;
};

struct OpenedSession {
  RankingSession session;
  SealedMap sealed;
};

/// Builds a session from one selected anecdote per participant. Refuses
/// fewer than two anecdotes, a repeated participant, and any anecdote whose
/// quality report fails (the report is attached to the error detail).
OpenedSession open_session(std::span<const records::Anecdote> anecdotes, const SessionOptions& options,
                           const quality::Lexicons& lexicons = quality::Lexicons::builtin(),
                           const IdSource& session_ids = random_ids("s-"),
                           const IdSource& card_ids = random_ids("c-"));

/// An independent session over the anecdotes of `participant_ids` only.
/// Interim sessions are never merged; the full cohort is re-ranked later.
OpenedSession interim_subset(std::span<const records::Anecdote> anecdotes,
                             std::span<const std::string> participant_ids, const SessionOptions& options,
                             const quality::Lexicons& lexicons = quality::Lexicons::builtin(),
                             const IdSource& session_ids = random_ids("s-"),
                             const IdSource& card_ids = random_ids("c-"));

/// Maps every card of `session` to its group. Throws missing_arm_assignment
/// with a count (never an id) when the arm map does not cover the session.
CardGroups card_groups(const RankingSession& session, const SealedMap& sealed, const ArmMap& arms);

/// RankVector for an arbitrary ordering of the session's cards.
stats::RankVector join_ranks(const std::vector<RankAssignment>& ranks, const CardGroups& groups);

/// Parses the air-gapped rank import CSV: header "card_id,tier_index", one
/// row per card; tier_index 1 is the most meaningful tier and equal indices
/// are ties. Gaps in the tier indices are allowed.
Tiers tiers_from_csv(std::istream& in);
void tiers_to_csv(const Tiers& tiers, std::ostream& out);

nlohmann::json tiers_to_json(const Tiers& tiers);
Tiers tiers_from_json(const nlohmann::json& j);

}  // namespace impact::panel
