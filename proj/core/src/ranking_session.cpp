#include "impact/ranking_session.hpp"

#include "impact/csv.hpp"
#include "impact/error.hpp"
#include "impact/random.hpp"

#include <openssl/rand.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace impact::panel {
namespace {

constexpr int kSessionFormatVersion = 1;

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

[[noreturn]] void bad_document(const std::string& what) {
  throw Error(errc::kMalformedDocument, "session document: " + what);
}

std::optional<SessionStatus> parse_status(std::string_view s) {
  if (s == "open") return SessionStatus::Open;
  if (s == "finalized") return SessionStatus::Finalized;
  if (s == "unblinded") return SessionStatus::Unblinded;
  return std::nullopt;
}

std::optional<AuditAction> parse_action(std::string_view s) {
  for (auto a : {AuditAction::SessionOpened, AuditAction::OrderingSubmitted, AuditAction::Finalized,
                 AuditAction::Unblinded})
    if (to_string(a) == s) return a;
  return std::nullopt;
}

// Checks that `tiers` partitions `cards` exactly.
void check_coverage(const Tiers& tiers, const std::vector<BlindedCard>& cards) {
  std::unordered_set<std::string> known;
  for (const auto& c : cards) known.insert(c.card_id);
  std::unordered_set<std::string> seen;
  for (const auto& tier : tiers) {
    if (tier.empty()) throw Error(errc::kInvalidOrdering, "ordering contains an empty tier");
    for (const auto& id : tier) {
      if (!known.count(id)) throw Error(errc::kInvalidOrdering, "ordering names unknown card '" + id + "'");
      if (!seen.insert(id).second) throw Error(errc::kInvalidOrdering, "card '" + id + "' appears twice");
    }
  }
  if (seen.size() != known.size())
    throw Error(errc::kInvalidOrdering, "ordering is missing " + std::to_string(known.size() - seen.size()) +
                                            " of " + std::to_string(known.size()) + " cards");
}

}  // namespace

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Open: return "open";
    case SessionStatus::Finalized: return "finalized";
    case SessionStatus::Unblinded: return "unblinded";
  }
  return "open";
}

std::string_view to_string(AuditAction a) {
  switch (a) {
    case AuditAction::SessionOpened: return "session_opened";
    case AuditAction::OrderingSubmitted: return "ordering_submitted";
    case AuditAction::Finalized: return "finalized";
    case AuditAction::Unblinded: return "unblinded";
  }
  return "session_opened";
}

IdSource random_ids(std::string prefix) {
  return [prefix = std::move(prefix)] {
    unsigned char bytes[16];
    if (RAND_bytes(bytes, sizeof bytes) != 1) throw Error(errc::kIo, "system random generator unavailable");
    static const char* hex = "0123456789abcdef";
    std::string out = prefix;
    for (unsigned char b : bytes) {
      out.push_back(hex[b >> 4]);
      out.push_back(hex[b & 0xF]);
    }
    return out;
  };
}

SealedMap::SealedMap(std::string session_id, std::map<std::string, std::string> card_to_participant)
    : session_id_(std::move(session_id)), card_to_participant_(std::move(card_to_participant)) {}

nlohmann::json SealedMap::to_json() const {
  return {{"format", "impact.sealed_map"},
          {"format_version", kSessionFormatVersion},
          {"session_id", session_id_},
          {"entries", card_to_participant_}};
}

SealedMap SealedMap::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "impact.sealed_map")
      throw Error(errc::kMalformedDocument, "not a sealed map document");
    return SealedMap(j.at("session_id").get<std::string>(),
                     j.at("entries").get<std::map<std::string, std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::kMalformedDocument, std::string("sealed map document: ") + e.what());
  }
}

void RankingSession::record(AuditAction action, const std::string& actor, std::string detail) {
  audit_.push_back({utc_now(), actor, action, std::move(detail)});
  ++version_;
}

std::vector<RankAssignment> RankingSession::rank_ordering(const Tiers& tiers, bool enforce_tie_policy) const {
  check_coverage(tiers, cards_);
  if (enforce_tie_policy && !allow_ties_) {
    for (const auto& tier : tiers)
      if (tier.size() > 1)
        throw Error(errc::kTiesNotAllowed, "this session uses forced ranking; tier of " +
                                               std::to_string(tier.size()) + " cards is not allowed");
  }
  std::vector<RankAssignment> out;
  for (auto& r : stats::midranks_from_ordering(tiers, true)) out.push_back({std::move(r.ref), r.rank});
  return out;
}

std::vector<RankAssignment> RankingSession::submit_ordering(const Tiers& tiers, const std::string& actor,
                                                            std::optional<std::uint64_t> expected_version) {
  if (status_ != SessionStatus::Open)
    throw Error(errc::kSessionState, "cannot submit an ordering to a " + std::string(to_string(status_)) + " session");
  if (expected_version && *expected_version != version_)
    throw Error(errc::kVersionConflict, "session changed since version " + std::to_string(*expected_version) +
                                            " (now " + std::to_string(version_) + "); reload and retry",
                {{"current_version", version_}});
  auto ranks = rank_ordering(tiers);
  draft_ = tiers;
  record(AuditAction::OrderingSubmitted, actor,
         std::to_string(tiers.size()) + " tiers over " + std::to_string(cards_.size()) + " cards");
  return ranks;
}

void RankingSession::finalize(const std::string& chair_id) {
  if (status_ != SessionStatus::Open)
    throw Error(errc::kSessionState, "session is already " + std::string(to_string(status_)));
  if (!draft_) throw Error(errc::kSessionState, "no draft ordering has been submitted");
  if (chair_id.empty()) throw Error(errc::kInvalidArgument, "chair id is required to finalize");
  ordering_ = draft_;
  chair_id_ = chair_id;
  status_ = SessionStatus::Finalized;
  record(AuditAction::Finalized, chair_id, "final ordering fixed by chair");
}

std::vector<RankAssignment> RankingSession::final_ranks() const {
  if (!ordering_) throw Error(errc::kSessionState, "session has not been finalized");
  return rank_ordering(*ordering_);
}

stats::RankVector RankingSession::unblind(const SealedMap& sealed, const ArmMap& arms, const std::string& analysis_id,
                                          const std::string& actor) {
  if (status_ == SessionStatus::Open) throw Error(errc::kSessionState, "session must be finalized before unblinding");
  if (analysis_id.empty()) throw Error(errc::kInvalidArgument, "unblinding requires an analysis id");
  auto rv = join_ranks(final_ranks(), card_groups(*this, sealed, arms));
  status_ = SessionStatus::Unblinded;
  record(AuditAction::Unblinded, actor, "analysis_id=" + analysis_id);
  return rv;
}

nlohmann::json RankingSession::cards_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : cards_)
    arr.push_back({{"card_id", c.card_id}, {"text", c.text}, {"domain", std::string(records::to_string(c.domain))}});
  return arr;
}

nlohmann::json RankingSession::to_json() const {
  nlohmann::json audit = nlohmann::json::array();
  for (const auto& e : audit_)
    audit.push_back({{"timestamp", e.timestamp},
                     {"actor", e.actor},
                     {"action", std::string(to_string(e.action))},
                     {"detail", e.detail}});
  return {{"format", "impact.session"},
          {"format_version", kSessionFormatVersion},
          {"session_id", session_id_},
          {"label", label_},
          {"status", std::string(to_string(status_))},
          {"allow_ties", allow_ties_},
          {"shuffle_seed", shuffle_seed_},
          {"chair_id", chair_id_},
          {"version", version_},
          {"cards", cards_json()},
          {"draft", draft_ ? tiers_to_json(*draft_) : nlohmann::json(nullptr)},
          {"ordering", ordering_ ? tiers_to_json(*ordering_) : nlohmann::json(nullptr)},
          {"audit", audit}};
}

RankingSession RankingSession::from_json(const nlohmann::json& j) {
  RankingSession s;
  try {
    if (j.at("format").get<std::string>() != "impact.session") bad_document("not a session document");
    if (j.at("format_version").get<int>() != kSessionFormatVersion) bad_document("unsupported format_version");
    s.session_id_ = j.at("session_id").get<std::string>();
    s.label_ = j.value("label", "");
    auto status = parse_status(j.at("status").get<std::string>());
    if (!status) bad_document("unknown status");
    s.status_ = *status;
    s.allow_ties_ = j.at("allow_ties").get<bool>();
    s.shuffle_seed_ = j.at("shuffle_seed").get<std::uint64_t>();
    s.chair_id_ = j.at("chair_id").get<std::string>();
    s.version_ = j.at("version").get<std::uint64_t>();
    std::set<std::string> ids;
    for (const auto& c : j.at("cards")) {
      auto domain = records::parse_domain(c.at("domain").get<std::string>());
      if (!domain) bad_document("unknown card domain");
      BlindedCard card{c.at("card_id").get<std::string>(), c.at("text").get<std::string>(), *domain};
      if (!ids.insert(card.card_id).second) bad_document("duplicate card id " + card.card_id);
      s.cards_.push_back(std::move(card));
    }
    if (!j.at("draft").is_null()) s.draft_ = tiers_from_json(j.at("draft"));
    if (!j.at("ordering").is_null()) s.ordering_ = tiers_from_json(j.at("ordering"));
    for (const auto& e : j.at("audit")) {
      auto action = parse_action(e.at("action").get<std::string>());
      if (!action) bad_document("unknown audit action");
      s.audit_.push_back({e.at("timestamp").get<std::string>(), e.at("actor").get<std::string>(), *action,
                          e.at("detail").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    bad_document(e.what());
  }
  if (s.status_ != SessionStatus::Open && !s.ordering_) bad_document("finalized session without an ordering");
  if (s.draft_) s.rank_ordering(*s.draft_);
  if (s.ordering_) s.rank_ordering(*s.ordering_);
  return s;
}

OpenedSession open_session(std::span<const records::Anecdote> anecdotes, const SessionOptions& options,
                           const quality::Lexicons& lexicons, const IdSource& session_ids, const IdSource& card_ids) {
  if (anecdotes.size() < 2)
    throw Error(errc::kInvalidArgument, "a ranking session needs at least two anecdotes, got " +
                                            std::to_string(anecdotes.size()));
  std::vector<const records::Anecdote*> items;
  std::unordered_set<std::string> participants;
  for (const auto& a : anecdotes) {
    if (!participants.insert(a.participant_id).second)
      throw Error(errc::kDuplicateId, "participant " + a.participant_id + " has more than one anecdote in the session");
    auto report = quality::quality_report(a, lexicons);
    if (!report.overall_pass)
      throw Error(errc::kQualityRejected, "anecdote " + a.anecdote_id + " failed the quality checklist",
                  quality::to_json(report));
    items.push_back(&a);
  }
  // Presentation order depends only on the seed, not on input order.
  std::sort(items.begin(), items.end(),
            [](const auto* x, const auto* y) { return x->participant_id < y->participant_id; });
  Rng rng(options.seed);
  rng.shuffle(std::span(items));

  OpenedSession out;
  auto& s = out.session;
  s.session_id_ = session_ids();
  s.label_ = options.label;
  s.allow_ties_ = options.allow_ties;
  s.shuffle_seed_ = options.seed;
  std::map<std::string, std::string> sealed;
  for (const auto* a : items) {
    std::string id;
    do {
      id = card_ids();
    } while (sealed.count(id));
    sealed.emplace(id, a->participant_id);
    s.cards_.push_back({id, a->text, a->domain});
  }
  out.sealed = SealedMap(s.session_id_, std::move(sealed));
  s.record(AuditAction::SessionOpened, options.actor,
           std::to_string(s.cards_.size()) + " cards, allow_ties=" + (options.allow_ties ? "true" : "false") +
               ", seed=" + std::to_string(options.seed));
  return out;
}

OpenedSession interim_subset(std::span<const records::Anecdote> anecdotes,
                             std::span<const std::string> participant_ids, const SessionOptions& options,
                             const quality::Lexicons& lexicons, const IdSource& session_ids,
                             const IdSource& card_ids) {
  const std::unordered_set<std::string> wanted(participant_ids.begin(), participant_ids.end());
  std::vector<records::Anecdote> subset;
  for (const auto& a : anecdotes)
    if (wanted.count(a.participant_id)) subset.push_back(a);
  return open_session(subset, options, lexicons, session_ids, card_ids);
}

CardGroups card_groups(const RankingSession& session, const SealedMap& sealed, const ArmMap& arms) {
  if (sealed.session_id() != session.session_id())
    throw Error(errc::kCardMismatch, "sealed map belongs to a different session");
  CardGroups out;
  std::size_t missing = 0;
  for (const auto& card : session.cards()) {
    auto it = sealed.entries().find(card.card_id);
    if (it == sealed.entries().end()) throw Error(errc::kCardMismatch, "sealed map does not cover every card");
    auto arm = arms.find(it->second);
    if (arm == arms.end()) {
      ++missing;
      continue;
    }
    out.emplace(card.card_id, arm->second);
  }
  if (missing)
    throw Error(errc::kMissingArmAssignment,
                "arm map is missing assignments for " + std::to_string(missing) + " of " +
                    std::to_string(session.cards().size()) + " sealed participants",
                {{"missing", missing}, {"sealed_participants", session.cards().size()}});
  return out;
}

stats::RankVector join_ranks(const std::vector<RankAssignment>& ranks, const CardGroups& groups) {
  std::vector<stats::RankEntry> entries;
  entries.reserve(ranks.size());
  for (const auto& r : ranks) {
    auto it = groups.find(r.card_id);
    if (it == groups.end()) throw Error(errc::kCardMismatch, "no group for card '" + r.card_id + "'");
    entries.push_back({r.card_id, it->second, r.rank});
  }
  return stats::RankVector(std::move(entries));
}

Tiers tiers_from_csv(std::istream& in) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header || header->fields != std::vector<std::string>{"card_id", "tier_index"})
    throw Error(errc::kMalformedRow, "line 1: rank CSV header must be card_id,tier_index");
  std::map<long long, std::vector<std::string>> by_tier;
  while (auto rec = reader.next()) {
    if (rec->fields.size() == 1 && rec->fields[0].empty()) continue;
    if (rec->fields.size() != 2)
      throw Error(errc::kMalformedRow, "line " + std::to_string(rec->line) + ": expected card_id,tier_index");
    const auto& idx = rec->fields[1];
    long long tier = 0;
    auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), tier);
    if (ec != std::errc{} || ptr != idx.data() + idx.size() || tier < 1)
      throw Error(errc::kMalformedRow,
                  "line " + std::to_string(rec->line) + ": tier_index must be a positive integer, got '" + idx + "'");
    by_tier[tier].push_back(rec->fields[0]);
  }
  Tiers tiers;
  for (auto& [_, cards] : by_tier) tiers.push_back(std::move(cards));
  return tiers;
}

void tiers_to_csv(const Tiers& tiers, std::ostream& out) {
  csv::write_row(out, {"card_id", "tier_index"});
  for (std::size_t i = 0; i < tiers.size(); ++i)
    for (const auto& id : tiers[i]) csv::write_row(out, {id, std::to_string(i + 1)});
}

nlohmann::json tiers_to_json(const Tiers& tiers) { return tiers; }

Tiers tiers_from_json(const nlohmann::json& j) {
  try {
    return j.get<Tiers>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::kInvalidOrdering, std::string("ordering must be a list of lists of card ids: ") + e.what());
  }
}

}  // namespace impact::panel
