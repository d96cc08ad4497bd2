#include "impact/error.hpp"
#include "impact/ranking_session.hpp"

#include "blinding.hpp"
#include "fixtures.hpp"

#include <catch_amalgamated.hpp>

#include <regex>
#include <sstream>

using namespace impact;
using namespace impact::panel;

namespace {

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "no error";
}

std::vector<records::Anecdote> first_n(std::size_t n) {
  auto a = fixtures::golden_cohort().anecdotes;
  a.resize(n);
  return a;
}

OpenedSession small_session(std::size_t n, bool allow_ties) {
  SessionOptions opts;
  opts.allow_ties = allow_ties;
  return open_session(first_n(n), opts, quality::Lexicons::builtin(), fixtures::counter_ids("s-"),
                      fixtures::counter_ids("c"));
}

std::multiset<double> group_ranks(const stats::RankVector& rv, stats::Group g) {
  std::multiset<double> out;
  for (const auto& e : rv.entries())
    if (e.group == g) out.insert(e.rank.to_double());
  return out;
}

}  // namespace

TEST_CASE("opening the golden cohort") {
  const auto opened = fixtures::open_golden(7);
  const auto& s = opened.session;
  CHECK(s.cards().size() == 11);
  CHECK(s.status() == SessionStatus::Open);
  CHECK(s.shuffle_seed() == 7);
  REQUIRE(s.audit().size() == 1);
  CHECK(s.audit()[0].action == AuditAction::SessionOpened);
  CHECK(opened.sealed.size() == 11);
  CHECK(opened.sealed.session_id() == s.session_id());
}

TEST_CASE("open_session refusals") {
  CHECK(code_of([] { small_session(1, false); }) == errc::kInvalidArgument);

  auto dup = first_n(2);
  dup[1].participant_id = dup[0].participant_id;
  CHECK(code_of([&] { open_session(dup, {}); }) == errc::kDuplicateId);

  auto bad = first_n(3);
  bad[2].text = "I can think more clearly!";
  try {
    open_session(bad, {});
    FAIL("expected quality_rejected");
  } catch (const Error& e) {
    CHECK(e.code() == errc::kQualityRejected);
    CHECK(e.detail().at("overall_pass") == false);
  }
}

TEST_CASE("card ids are random tokens") {
  const auto data = fixtures::golden_cohort();
  const auto opened = open_session(data.anecdotes, {});
  const std::regex token("c-[0-9a-f]{32}");
  std::set<std::string> ids;
  for (const auto& c : opened.session.cards()) {
    CHECK(std::regex_match(c.card_id, token));
    ids.insert(c.card_id);
  }
  CHECK(ids.size() == 11);
  CHECK(std::regex_match(opened.session.session_id(), std::regex("s-[0-9a-f]{32}")));
}

TEST_CASE("presentation order is a deterministic function of the seed") {
  auto texts = [](std::uint64_t seed) {
    std::vector<std::string> out;
    const auto opened = fixtures::open_golden(seed);
    for (const auto& c : opened.session.cards()) out.push_back(c.text);
    return out;
  };
  CHECK(texts(7) == texts(7));
  CHECK(texts(7) != texts(8));
  // Input order does not matter, only the seed.
  auto shuffled = fixtures::golden_cohort().anecdotes;
  std::reverse(shuffled.begin(), shuffled.end());
  SessionOptions opts;
  opts.seed = 7;
  std::vector<std::string> reversed;
  const auto from_reversed = open_session(shuffled, opts);
  for (const auto& c : from_reversed.session.cards()) reversed.push_back(c.text);
  CHECK(reversed == texts(7));
}

TEST_CASE("submitting orderings") {
  auto s = small_session(3, false).session;
  const auto& c = s.cards();
  auto ranks = s.submit_ordering({{c[0].card_id}, {c[1].card_id}, {c[2].card_id}}, "chair");
  REQUIRE(ranks.size() == 3);
  CHECK(ranks[0].rank == HalfInteger(3));
  CHECK(ranks[1].rank == HalfInteger(2));
  CHECK(ranks[2].rank == HalfInteger(1));

  CHECK(code_of([&] { s.submit_ordering({{c[0].card_id, c[1].card_id}, {c[2].card_id}}, "chair"); }) ==
        errc::kTiesNotAllowed);
  CHECK(code_of([&] { s.submit_ordering({{c[0].card_id}, {c[1].card_id}}, "chair"); }) == errc::kInvalidOrdering);
  CHECK(code_of([&] { s.submit_ordering({{c[0].card_id}, {c[1].card_id}, {c[1].card_id}}, "chair"); }) ==
        errc::kInvalidOrdering);
  CHECK(code_of([&] { s.submit_ordering({{c[0].card_id}, {c[1].card_id}, {"c-unknown"}}, "chair"); }) ==
        errc::kInvalidOrdering);

  auto t = small_session(3, true).session;
  const auto& d = t.cards();
  ranks = t.submit_ordering({{d[0].card_id, d[1].card_id}, {d[2].card_id}}, "chair");
  CHECK(ranks[0].rank.to_string() == "2.5");
  CHECK(ranks[1].rank.to_string() == "2.5");
  CHECK(ranks[2].rank == HalfInteger(1));
}

TEST_CASE("resubmission replaces the draft and stale versions conflict") {
  auto s = small_session(3, false).session;
  const auto& c = s.cards();
  const Tiers first = {{c[0].card_id}, {c[1].card_id}, {c[2].card_id}};
  const Tiers second = {{c[2].card_id}, {c[1].card_id}, {c[0].card_id}};
  const auto v0 = s.version();
  s.submit_ordering(first, "chair", v0);
  CHECK(s.version() == v0 + 1);
  s.submit_ordering(second, "chair", v0 + 1);
  CHECK(s.draft() == second);

  const auto before = s;
  CHECK(code_of([&] { s.submit_ordering(first, "chair", v0); }) == errc::kVersionConflict);
  CHECK(s == before);
}

TEST_CASE("finalize lifecycle") {
  auto s = small_session(3, false).session;
  CHECK(code_of([&] { s.finalize("chair-1"); }) == errc::kSessionState);
  const auto& c = s.cards();
  s.submit_ordering({{c[0].card_id}, {c[1].card_id}, {c[2].card_id}}, "chair");
  s.finalize("chair-1");
  CHECK(s.status() == SessionStatus::Finalized);
  CHECK(s.chair_id() == "chair-1");
  CHECK(s.ordering() == s.draft());
  CHECK(code_of([&] { s.finalize("chair-1"); }) == errc::kSessionState);
  CHECK(code_of([&] { s.submit_ordering({{c[0].card_id}, {c[1].card_id}, {c[2].card_id}}, "chair"); }) ==
        errc::kSessionState);
}

TEST_CASE("finalized rankings without ties are a permutation of 1..n") {
  auto opened = fixtures::finalized_golden();
  std::vector<std::int64_t> ranks;
  for (const auto& r : opened.session.final_ranks()) ranks.push_back(r.rank.halves());
  std::sort(ranks.begin(), ranks.end());
  for (std::size_t i = 0; i < ranks.size(); ++i) CHECK(ranks[i] == 2 * static_cast<std::int64_t>(i + 1));
}

TEST_CASE("unblinding the golden session") {
  auto opened = fixtures::finalized_golden();
  const auto audit_before = opened.session.audit().size();
  const auto rv = opened.session.unblind(opened.sealed, fixtures::golden_arms(), "analysis-42");
  CHECK(group_ranks(rv, stats::Group::A) == std::multiset<double>{11, 6, 8, 5, 9, 10});
  CHECK(group_ranks(rv, stats::Group::B) == std::multiset<double>{2, 4, 3, 1, 7});
  CHECK(opened.session.status() == SessionStatus::Unblinded);
  REQUIRE(opened.session.audit().size() == audit_before + 1);
  CHECK(opened.session.audit().back().action == AuditAction::Unblinded);
  CHECK(opened.session.audit().back().detail.find("analysis-42") != std::string::npos);
}

TEST_CASE("unblinding preconditions") {
  auto open = fixtures::open_golden();
  CHECK(code_of([&] { open.session.unblind(open.sealed, fixtures::golden_arms(), "x"); }) == errc::kSessionState);

  auto opened = fixtures::finalized_golden();
  auto arms = fixtures::golden_arms();
  arms.erase("P04");
  try {
    opened.session.unblind(opened.sealed, arms, "x");
    FAIL("expected missing_arm_assignment");
  } catch (const Error& e) {
    CHECK(e.code() == errc::kMissingArmAssignment);
    const std::string msg = e.what();
    CHECK(msg.find("11") != std::string::npos);
    CHECK(msg.find("P04") == std::string::npos);
    CHECK(e.detail().dump().find("P04") == std::string::npos);
  }
  CHECK(opened.session.status() == SessionStatus::Finalized);

  auto other = open_session(fixtures::golden_cohort().anecdotes, {}, quality::Lexicons::builtin(),
                            fixtures::counter_ids("s-other-"), fixtures::counter_ids("c-"));
  CHECK(code_of([&] { opened.session.unblind(other.sealed, fixtures::golden_arms(), "x"); }) == errc::kCardMismatch);
}

TEST_CASE("per-group rank multisets do not depend on the shuffle seed") {
  std::optional<std::multiset<double>> reference;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    auto opened = fixtures::finalized_golden(seed);
    const auto rv = opened.session.unblind(opened.sealed, fixtures::golden_arms(), "a");
    const auto a = group_ranks(rv, stats::Group::A);
    if (!reference) reference = a;
    CHECK(a == *reference);
  }
}

TEST_CASE("the audit trail only grows") {
  auto opened = fixtures::open_golden();
  auto& s = opened.session;
  std::vector<AuditEvent> seen = s.audit();
  auto grew = [&] {
    const auto& now = s.audit();
    REQUIRE(now.size() > seen.size());
    for (std::size_t i = 0; i < seen.size(); ++i) CHECK(now[i] == seen[i]);
    seen = now;
  };
  s.submit_ordering(fixtures::golden_tiers(opened.sealed), "chair");
  grew();
  s.submit_ordering(fixtures::golden_tiers(opened.sealed), "chair");
  grew();
  s.finalize("chair");
  grew();
  s.unblind(opened.sealed, fixtures::golden_arms(), "a1");
  grew();
  s.unblind(opened.sealed, fixtures::golden_arms(), "a2");
  grew();
  for (const auto& e : s.audit()) CHECK(std::regex_match(e.timestamp, std::regex(R"(\d{4}-\d\d-\d\dT\d\d:\d\d:\d\dZ)")));
}

TEST_CASE("serialized sessions are blinded") {
  const auto data = fixtures::golden_cohort();
  const auto identities = blinding::identity_values(data);
  auto opened = fixtures::open_golden();
  CHECK(blinding::leaks(opened.session.to_json(), identities).empty());
  CHECK(blinding::leaks(opened.session.cards_json(), identities).empty());
  opened.session.submit_ordering(fixtures::golden_tiers(opened.sealed), "chair");
  opened.session.finalize("chair-1");
  CHECK(blinding::leaks(opened.session.to_json(), identities).empty());
  // The checker itself does see the sealed map's identities.
  CHECK_FALSE(blinding::leaks(opened.sealed.to_json(), identities).empty());
}

TEST_CASE("session and sealed map documents round trip") {
  auto opened = fixtures::finalized_golden();
  CHECK(RankingSession::from_json(opened.session.to_json()) == opened.session);
  CHECK(SealedMap::from_json(opened.sealed.to_json()) == opened.sealed);

  auto doc = opened.session.to_json();
  doc["format"] = "something.else";
  CHECK(code_of([&] { RankingSession::from_json(doc); }) == errc::kMalformedDocument);
  doc = opened.session.to_json();
  doc["ordering"] = nlohmann::json::array({nlohmann::json::array({"c-1"})});
  CHECK(code_of([&] { RankingSession::from_json(doc); }) == errc::kInvalidOrdering);
}

TEST_CASE("rank import csv") {
  std::istringstream in("card_id,tier_index\nc3,2\nc1,1\nc2,2\nc4,5\n");
  const auto tiers = tiers_from_csv(in);
  CHECK(tiers == Tiers{{"c1"}, {"c3", "c2"}, {"c4"}});

  std::ostringstream out;
  tiers_to_csv(tiers, out);
  std::istringstream back(out.str());
  CHECK(tiers_from_csv(back) == tiers);

  std::istringstream zero("card_id,tier_index\nc1,0\n");
  CHECK(code_of([&] { tiers_from_csv(zero); }) != "no error");
  std::istringstream header("card,tier\nc1,1\n");
  CHECK(code_of([&] { tiers_from_csv(header); }) != "no error");
  std::istringstream junk("card_id,tier_index\nc1,first\n");
  CHECK(code_of([&] { tiers_from_csv(junk); }) != "no error");
  CHECK(tiers_from_json(tiers_to_json(tiers)) == tiers);
}

TEST_CASE("interim sessions are independent subsets") {
  const auto data = fixtures::golden_cohort();
  std::vector<std::string> first6;
  for (std::size_t i = 0; i < 6; ++i) first6.push_back(data.participants[i].participant_id);
  const auto interim = interim_subset(data.anecdotes, first6, {});
  CHECK(interim.session.cards().size() == 6);
  CHECK(interim.sealed.size() == 6);
  for (const auto& [card, participant] : interim.sealed.entries())
    CHECK(std::find(first6.begin(), first6.end(), participant) != first6.end());

  const auto full = open_session(data.anecdotes, {});
  CHECK(full.session.cards().size() == 11);
  CHECK(full.session.session_id() != interim.session.session_id());
  for (const auto& c : full.session.cards())
    for (const auto& i : interim.session.cards()) CHECK(c.card_id != i.card_id);

  const std::vector<std::string> one = {first6[0]};
  CHECK(code_of([&] { interim_subset(data.anecdotes, one, {}); }) == errc::kInvalidArgument);
}

TEST_CASE("card groups and joined ranks") {
  auto opened = fixtures::finalized_golden();
  const auto groups = card_groups(opened.session, opened.sealed, fixtures::golden_arms());
  CHECK(groups.size() == 11);
  const auto rv = join_ranks(opened.session.final_ranks(), groups);
  CHECK(rv.n_a() == 6);
  CHECK(rv.n_b() == 5);
}
