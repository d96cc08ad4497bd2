#pragma once

#include "impact/ranking_session.hpp"
#include "impact/records_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>

namespace fixtures {

inline std::filesystem::path dir() { return IMPACT_FIXTURE_DIR; }

inline nlohmann::json read_json(const std::string& name) {
  std::ifstream in(dir() / name);
  return nlohmann::json::parse(in);
}

inline impact::records::Dataset golden_cohort() { return impact::records::ingest_file(dir() / "golden_cohort.jsonl"); }

inline impact::panel::ArmMap golden_arms() {
  impact::panel::ArmMap arms;
  const auto doc = read_json("golden_arms.json");
  for (const auto& [p, g] : doc.items())
    arms[p] = g.get<std::string>() == "A" ? impact::stats::Group::A : impact::stats::Group::B;
  return arms;
}

/// participant -> the rank the worked example assigns them (11 = best).
inline std::map<std::string, int> golden_ranks() {
  return read_json("golden_intended_ranks.json").get<std::map<std::string, int>>();
}

/// Sequential ids so test sessions are reproducible.
inline impact::panel::IdSource counter_ids(std::string prefix) {
  auto n = std::make_shared<int>(0);
  return [prefix, n] { return prefix + std::to_string(++*n); };
}

inline impact::panel::OpenedSession open_golden(std::uint64_t seed = 7, bool allow_ties = false) {
  const auto data = golden_cohort();
  impact::panel::SessionOptions opts;
  opts.seed = seed;
  opts.allow_ties = allow_ties;
  return impact::panel::open_session(data.anecdotes, opts, impact::quality::Lexicons::builtin(),
                                     counter_ids("s-golden-"), counter_ids("c-"));
}

/// Singleton tiers placing each card at its participant's golden rank.
inline impact::panel::Tiers golden_tiers(const impact::panel::SealedMap& sealed) {
  const auto ranks = golden_ranks();
  std::vector<std::pair<int, std::string>> by_rank;
  for (const auto& [card, participant] : sealed.entries()) by_rank.emplace_back(ranks.at(participant), card);
  std::sort(by_rank.rbegin(), by_rank.rend());
  impact::panel::Tiers tiers;
  for (const auto& [rank, card] : by_rank) tiers.push_back({card});
  return tiers;
}

/// A golden session with the worked-example ordering finalized.
inline impact::panel::OpenedSession finalized_golden(std::uint64_t seed = 7) {
  auto opened = open_golden(seed);
  opened.session.submit_ordering(golden_tiers(opened.sealed), "chair-1");
  opened.session.finalize("chair-1");
  return opened;
}

}  // namespace fixtures
