#include "impact/analysis.hpp"

#include "impact/error.hpp"
#include "impact/random.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace impact::analysis {
namespace {

constexpr int kReportFormatVersion = 1;
constexpr double kLargestConventionalAlpha = 0.10;

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string format_p(double p) {
  if (p < 0.0001) return "< 0.0001";
  return fixed(p, 4);
}

nlohmann::json half_json(HalfInteger h) { return h.to_double(); }

HalfInteger half_from_json(const nlohmann::json& j) {
  auto h = HalfInteger::from_double(j.get<double>());
  if (!h) throw Error(errc::kMalformedDocument, "expected a multiple of 1/2");
  return *h;
}

panel::Tiers final_tiers(const panel::RankingSession& session) {
  if (!session.ordering()) throw Error(errc::kSessionState, "session has not been finalized");
  return *session.ordering();
}

stats::RankVector vector_from(const std::vector<panel::RankAssignment>& ranks, const panel::CardGroups& groups) {
  return panel::join_ranks(ranks, groups);
}

}  // namespace

std::vector<RankedItem> ranked_list(const panel::RankingSession& session, const panel::Tiers& tiers,
                                    const panel::CardGroups* groups) {
  std::map<std::string, const panel::BlindedCard*> cards;
  for (const auto& c : session.cards()) cards.emplace(c.card_id, &c);
  std::vector<RankedItem> out;
  for (const auto& r : session.rank_ordering(tiers, false)) {
    const auto* card = cards.at(r.card_id);
    RankedItem item{r.rank, r.card_id, card->domain, card->text, std::nullopt};
    if (groups) item.group = groups->at(r.card_id);
    out.push_back(std::move(item));
  }
  std::stable_sort(out.begin(), out.end(), [](const RankedItem& a, const RankedItem& b) { return a.rank > b.rank; });
  return out;
}

std::string direction_statement(const stats::WilcoxonResult& r) {
  if (!r.larger_effect)
    return "Neither group tends to rank higher (relative effects " + fixed(r.relative_effect_a, 3) + " and " +
           fixed(r.relative_effect_b, 3) + ").";
  const auto g = *r.larger_effect;
  const double effect = g == stats::Group::A ? r.relative_effect_a : r.relative_effect_b;
  return "Group " + std::string(stats::to_string(g)) + " tends to have higher ranks than group " +
         std::string(stats::to_string(stats::other(g))) + " (relative effect p_" + std::string(stats::to_string(g)) +
         " = " + fixed(effect, 3) + ").";
}

std::string significance_statement(const stats::WilcoxonResult& r, double alpha) {
  const std::string p = "p = " + format_p(r.p_value);
  if (r.p_value <= alpha) return "Significant at alpha = " + fixed(alpha, 2) + " (" + p + ").";
  if (r.p_value > kLargestConventionalAlpha) return "Not significant at any conventional alpha (" + p + ").";
  return "Not significant at alpha = " + fixed(alpha, 2) + " (" + p + ").";
}

AnalysisReport analyze(panel::RankingSession& session, const panel::SealedMap& sealed, const panel::ArmMap& arms,
                       const AnalysisOptions& options, const std::string& analysis_id, const std::string& actor) {
  if (!(options.alpha > 0.0 && options.alpha < 1.0))
    throw Error(errc::kInvalidArgument, "alpha must lie in (0, 1)");
  const auto groups = panel::card_groups(session, sealed, arms);
  const auto rv = session.unblind(sealed, arms, analysis_id, actor);

  AnalysisReport report;
  report.analysis_id = analysis_id;
  report.session_id = session.session_id();
  report.audit_event_index = session.audit().size() - 1;
  report.chair_id = session.chair_id();
  report.options = options;
  try {
    report.result = stats::wilcoxon_from_ranks(rv, options.stats);
  } catch (const Error& e) {
    if (e.code() == errc::kDegenerateDistribution)
      throw Error(e.code(), std::string(e.what()) +
                                " The finalized ordering places every anecdote in one tier; re-open the ranking "
                                "with a new session if the panel can separate them.");
    throw;
  }
  report.ranked_list = ranked_list(session, final_tiers(session), &groups);
  report.direction = direction_statement(report.result);
  report.significance = significance_statement(report.result, options.alpha);
  return report;
}

nlohmann::json to_json(const stats::WilcoxonResult& r) {
  return {{"n_a", r.n_a},
          {"n_b", r.n_b},
          {"rank_sum_a", half_json(r.rank_sum_a)},
          {"rank_sum_b", half_json(r.rank_sum_b)},
          {"u_a", half_json(r.u_a)},
          {"u_b", half_json(r.u_b)},
          {"u_min", half_json(r.u_min)},
          {"method", std::string(stats::to_string(r.method))},
          {"z_score", r.z_score ? nlohmann::json(*r.z_score) : nlohmann::json(nullptr)},
          {"p_value", r.p_value},
          {"alternative", std::string(stats::to_string(r.alternative))},
          {"relative_effect_a", r.relative_effect_a},
          {"relative_effect_b", r.relative_effect_b},
          {"larger_effect",
           r.larger_effect ? nlohmann::json(std::string(stats::to_string(*r.larger_effect))) : nlohmann::json(nullptr)},
          {"ties_present", r.ties_present},
          {"continuity_correction", r.continuity_correction}};
}

stats::WilcoxonResult wilcoxon_result_from_json(const nlohmann::json& j) {
  try {
    stats::WilcoxonResult r;
    r.n_a = j.at("n_a").get<std::size_t>();
    r.n_b = j.at("n_b").get<std::size_t>();
    r.rank_sum_a = half_from_json(j.at("rank_sum_a"));
    r.rank_sum_b = half_from_json(j.at("rank_sum_b"));
    r.u_a = half_from_json(j.at("u_a"));
    r.u_b = half_from_json(j.at("u_b"));
    r.u_min = half_from_json(j.at("u_min"));
    r.method = j.at("method").get<std::string>() == "exact" ? stats::Method::Exact : stats::Method::NormalApprox;
    if (!j.at("z_score").is_null()) r.z_score = j.at("z_score").get<double>();
    r.p_value = j.at("p_value").get<double>();
    auto alt = stats::parse_alternative(j.at("alternative").get<std::string>());
    if (!alt) throw Error(errc::kMalformedDocument, "unknown alternative");
    r.alternative = *alt;
    r.relative_effect_a = j.at("relative_effect_a").get<double>();
    r.relative_effect_b = j.at("relative_effect_b").get<double>();
    if (!j.at("larger_effect").is_null()) r.larger_effect = stats::parse_group(j.at("larger_effect").get<std::string>());
    r.ties_present = j.at("ties_present").get<bool>();
    r.continuity_correction = j.at("continuity_correction").get<bool>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::kMalformedDocument, std::string("result document: ") + e.what());
  }
}

nlohmann::json to_json(const AnalysisReport& report) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& item : report.ranked_list)
    items.push_back({{"rank", half_json(item.rank)},
                     {"card_id", item.card_id},
                     {"domain", std::string(records::to_string(item.domain))},
                     {"text", item.text},
                     {"group", item.group ? nlohmann::json(std::string(stats::to_string(*item.group)))
                                          : nlohmann::json(nullptr)}});
  const auto& cfg = report.options.stats;
  return {{"format", "impact.analysis_report"},
          {"format_version", kReportFormatVersion},
          {"analysis_id", report.analysis_id},
          {"session_id", report.session_id},
          {"audit_reference", {{"session_id", report.session_id}, {"event_index", report.audit_event_index}}},
          {"chair_id", report.chair_id},
          {"config",
           {{"alternative", std::string(stats::to_string(cfg.alternative))},
            {"continuity", cfg.continuity},
            {"exact_cap", cfg.exact_cap},
            {"method", std::string(stats::to_string(cfg.method))},
            {"alpha", report.options.alpha}}},
          {"result", to_json(report.result)},
          {"direction", report.direction},
          {"significance", report.significance},
          {"ranked_list", items}};
}

AnalysisReport analysis_report_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "impact.analysis_report")
      throw Error(errc::kMalformedDocument, "not an analysis report");
    AnalysisReport r;
    r.analysis_id = j.at("analysis_id").get<std::string>();
    r.session_id = j.at("session_id").get<std::string>();
    r.audit_event_index = j.at("audit_reference").at("event_index").get<std::size_t>();
    r.chair_id = j.at("chair_id").get<std::string>();
    const auto& cfg = j.at("config");
    auto alt = stats::parse_alternative(cfg.at("alternative").get<std::string>());
    auto method = stats::parse_method_choice(cfg.at("method").get<std::string>());
    if (!alt || !method) throw Error(errc::kMalformedDocument, "bad report config");
    r.options.stats.alternative = *alt;
    r.options.stats.method = *method;
    r.options.stats.continuity = cfg.at("continuity").get<bool>();
    r.options.stats.exact_cap = cfg.at("exact_cap").get<std::size_t>();
    r.options.alpha = cfg.at("alpha").get<double>();
    r.result = wilcoxon_result_from_json(j.at("result"));
    r.direction = j.at("direction").get<std::string>();
    r.significance = j.at("significance").get<std::string>();
    for (const auto& item : j.at("ranked_list")) {
      auto domain = records::parse_domain(item.at("domain").get<std::string>());
      if (!domain) throw Error(errc::kMalformedDocument, "unknown domain in ranked list");
      RankedItem ri{half_from_json(item.at("rank")), item.at("card_id").get<std::string>(), *domain,
                    item.at("text").get<std::string>(), std::nullopt};
      if (!item.at("group").is_null()) ri.group = stats::parse_group(item.at("group").get<std::string>());
      r.ranked_list.push_back(std::move(ri));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::kMalformedDocument, std::string("analysis report: ") + e.what());
  }
}

std::string render_text(const AnalysisReport& report) {
  const auto& r = report.result;
  std::ostringstream os;
  os << "impact analysis " << report.analysis_id << "\n";
  os << "Session: " << report.session_id << " (audit event #" << report.audit_event_index << ", chair "
     << report.chair_id << ")\n\n";
  os << "Wilcoxon rank-sum test from panel ranks\n";
  os << "  n_A = " << r.n_a << ", n_B = " << r.n_b << "\n";
  os << "  R_A = " << r.rank_sum_a.to_string() << ", R_B = " << r.rank_sum_b.to_string() << "\n";
  os << "  U_A = " << r.u_a.to_string() << ", U_B = " << r.u_b.to_string() << ", U = " << r.u_min.to_string()
     << "\n";
  os << "  method: " << (r.method == stats::Method::Exact ? "exact null distribution" : "normal approximation");
  if (r.method == stats::Method::NormalApprox)
    os << (r.continuity_correction ? " with" : " without") << " continuity correction";
  if (r.ties_present) os << " (tie-corrected)";
  os << "\n";
  if (r.z_score) os << "  z = " << fixed(*r.z_score, 4) << "\n";
  os << "  alternative: " << stats::to_string(r.alternative) << "\n";
  os << "  p-value = " << fixed(r.p_value, 4) << "\n";
  os << "  relative effects: p_A = " << fixed(r.relative_effect_a, 3) << ", p_B = " << fixed(r.relative_effect_b, 3)
     << "\n\n";
  os << report.direction << "\n" << report.significance << "\n\n";
  os << "Ranked anecdotes (most meaningful first)\n";
  for (const auto& item : report.ranked_list) {
    os << "  " << std::setw(5) << item.rank.to_string() << "  ";
    if (item.group) os << "[" << stats::to_string(*item.group) << "] ";
    os << "(" << records::to_string(item.domain) << ") " << item.text << "\n";
  }
  return os.str();
}

WhatIfResult what_if(const panel::RankingSession& session, const panel::Tiers& hypothetical,
                     const panel::CardGroups& groups, const stats::WilcoxonConfig& config) {
  if (session.status() == panel::SessionStatus::Open)
    throw Error(errc::kSessionState, "what-if analysis needs a finalized session");
  std::vector<panel::RankAssignment> ranks;
  try {
    ranks = session.rank_ordering(hypothetical, false);
  } catch (const Error& e) {
    if (e.code() == errc::kInvalidOrdering) throw Error(errc::kCardMismatch, e.what());
    throw;
  }
  WhatIfResult out;
  out.result = stats::wilcoxon_from_ranks(vector_from(ranks, groups), config);
  return out;
}

WhatIfResult what_if(const panel::RankingSession& session, const panel::SealedMap& sealed,
                     const panel::Tiers& hypothetical, const panel::ArmMap& arms,
                     const stats::WilcoxonConfig& config) {
  return what_if(session, hypothetical, panel::card_groups(session, sealed, arms), config);
}

nlohmann::json to_json(const WhatIfResult& result) {
  return {{"label", result.label}, {"exploratory", true}, {"result", to_json(result.result)}};
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::AdjacentSwaps: return "adjacent-swaps";
    case Strategy::IntraGroupExchange: return "intra-group-exchange";
    case Strategy::FullReshuffle: return "full-reshuffle";
  }
  return "adjacent-swaps";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
  for (auto s : {Strategy::AdjacentSwaps, Strategy::IntraGroupExchange, Strategy::FullReshuffle})
    if (to_string(s) == text) return s;
  return std::nullopt;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw Error(errc::kInvalidArgument, "quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

SensitivityResult sensitivity(const panel::RankingSession& session, const panel::CardGroups& groups,
                              const SensitivityOptions& options, const stats::WilcoxonConfig& config) {
  if (options.n_perturbations < 1) throw Error(errc::kInvalidArgument, "n_perturbations must be at least 1");
  const auto base_tiers = final_tiers(session);
  const auto base_ranks = session.rank_ordering(base_tiers, false);

  SensitivityResult out;
  out.strategy = options.strategy;
  out.n_perturbations = options.n_perturbations;
  out.seed = options.seed;
  out.adjacent_swaps = options.strategy == Strategy::AdjacentSwaps ? options.adjacent_swaps : 0;
  out.base_p = stats::wilcoxon_from_ranks(vector_from(base_ranks, groups), config).p_value;
  out.perturbed_p.reserve(options.n_perturbations);

  // Card indices per arm, for IntraGroupExchange.
  std::vector<std::size_t> arm_a, arm_b;
  for (std::size_t i = 0; i < base_ranks.size(); ++i)
    (groups.at(base_ranks[i].card_id) == stats::Group::A ? arm_a : arm_b).push_back(i);

  std::optional<stats::ExactNullDistribution> exact;
  Rng rng(options.seed);
  for (std::size_t rep = 0; rep < options.n_perturbations; ++rep) {
    std::vector<panel::RankAssignment> ranks;
    switch (options.strategy) {
      case Strategy::AdjacentSwaps: {
        auto tiers = base_tiers;
        for (std::size_t k = 0; k < options.adjacent_swaps && tiers.size() > 1; ++k) {
          const auto i = static_cast<std::size_t>(rng.uniform_index(tiers.size() - 1));
          std::swap(tiers[i], tiers[i + 1]);
        }
        ranks = session.rank_ordering(tiers, false);
        break;
      }
      case Strategy::IntraGroupExchange: {
        ranks = base_ranks;
        for (const auto* arm : {&arm_a, &arm_b}) {
          std::vector<HalfInteger> values;
          for (auto i : *arm) values.push_back(base_ranks[i].rank);
          rng.shuffle(std::span(values));
          for (std::size_t k = 0; k < arm->size(); ++k) ranks[(*arm)[k]].rank = values[k];
        }
        break;
      }
      case Strategy::FullReshuffle: {
        ranks = base_ranks;
        std::vector<HalfInteger> values;
        for (const auto& r : base_ranks) values.push_back(r.rank);
        rng.shuffle(std::span(values));
        for (std::size_t k = 0; k < ranks.size(); ++k) ranks[k].rank = values[k];
        break;
      }
    }
    const auto rv = vector_from(ranks, groups);
    if (!exact && !rv.has_ties() && rv.n_a() <= config.exact_cap && rv.n_b() <= config.exact_cap &&
        config.method != stats::MethodChoice::NormalApprox)
      exact = stats::exact_null_distribution(rv.n_a(), rv.n_b(), config.exact_cap);
    out.perturbed_p.push_back(stats::wilcoxon_from_ranks(rv, config, exact ? &*exact : nullptr).p_value);
  }

  auto sorted = out.perturbed_p;
  std::sort(sorted.begin(), sorted.end());
  out.summary = {sorted.front(), quantile_sorted(sorted, 0.25), quantile_sorted(sorted, 0.5),
                 quantile_sorted(sorted, 0.75), sorted.back()};
  return out;
}

SensitivityResult sensitivity(const panel::RankingSession& session, const panel::SealedMap& sealed,
                              const panel::ArmMap& arms, const SensitivityOptions& options,
                              const stats::WilcoxonConfig& config) {
  return sensitivity(session, panel::card_groups(session, sealed, arms), options, config);
}

nlohmann::json to_json(const SensitivityResult& r) {
  return {{"label", r.label},
          {"exploratory", true},
          {"strategy", std::string(to_string(r.strategy))},
          {"n_perturbations", r.n_perturbations},
          {"seed", r.seed},
          {"adjacent_swaps", r.adjacent_swaps},
          {"base_p", r.base_p},
          {"summary",
           {{"min", r.summary.min},
            {"q25", r.summary.q25},
            {"median", r.summary.median},
            {"q75", r.summary.q75},
            {"max", r.summary.max}}},
          {"perturbed_p", r.perturbed_p}};
}

}  // namespace impact::analysis
