#include "impact/rank_stats.hpp"

#include "impact/error.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace impact::stats {

std::string_view to_string(Group g) { return g == Group::A ? "A" : "B"; }

std::optional<Group> parse_group(std::string_view text) {
  if (text == "A" || text == "a") return Group::A;
  if (text == "B" || text == "b") return Group::B;
  return std::nullopt;
}

std::string_view to_string(Alternative a) {
  switch (a) {
    case Alternative::TwoSided: return "two-sided";
    case Alternative::AGreater: return "a-greater";
    case Alternative::BGreater: return "b-greater";
  }
  return "two-sided";
}

std::string_view to_string(Method m) { return m == Method::Exact ? "exact" : "normal"; }

std::string_view to_string(MethodChoice m) {
  switch (m) {
    case MethodChoice::Auto: return "auto";
    case MethodChoice::Exact: return "exact";
    case MethodChoice::NormalApprox: return "normal";
  }
  return "auto";
}

std::optional<Alternative> parse_alternative(std::string_view text) {
  if (text == "two-sided") return Alternative::TwoSided;
  if (text == "a-greater") return Alternative::AGreater;
  if (text == "b-greater") return Alternative::BGreater;
  return std::nullopt;
}

std::optional<MethodChoice> parse_method_choice(std::string_view text) {
  if (text == "auto") return MethodChoice::Auto;
  if (text == "exact") return MethodChoice::Exact;
  if (text == "normal") return MethodChoice::NormalApprox;
  return std::nullopt;
}

std::optional<std::string> validate_midranks(std::span<const HalfInteger> ranks) {
  if (ranks.empty()) return "rank list is empty";
  std::vector<HalfInteger> sorted(ranks.begin(), ranks.end());
  std::sort(sorted.begin(), sorted.end());
  std::size_t p = 0;
  while (p < sorted.size()) {
    std::size_t t = 1;
    while (p + t < sorted.size() && sorted[p + t] == sorted[p]) ++t;
    // A tie group at positions p+1..p+t must carry p + (t+1)/2.
    auto expected = HalfInteger::from_halves(static_cast<std::int64_t>(2 * p + t + 1));
    if (sorted[p] != expected) {
      std::string where = t == 1 ? "position " + std::to_string(p + 1)
                                 : "positions " + std::to_string(p + 1) + "-" + std::to_string(p + t);
      return "rank " + sorted[p].to_string() + " held by " + std::to_string(t) + " item(s) at " + where +
             " must be " + expected.to_string();
    }
    p += t;
  }
  return std::nullopt;
}

RankVector::RankVector(std::vector<RankEntry> entries) : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (e.rank <= HalfInteger(0))
      throw Error(errc::kInvalidRankVector, "rank " + e.rank.to_string() + " is not positive");
    (e.group == Group::A ? n_a_ : n_b_)++;
  }
  if (n_a_ < 1 || n_b_ < 1)
    throw Error(errc::kInvalidRankVector, "both groups need at least one ranked participant (n_A=" +
                                              std::to_string(n_a_) + ", n_B=" + std::to_string(n_b_) + ")");
  std::vector<HalfInteger> ranks;
  ranks.reserve(entries_.size());
  for (const auto& e : entries_) ranks.push_back(e.rank);
  if (auto violation = validate_midranks(ranks))
    throw Error(errc::kInvalidRankVector, "invalid midrank sequence: " + *violation);

  std::sort(ranks.begin(), ranks.end());
  for (std::size_t i = 0; i < ranks.size();) {
    std::size_t j = i + 1;
    while (j < ranks.size() && ranks[j] == ranks[i]) ++j;
    if (j - i > 1) tie_sizes_.push_back(j - i);
    i = j;
  }
}

RankVector RankVector::swapped_labels() const {
  std::vector<RankEntry> swapped = entries_;
  for (auto& e : swapped) e.group = other(e.group);
  return RankVector(std::move(swapped));
}

std::vector<RankedRef> midranks_from_ordering(const std::vector<std::vector<std::string>>& tiers,
                                              bool most_meaningful_first) {
  if (tiers.empty()) throw Error(errc::kInvalidOrdering, "ordering has no tiers");
  std::size_t n = 0;
  std::unordered_set<std::string> seen;
  for (const auto& tier : tiers) {
    if (tier.empty()) throw Error(errc::kInvalidOrdering, "ordering contains an empty tier");
    for (const auto& ref : tier) {
      if (!seen.insert(ref).second)
        throw Error(errc::kInvalidOrdering, "item '" + ref + "' appears more than once in the ordering");
      ++n;
    }
  }

  std::vector<RankedRef> out;
  out.reserve(n);
  // `below` counts items ranked strictly lower than the current tier.
  std::size_t consumed = 0;
  for (const auto& tier : tiers) {
    const std::size_t t = tier.size();
    const std::size_t below = most_meaningful_first ? n - consumed - t : consumed;
    auto rank = HalfInteger::from_halves(static_cast<std::int64_t>(2 * below + t + 1));
    for (const auto& ref : tier) out.push_back({ref, rank});
    consumed += t;
  }
  return out;
}

RankSums u_statistics(const RankVector& rv) {
  RankSums s;
  for (const auto& e : rv.entries()) (e.group == Group::A ? s.rank_sum_a : s.rank_sum_b) += e.rank;
  auto offset = [](std::size_t n) {
    return HalfInteger::from_halves(static_cast<std::int64_t>(n * (n + 1)));  // n(n+1)/2 in halves
  };
  s.u_a = s.rank_sum_a - offset(rv.n_a());
  s.u_b = s.rank_sum_b - offset(rv.n_b());
  return s;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double exact_p(HalfInteger u_observed, const ExactNullDistribution& dist, Alternative alternative) {
  if (!u_observed.is_integer())
    throw Error(errc::kTiesPresent,
                "exact p-value needs an integer U statistic; tied ranks produced U=" + u_observed.to_string());
  const double tail = dist.lower_tail(u_observed.whole());
  if (alternative == Alternative::TwoSided) return std::min(1.0, 2.0 * tail);
  return tail;
}

double exact_p(HalfInteger u_observed, std::size_t n_a, std::size_t n_b, Alternative alternative,
               std::size_t cap) {
  if (!u_observed.is_integer())
    throw Error(errc::kTiesPresent,
                "exact p-value needs an integer U statistic; tied ranks produced U=" + u_observed.to_string());
  return exact_p(u_observed, exact_null_distribution(n_a, n_b, cap), alternative);
}

NormalApproximation normal_approx_p(const RankVector& rv, Alternative alternative, bool continuity) {
  const double n_a = static_cast<double>(rv.n_a());
  const double n_b = static_cast<double>(rv.n_b());
  const double big_n = n_a + n_b;
  const auto& ties = rv.tie_sizes();
  if (ties.size() == 1 && ties.front() == rv.size())
    throw Error(errc::kDegenerateDistribution,
                "all " + std::to_string(rv.size()) +
                    " ranks are tied; the rank-sum statistic has zero variance. "
                    "Ask the panel for an ordering that separates at least two anecdotes.");

  double tie_term = 0.0;
  for (std::size_t t : ties) {
    const double td = static_cast<double>(t);
    tie_term += td * td * td - td;
  }
  const double variance = (n_a * n_b / 12.0) * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
  const double sigma = std::sqrt(variance);
  const double mean = n_a * n_b / 2.0;
  const double u_a = u_statistics(rv).u_a.to_double();

  double correction = 0.0;
  if (continuity) {
    switch (alternative) {
      case Alternative::TwoSided: correction = u_a > mean ? 0.5 : (u_a < mean ? -0.5 : 0.0); break;
      case Alternative::AGreater: correction = 0.5; break;
      case Alternative::BGreater: correction = -0.5; break;
    }
  }
  NormalApproximation out;
  out.z_score = (u_a - mean - correction) / sigma;
  switch (alternative) {
    case Alternative::TwoSided: out.p_value = std::min(1.0, 2.0 * normal_cdf(-std::abs(out.z_score))); break;
    case Alternative::AGreater: out.p_value = normal_cdf(-out.z_score); break;
    case Alternative::BGreater: out.p_value = normal_cdf(out.z_score); break;
  }
  return out;
}

RelativeEffects relative_effect(HalfInteger u_a, std::size_t n_a, std::size_t n_b) {
  if (n_a < 1 || n_b < 1) throw Error(errc::kInvalidArgument, "relative effect needs n_A, n_B >= 1");
  RelativeEffects out;
  out.a = u_a.to_double() / static_cast<double>(n_a * n_b);
  out.b = 1.0 - out.a;
  return out;
}

WilcoxonResult wilcoxon_from_ranks(const RankVector& rv, const WilcoxonConfig& config) {
  return wilcoxon_from_ranks(rv, config, nullptr);
}

WilcoxonResult wilcoxon_from_ranks(const RankVector& rv, const WilcoxonConfig& config,
                                   const ExactNullDistribution* precomputed) {
  WilcoxonResult r;
  r.n_a = rv.n_a();
  r.n_b = rv.n_b();
  const auto sums = u_statistics(rv);
  r.rank_sum_a = sums.rank_sum_a;
  r.rank_sum_b = sums.rank_sum_b;
  r.u_a = sums.u_a;
  r.u_b = sums.u_b;
  r.u_min = std::min(sums.u_a, sums.u_b);
  r.alternative = config.alternative;
  r.ties_present = rv.has_ties();

  const auto effects = relative_effect(sums.u_a, r.n_a, r.n_b);
  r.relative_effect_a = effects.a;
  r.relative_effect_b = effects.b;
  if (sums.u_a != sums.u_b) r.larger_effect = sums.u_a > sums.u_b ? Group::A : Group::B;

  const bool within_cap = r.n_a <= config.exact_cap && r.n_b <= config.exact_cap;
  bool use_exact = false;
  switch (config.method) {
    case MethodChoice::Auto: use_exact = !r.ties_present && within_cap; break;
    case MethodChoice::Exact:
      if (r.ties_present)
        throw Error(errc::kTiesPresent, "exact method requested but the ranks contain ties");
      use_exact = true;
      break;
    case MethodChoice::NormalApprox: use_exact = false; break;
  }

  if (use_exact) {
    HalfInteger u = r.u_min;
    if (config.alternative == Alternative::AGreater) u = sums.u_b;
    if (config.alternative == Alternative::BGreater) u = sums.u_a;
    r.method = Method::Exact;
    if (precomputed && precomputed->n_a() == r.n_a && precomputed->n_b() == r.n_b) {
      r.p_value = exact_p(u, *precomputed, config.alternative);
    } else {
      r.p_value = exact_p(u, r.n_a, r.n_b, config.alternative, config.exact_cap);
    }
  } else {
    const auto approx = normal_approx_p(rv, config.alternative, config.continuity);
    r.method = Method::NormalApprox;
    r.z_score = approx.z_score;
    r.p_value = approx.p_value;
    r.continuity_correction = config.continuity;
  }
  return r;
}

}  // namespace impact::stats
