#pragma once

// Wilcoxon rank-sum / Mann-Whitney U test computed directly from panel ranks.
//
// Ranks follow the panel convention: n is the most meaningful anecdote, 1 the
// least, and tied anecdotes share the average of the positions they span.

#include "impact/half_integer.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace impact::stats {

enum class Group : std::uint8_t { A, B };

constexpr Group other(Group g) { return g == Group::A ? Group::B : Group::A; }
std::string_view to_string(Group g);
std::optional<Group> parse_group(std::string_view text);

struct RankEntry {
  std::string participant_ref;
  Group group = Group::A;
  HalfInteger rank;

  bool operator==(const RankEntry&) const = default;
};

/// Two-group collection of midranks. Construction enforces n_A, n_B >= 1 and
/// that the pooled ranks form a valid midrank sequence over 1..N (which
/// implies the pooled sum is N(N+1)/2).
class RankVector {
 public:
  explicit RankVector(std::vector<RankEntry> entries);

  std::span<const RankEntry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t n_a() const { return n_a_; }
  std::size_t n_b() const { return n_b_; }
  std::size_t count(Group g) const { return g == Group::A ? n_a_ : n_b_; }

  /// Sizes of tie groups (only groups with t >= 2), in ascending rank order.
  const std::vector<std::size_t>& tie_sizes() const { return tie_sizes_; }
  bool has_ties() const { return !tie_sizes_.empty(); }

  /// Same ranks with the A/B labels exchanged.
  RankVector swapped_labels() const;

 private:
  std::vector<RankEntry> entries_;
  std::size_t n_a_ = 0;
  std::size_t n_b_ = 0;
  std::vector<std::size_t> tie_sizes_;
};

/// nullopt when `ranks` is a valid midrank sequence, otherwise a description
/// of the first violation found.
std::optional<std::string> validate_midranks(std::span<const HalfInteger> ranks);

struct RankedRef {
  std::string ref;
  HalfInteger rank;

  bool operator==(const RankedRef&) const = default;
};

/// Converts an ordering of tie groups into midranks. With
/// `most_meaningful_first` the first tier holds the highest ranks. Output
/// follows the input order (tier by tier, member by member).
std::vector<RankedRef> midranks_from_ordering(const std::vector<std::vector<std::string>>& tiers,
                                              bool most_meaningful_first = true);

struct RankSums {
  HalfInteger rank_sum_a;
  HalfInteger rank_sum_b;
  HalfInteger u_a;
  HalfInteger u_b;
};

/// R_g is the sum of group g's ranks; U_g = R_g - n_g(n_g + 1)/2.
RankSums u_statistics(const RankVector& rv);

inline constexpr std::size_t kDefaultExactCap = 25;

/// Null distribution of U for group sizes (n_A, n_B): counts[u] is the number
/// of n_A-subsets of {1..N} whose U statistic equals u.
class ExactNullDistribution {
 public:
  ExactNullDistribution(std::size_t n_a, std::size_t n_b, std::vector<std::uint64_t> counts);

  std::size_t n_a() const { return n_a_; }
  std::size_t n_b() const { return n_b_; }
  std::span<const std::uint64_t> counts() const { return counts_; }
  std::uint64_t total() const { return total_; }
  std::uint64_t count(std::int64_t u) const;

  /// P(U <= u) under the null.
  double lower_tail(std::int64_t u) const;

 private:
  std::size_t n_a_;
  std::size_t n_b_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> cumulative_;
  std::uint64_t total_ = 0;
};

/// Throws size_above_cap when either size exceeds `cap` or is zero.
ExactNullDistribution exact_null_distribution(std::size_t n_a, std::size_t n_b,
                                              std::size_t cap = kDefaultExactCap);

enum class Alternative : std::uint8_t { TwoSided, AGreater, BGreater };
enum class Method : std::uint8_t { Exact, NormalApprox };
enum class MethodChoice : std::uint8_t { Auto, Exact, NormalApprox };

std::string_view to_string(Alternative a);
std::string_view to_string(Method m);
std::string_view to_string(MethodChoice m);
std::optional<Alternative> parse_alternative(std::string_view text);
std::optional<MethodChoice> parse_method_choice(std::string_view text);

/// Exact p-value. For TwoSided pass u_min and get min(1, 2 P(U <= u_min)).
/// For a one-sided alternative pass the U of the group the alternative
/// predicts to rank lower (U_B for AGreater, U_A for BGreater) and get
/// P(U <= u). A non-integer u means the ranks were tied: ties_present.
double exact_p(HalfInteger u_observed, std::size_t n_a, std::size_t n_b, Alternative alternative,
               std::size_t cap = kDefaultExactCap);
double exact_p(HalfInteger u_observed, const ExactNullDistribution& dist, Alternative alternative);

struct NormalApproximation {
  double z_score = 0.0;
  double p_value = 1.0;
};

/// z = (U_A - n_A n_B / 2 - c) / sigma with the tie-corrected variance
/// sigma^2 = (n_A n_B / 12) [(N + 1) - sum(t^3 - t) / (N (N - 1))].
/// c is the 0.5 continuity correction toward the null when enabled.
NormalApproximation normal_approx_p(const RankVector& rv, Alternative alternative, bool continuity);

struct RelativeEffects {
  double a = 0.5;
  double b = 0.5;
};

/// p_A = U_A / (n_A n_B), p_B = 1 - p_A.
RelativeEffects relative_effect(HalfInteger u_a, std::size_t n_a, std::size_t n_b);

/// Standard normal CDF.
double normal_cdf(double x);

struct WilcoxonConfig {
  Alternative alternative = Alternative::TwoSided;
  bool continuity = false;
  std::size_t exact_cap = kDefaultExactCap;
  MethodChoice method = MethodChoice::Auto;

  bool operator==(const WilcoxonConfig&) const = default;
};

struct WilcoxonResult {
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  HalfInteger rank_sum_a;
  HalfInteger rank_sum_b;
  HalfInteger u_a;
  HalfInteger u_b;
  HalfInteger u_min;
  Method method = Method::Exact;
  std::optional<double> z_score;
  double p_value = 1.0;
  Alternative alternative = Alternative::TwoSided;
  double relative_effect_a = 0.5;
  double relative_effect_b = 0.5;
  /// Group with the larger relative effect; nullopt when they are equal.
  std::optional<Group> larger_effect;
  bool ties_present = false;
  bool continuity_correction = false;

  double larger_relative_effect() const {
    return relative_effect_a >= relative_effect_b ? relative_effect_a : relative_effect_b;
  }

  bool operator==(const WilcoxonResult&) const = default;
};

/// Auto selects the exact method when there are no ties and both sizes are
/// within config.exact_cap, otherwise the normal approximation.
WilcoxonResult wilcoxon_from_ranks(const RankVector& rv, const WilcoxonConfig& config = {});

/// Same as above but reuses a precomputed exact distribution when its sizes
/// match; used by simulation loops.
WilcoxonResult wilcoxon_from_ranks(const RankVector& rv, const WilcoxonConfig& config,
                                   const ExactNullDistribution* precomputed);

}  // namespace impact::stats
