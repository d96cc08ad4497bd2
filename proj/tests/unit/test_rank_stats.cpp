#include "impact/error.hpp"
#include "impact/rank_stats.hpp"

#include <catch_amalgamated.hpp>

using namespace impact;
using namespace impact::stats;
using Catch::Approx;

namespace {

RankVector make(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<RankEntry> entries;
  int i = 0;
  for (double r : a) entries.push_back({"a" + std::to_string(i++), Group::A, *HalfInteger::from_double(r)});
  for (double r : b) entries.push_back({"b" + std::to_string(i++), Group::B, *HalfInteger::from_double(r)});
  return RankVector(std::move(entries));
}

const std::vector<double> kGoldenA = {11, 6, 8, 5, 9, 10};
const std::vector<double> kGoldenB = {2, 4, 3, 1, 7};

std::vector<HalfInteger> halves(std::initializer_list<double> values) {
  std::vector<HalfInteger> out;
  for (double v : values) out.push_back(*HalfInteger::from_double(v));
  return out;
}

}  // namespace

TEST_CASE("midranks from tiers, most meaningful first") {
  auto r = midranks_from_ordering({{"x"}, {"y"}, {"z"}});
  REQUIRE(r.size() == 3);
  CHECK(r[0] == RankedRef{"x", HalfInteger(3)});
  CHECK(r[1] == RankedRef{"y", HalfInteger(2)});
  CHECK(r[2] == RankedRef{"z", HalfInteger(1)});

  r = midranks_from_ordering({{"a", "b"}, {"c"}});
  CHECK(r[0].rank.to_string() == "2.5");
  CHECK(r[1].rank.to_string() == "2.5");
  CHECK(r[2].rank == HalfInteger(1));

  for (const auto& x : midranks_from_ordering({{"a", "b", "c", "d"}})) CHECK(x.rank.to_string() == "2.5");

  // Least meaningful first flips the scale.
  r = midranks_from_ordering({{"x"}, {"y"}, {"z"}}, false);
  CHECK(r[0].rank == HalfInteger(1));
  CHECK(r[2].rank == HalfInteger(3));
}

TEST_CASE("midranks reject empty and duplicated input") {
  CHECK_THROWS_AS(midranks_from_ordering({}), Error);
  CHECK_THROWS_AS(midranks_from_ordering({{}}), Error);
  CHECK_THROWS_AS(midranks_from_ordering({{"a"}, {"b", "a"}}), Error);
}

TEST_CASE("validate_midranks") {
  CHECK_FALSE(validate_midranks(halves({1, 2, 3})));
  CHECK(validate_midranks(halves({1, 2, 2})));
  CHECK_FALSE(validate_midranks(halves({2.5, 2.5, 1})));
  CHECK_FALSE(validate_midranks(halves({2.5, 2.5, 2.5, 2.5})));
  CHECK(validate_midranks(halves({1, 1, 3})));
  CHECK(validate_midranks(halves({0, 1})));
  CHECK(validate_midranks(halves({1, 3})));
  CHECK(validate_midranks({}));
}

TEST_CASE("rank vector construction validates its invariants") {
  CHECK_NOTHROW(make({2}, {1}));
  CHECK_THROWS_AS(make({1, 2}, {}), Error);
  CHECK_THROWS_AS(make({1, 2}, {2}), Error);
  CHECK_THROWS_AS(make({1, 4}, {2, 5}), Error);
  const auto rv = make({1.5, 4}, {1.5, 3});
  CHECK(rv.has_ties());
  CHECK(rv.tie_sizes() == std::vector<std::size_t>{2});
}

TEST_CASE("u statistics") {
  auto s = u_statistics(make(kGoldenA, kGoldenB));
  CHECK(s.rank_sum_a == HalfInteger(49));
  CHECK(s.rank_sum_b == HalfInteger(17));
  CHECK(s.u_a == HalfInteger(28));
  CHECK(s.u_b == HalfInteger(2));

  s = u_statistics(make({2}, {1}));
  CHECK(s.rank_sum_a == HalfInteger(2));
  CHECK(s.rank_sum_b == HalfInteger(1));
  CHECK(s.u_a == HalfInteger(1));
  CHECK(s.u_b == HalfInteger(0));

  s = u_statistics(make({1, 4}, {2, 3}));
  CHECK(s.u_a == HalfInteger(2));
  CHECK(s.u_b == HalfInteger(2));
}

TEST_CASE("exact null distribution small cases") {
  auto d = exact_null_distribution(1, 1);
  CHECK(std::vector<std::uint64_t>(d.counts().begin(), d.counts().end()) == std::vector<std::uint64_t>{1, 1});

  d = exact_null_distribution(2, 2);
  CHECK(std::vector<std::uint64_t>(d.counts().begin(), d.counts().end()) ==
        std::vector<std::uint64_t>{1, 1, 2, 1, 1});
  CHECK(d.total() == 6);

  d = exact_null_distribution(5, 6);
  CHECK(d.total() == 462);
  CHECK(d.count(0) == 1);
  CHECK(d.count(1) == 1);
  CHECK(d.count(2) == 2);
  CHECK(d.count(-1) == 0);
  CHECK(d.count(31) == 0);
}

TEST_CASE("exact null distribution respects the size cap") {
  CHECK_NOTHROW(exact_null_distribution(25, 25));
  CHECK_THROWS_AS(exact_null_distribution(26, 3), Error);
  CHECK_THROWS_AS(exact_null_distribution(3, 30, 29), Error);
  CHECK_NOTHROW(exact_null_distribution(3, 30, 30));
  CHECK_THROWS_AS(exact_null_distribution(0, 3), Error);
  try {
    exact_null_distribution(26, 3);
  } catch (const Error& e) {
    CHECK(e.code() == errc::kSizeAboveCap);
  }
}

TEST_CASE("exact p-values") {
  CHECK(exact_p(HalfInteger(0), 1, 1, Alternative::TwoSided) == 1.0);
  CHECK(exact_p(HalfInteger(0), 2, 2, Alternative::TwoSided) == Approx(1.0 / 3.0));
  CHECK(exact_p(HalfInteger(2), 5, 6, Alternative::TwoSided) == Approx(8.0 / 462.0));
  CHECK(exact_p(HalfInteger(2), 5, 6, Alternative::AGreater) == Approx(4.0 / 462.0));
  CHECK_THROWS_AS(exact_p(HalfInteger::from_halves(5), 5, 6, Alternative::TwoSided), Error);
  CHECK_THROWS_AS(exact_p(HalfInteger(2), 26, 6, Alternative::TwoSided), Error);
}

TEST_CASE("normal approximation") {
  // Reference values from an independent statistics package.
  auto n = normal_approx_p(make(kGoldenA, kGoldenB), Alternative::TwoSided, false);
  CHECK(n.z_score == Approx(2.3734644158557).epsilon(1e-10));
  CHECK(n.p_value == Approx(0.017622090962324432).epsilon(1e-10));
  CHECK(n.p_value == Approx(0.018).margin(0.001));

  n = normal_approx_p(make(kGoldenA, kGoldenB), Alternative::TwoSided, true);
  CHECK(n.p_value == Approx(0.022478873366125265).epsilon(1e-10));

  n = normal_approx_p(make(kGoldenA, kGoldenB), Alternative::AGreater, false);
  CHECK(n.p_value == Approx(0.008811045481162216).epsilon(1e-10));

  n = normal_approx_p(make({1, 4}, {2, 3}), Alternative::TwoSided, false);
  CHECK(n.z_score == 0.0);
  CHECK(n.p_value == 1.0);

  // Tie-corrected variance: sigma^2 = (4/12) * (5 - 6/12) = 1.5.
  n = normal_approx_p(make({1.5, 4}, {1.5, 3}), Alternative::TwoSided, false);
  CHECK(n.z_score == Approx(0.5 / std::sqrt(1.5)));
  CHECK(n.p_value == Approx(0.6830913983096087).epsilon(1e-10));
  n = normal_approx_p(make({1.5, 4}, {1.5, 3}), Alternative::TwoSided, true);
  CHECK(n.p_value == Approx(1.0));
}

TEST_CASE("all-tied ranks are a degenerate distribution") {
  try {
    normal_approx_p(make({2, 2}, {2}), Alternative::TwoSided, false);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == errc::kDegenerateDistribution);
  }
  CHECK_THROWS_AS(wilcoxon_from_ranks(make({2.5, 2.5}, {2.5, 2.5})), Error);
}

TEST_CASE("relative effect") {
  auto e = relative_effect(HalfInteger(28), 6, 5);
  CHECK(e.a == Approx(0.933).margin(0.0005));
  CHECK(e.a + e.b == 1.0);
  CHECK(relative_effect(HalfInteger(2), 2, 2).a == 0.5);
  CHECK(relative_effect(HalfInteger(6), 2, 3).a == 1.0);
}

TEST_CASE("wilcoxon on the worked example") {
  const auto rv = make(kGoldenA, kGoldenB);

  WilcoxonConfig normal;
  normal.method = MethodChoice::NormalApprox;
  auto r = wilcoxon_from_ranks(rv, normal);
  CHECK(r.method == Method::NormalApprox);
  CHECK(r.p_value == Approx(0.018).margin(0.001));
  CHECK(r.larger_effect == Group::A);
  CHECK(r.larger_relative_effect() == Approx(0.93).margin(0.005));
  CHECK(r.n_a == 6);
  CHECK(r.n_b == 5);

  r = wilcoxon_from_ranks(rv);
  CHECK(r.method == Method::Exact);
  CHECK(r.p_value == Approx(8.0 / 462.0).epsilon(1e-12));
  CHECK_FALSE(r.z_score);
  CHECK(r.u_min == HalfInteger(2));

  WilcoxonConfig greater;
  greater.alternative = Alternative::AGreater;
  CHECK(wilcoxon_from_ranks(rv, greater).p_value == Approx(0.008658008658008658));
  greater.alternative = Alternative::BGreater;
  CHECK(wilcoxon_from_ranks(rv, greater).p_value == Approx(0.9956709956709956));
}

TEST_CASE("wilcoxon on the smallest instance") {
  const auto r = wilcoxon_from_ranks(make({2}, {1}));
  CHECK(r.p_value == 1.0);
  CHECK(r.relative_effect_a == 1.0);
}

TEST_CASE("method selection") {
  const auto tied = make({1.5, 4}, {1.5, 3});
  CHECK(wilcoxon_from_ranks(tied).method == Method::NormalApprox);
  CHECK(wilcoxon_from_ranks(tied).ties_present);

  WilcoxonConfig forced;
  forced.method = MethodChoice::Exact;
  CHECK_THROWS_AS(wilcoxon_from_ranks(tied, forced), Error);

  WilcoxonConfig capped;
  capped.exact_cap = 5;
  CHECK(wilcoxon_from_ranks(make(kGoldenA, kGoldenB), capped).method == Method::NormalApprox);
}

TEST_CASE("group and option names round trip") {
  for (auto a : {Alternative::TwoSided, Alternative::AGreater, Alternative::BGreater})
    CHECK(parse_alternative(to_string(a)) == a);
  for (auto m : {MethodChoice::Auto, MethodChoice::Exact, MethodChoice::NormalApprox})
    CHECK(parse_method_choice(to_string(m)) == m);
  CHECK(parse_group("A") == Group::A);
  CHECK(parse_group("b") == Group::B);
  CHECK_FALSE(parse_group("C"));
}
