// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status is
// the number of failed criteria, so ctest fails if any line says FAIL.

#include "impact/analysis.hpp"
#include "impact/power_sim.hpp"
#include "impact/quality.hpp"
#include "impact/random.hpp"

#include "blinding.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace impact;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const char* name, double time_limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (elapsed >= time_limit_s) {
    out.pass = false;
    out.detail += "; runtime limit exceeded";
  }
  failures += !out.pass;
  std::printf("%s  %-36s %s (%.3f s, limit %.0f s)\n", out.pass ? "PASS" : "FAIL", name, out.detail.c_str(), elapsed,
              time_limit_s);
  std::fflush(stdout);
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double null_bound(std::size_t reps) { return 0.05 + 3.0 * std::sqrt(0.05 * 0.95 / static_cast<double>(reps)); }

Outcome golden_example() {
  auto opened = fixtures::finalized_golden();
  analysis::AnalysisOptions options;
  options.stats.method = stats::MethodChoice::NormalApprox;
  options.stats.continuity = false;
  const auto report = analysis::analyze(opened.session, opened.sealed, fixtures::golden_arms(), options, "acceptance");
  const auto& r = report.result;
  const bool sums = r.rank_sum_a == HalfInteger(49) && r.rank_sum_b == HalfInteger(17) && r.u_a == HalfInteger(28) &&
                    r.u_b == HalfInteger(2);
  const bool p_ok = std::abs(r.p_value - 0.018) <= 0.001;
  const bool effect_ok = std::abs(r.larger_relative_effect() - 0.933) <= 0.005 && r.larger_effect == stats::Group::A;
  return {sums && p_ok && effect_ok,
          fmt("R=%s/%s U=%s/%s p=%.5f (0.018+-0.001) p_hat=%.4f (0.933+-0.005)", r.rank_sum_a.to_string().c_str(),
              r.rank_sum_b.to_string().c_str(), r.u_a.to_string().c_str(), r.u_b.to_string().c_str(), r.p_value,
              r.larger_relative_effect())};
}

Outcome exact_oracle() {
  std::size_t mismatches = 0, checked = 0;
  for (int n_a = 1; n_a <= 8; ++n_a) {
    for (int n_b = 1; n_b <= 8; ++n_b) {
      const auto brute = oracle::enumerate_u(n_a, n_b);
      const auto dist = stats::exact_null_distribution(n_a, n_b);
      const double total = static_cast<double>(oracle::choose(n_a + n_b, n_a));
      mismatches += dist.total() != oracle::choose(n_a + n_b, n_a);
      std::uint64_t running = 0;
      for (int u = 0; u <= n_a * n_b; ++u) {
        const std::uint64_t c = brute.count(u) ? brute.at(u) : 0;
        running += c;
        const double tail = static_cast<double>(running) / total;
        mismatches += dist.count(u) != c;
        for (auto alt : {stats::Alternative::AGreater, stats::Alternative::BGreater, stats::Alternative::TwoSided}) {
          const double want = alt == stats::Alternative::TwoSided ? std::min(1.0, 2.0 * tail) : tail;
          mismatches += std::abs(stats::exact_p(HalfInteger(u), dist, alt) - want) > 1e-12;
        }
        ++checked;
      }
    }
  }
  return {mismatches == 0, fmt("%zu (n_A, n_B, U) cells over 1..8 x 1..8, %zu mismatches", checked, mismatches)};
}

Outcome invariants() {
  Rng rng(31337);
  const int cases = 2000;
  int failures_here = 0, tested = 0;
  for (int i = 0; i < cases; ++i) {
    const int n = 2 + static_cast<int>(rng.uniform_index(39));
    const int n_a = 1 + static_cast<int>(rng.uniform_index(n - 1));
    const int levels = rng.uniform01() < 0.3 ? 1000000 : 2 + static_cast<int>(rng.uniform_index(n));
    std::vector<int> scores(n);
    for (auto& s : scores) s = static_cast<int>(rng.uniform_index(levels));
    const auto halves = oracle::midrank_halves(scores);
    std::vector<stats::RankEntry> entries;
    for (int k = 0; k < n; ++k)
      entries.push_back({"p" + std::to_string(k), k < n_a ? stats::Group::A : stats::Group::B,
                         HalfInteger::from_halves(halves[k])});
    const stats::RankVector rv(entries);
    if (rv.tie_sizes().size() == 1 && rv.tie_sizes()[0] == rv.size()) continue;  // zero variance by design
    ++tested;

    const auto r = stats::wilcoxon_from_ranks(rv);
    bool ok = r.u_a + r.u_b == HalfInteger(static_cast<std::int64_t>(rv.n_a() * rv.n_b()));
    ok &= r.rank_sum_a + r.rank_sum_b == HalfInteger(static_cast<std::int64_t>(n) * (n + 1) / 2);
    ok &= std::abs(r.relative_effect_a + r.relative_effect_b - 1.0) < 1e-15;

    const auto swapped = stats::wilcoxon_from_ranks(rv.swapped_labels());
    ok &= std::abs(swapped.p_value - r.p_value) <= 1e-12 * std::max(1.0, r.p_value);
    ok &= swapped.u_a == r.u_b && swapped.rank_sum_a == r.rank_sum_b;

    auto reordered = entries;
    rng.shuffle(std::span(reordered));
    ok &= stats::wilcoxon_from_ranks(stats::RankVector(reordered)) == r;

    auto exchanged = entries;
    for (auto g : {stats::Group::A, stats::Group::B}) {
      std::vector<HalfInteger> ranks;
      for (const auto& e : exchanged)
        if (e.group == g) ranks.push_back(e.rank);
      rng.shuffle(std::span(ranks));
      std::size_t k = 0;
      for (auto& e : exchanged)
        if (e.group == g) e.rank = ranks[k++];
    }
    ok &= stats::wilcoxon_from_ranks(stats::RankVector(exchanged)) == r;
    failures_here += !ok;
  }
  return {failures_here == 0 && tested >= 1000,
          fmt("%d random rank vectors (with and without ties), %d failures", tested, failures_here)};
}

sim::SimConfig sim_config(std::size_t n, double delta, double tau, std::size_t reps, std::uint64_t seed) {
  sim::SimConfig c;
  c.n_a = c.n_b = n;
  c.delta = delta;
  c.panel_noise_sd = tau;
  c.reps = reps;
  c.seed = seed;
  c.alpha = 0.05;
  return c;
}

Outcome null_calibration() {
  auto c = sim_config(10, 0.0, 0.0, 20000, 20260101);
  c.method = stats::MethodChoice::Exact;
  const auto r = sim::run_cell(c);
  const double bound = null_bound(c.reps);
  return {r.rejection_rate <= bound && r.reps_used == c.reps,
          fmt("rejection rate %.5f <= %.5f (mc stderr %.5f, %zu reps)", r.rejection_rate, bound, r.mc_stderr,
              r.reps_used)};
}

Outcome noise_power() {
  const auto clean = sim::run_cell(sim_config(12, 1.5, 0.0, 10000, 777));
  const auto noisy = sim::run_cell(sim_config(12, 1.5, 3.0, 10000, 778));
  const double combined = std::sqrt(clean.mc_stderr * clean.mc_stderr + noisy.mc_stderr * noisy.mc_stderr);
  const bool power_ok = clean.rejection_rate >= noisy.rejection_rate - 3.0 * combined;

  auto null_cfg = sim_config(12, 0.0, 3.0, 20000, 779);
  null_cfg.method = stats::MethodChoice::Exact;
  const auto null_noisy = sim::run_cell(null_cfg);
  const bool null_ok = null_noisy.rejection_rate <= null_bound(null_cfg.reps);
  return {power_ok && null_ok,
          fmt("power tau=0 %.4f vs tau=3 %.4f (3 x combined se %.4f); null at tau=3 %.5f <= %.5f",
              clean.rejection_rate, noisy.rejection_rate, 3.0 * combined, null_noisy.rejection_rate,
              null_bound(null_cfg.reps))};
}

Outcome quality_fixtures() {
  using namespace quality;
  const auto& lex = Lexicons::builtin();
  bool ok = true;
  std::string notes;
  auto expect = [&](bool cond, const char* what) {
    if (!cond) notes += std::string(" failed: ") + what + ";";
    ok &= cond;
  };
  for (int round = 0; round < 2; ++round) {  // the second round checks determinism
    expect(!check_anecdotal("I can think more clearly!", lex).passed, "general statement fails anecdotal");
    expect(check_anecdotal("One morning, I noticed that he smiled when his favorite song came on.", lex).passed,
           "specific morning passes anecdotal");
    const auto composite = quality_report(
        "When I went to the store last week I was able to recall all four items I needed. Normally I need to check "
        "my list even if it's just one item",
        lex);
    expect(composite.anecdotal.passed && composite.comparison.passed, "composite passes anecdotal and comparison");
    const auto lopez = quality_report("Yesterday Dr. Lopez said he walked farther than usual", lex);
    expect(!lopez.pii_findings.empty() && !lopez.overall_pass, "Dr. Lopez fixture flagged and failing");
  }
  const auto a = to_json(quality_report("Maria smiled at Dr. Lopez", lex));
  const auto b = to_json(quality_report("Maria smiled at Dr. Lopez", lex));
  expect(a == b, "identical reports");
  return {ok, "four checklist fixtures under lexicon " + lex.version() + (notes.empty() ? "" : ":" + notes)};
}

Outcome blinding_contract() {
  const auto identities = blinding::identity_values(fixtures::golden_cohort());
  auto opened = fixtures::open_golden();
  std::size_t leaks = blinding::leaks(opened.session.to_json(), identities).size();
  leaks += blinding::leaks(opened.session.cards_json(), identities).size();
  opened.session.submit_ordering(fixtures::golden_tiers(opened.sealed), "chair-1");
  opened.session.finalize("chair-1");
  leaks += blinding::leaks(opened.session.to_json(), identities).size();
  leaks += blinding::leaks(opened.session.cards_json(), identities).size();
  // Sanity check on the checker: the sealed map must be caught.
  const bool checker_sees = !blinding::leaks(opened.sealed.to_json(), identities).empty();

  const auto before = opened.session.audit().size();
  opened.session.unblind(opened.sealed, fixtures::golden_arms(), "acceptance-analysis");
  const auto& audit = opened.session.audit();
  const bool logged = audit.size() == before + 1 && audit.back().action == panel::AuditAction::Unblinded &&
                      audit.back().detail.find("acceptance-analysis") != std::string::npos;
  return {leaks == 0 && checker_sees && logged,
          fmt("%zu identity leaks in open/finalized documents and card payloads; unblind audit event %s", leaks,
              logged ? "appended" : "MISSING")};
}

Outcome sensitivity_identities() {
  auto opened = fixtures::finalized_golden();
  const auto report = analysis::analyze(opened.session, opened.sealed, fixtures::golden_arms(), {}, "stored");
  // "Stored" means as read back from its document.
  const auto stored = analysis::analysis_report_from_json(analysis::to_json(report));
  const auto groups = panel::card_groups(opened.session, opened.sealed, fixtures::golden_arms());

  double spread = 0.0;
  for (auto method : {stats::MethodChoice::Auto, stats::MethodChoice::NormalApprox}) {
    stats::WilcoxonConfig cfg;
    cfg.method = method;
    const auto s = analysis::sensitivity(
        opened.session, groups, {analysis::Strategy::IntraGroupExchange, 1000, 4242, 1}, cfg);
    spread = std::max(spread, s.summary.max - s.summary.min);
    for (double p : s.perturbed_p) spread = std::max(spread, std::abs(p - s.base_p));
  }
  const auto w = analysis::what_if(opened.session, *opened.session.ordering(), groups, stored.options.stats);
  const bool identical = w.result == stored.result;
  return {spread == 0.0 && identical,
          fmt("intra-group exchange spread %.3g over 2 x 1000 perturbations; identity what-if %s stored analysis",
              spread, identical ? "equals" : "DIFFERS FROM")};
}

}  // namespace

int main() {
  std::printf("impact acceptance suite\n");
  criterion("golden worked example", 1, golden_example);
  criterion("exact test oracle equivalence", 60, exact_oracle);
  criterion("rank statistic invariants", 60, invariants);
  criterion("null calibration", 300, null_calibration);
  criterion("noise degrades power, not validity", 300, noise_power);
  criterion("quality checklist fixtures", 10, quality_fixtures);
  criterion("blinding contract", 10, blinding_contract);
  criterion("sensitivity identities", 10, sensitivity_identities);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures;
}
