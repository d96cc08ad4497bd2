#include "impact/power_sim.hpp"

#include "impact/error.hpp"
#include "impact/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace impact::sim {
namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(errc::kInvalidArgument, "simulation config: " + what); }

TrialOutcome run_trial(const SimConfig& config, std::uint64_t rep_seed, const stats::ExactNullDistribution* exact) {
  Rng rng(rep_seed);
  const std::size_t n = config.n_a + config.n_b;
  std::vector<double> observed(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double base =
        config.family == EffectFamily::LocationShiftNormal ? rng.standard_normal() : rng.standard_logistic();
    const double latent = base + (i < config.n_a ? config.delta : 0.0);
    // Noise is always drawn so runs that differ only in noise_sd share latents.
    const double noise = rng.standard_normal();
    double obs = latent + config.panel_noise_sd * noise;
    if (config.tie_policy.kind == TiePolicy::Kind::RoundToGrid)
      obs = std::round(obs / config.tie_policy.step) * config.tie_policy.step;
    observed[i] = obs;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return observed[x] < observed[y]; });
  std::vector<stats::RankEntry> entries(n);
  for (std::size_t p = 0; p < n;) {
    std::size_t q = p + 1;
    while (q < n && observed[order[q]] == observed[order[p]]) ++q;
    const auto rank = HalfInteger::from_halves(static_cast<std::int64_t>(p + q + 1));  // (p+1 + q)/2
    for (std::size_t k = p; k < q; ++k) {
      const auto idx = order[k];
      entries[idx] = {std::string(), idx < config.n_a ? stats::Group::A : stats::Group::B, rank};
    }
    p = q;
  }

  const stats::RankVector rv(std::move(entries));
  TrialOutcome out;
  try {
    const auto r = stats::wilcoxon_from_ranks(rv, config.wilcoxon(), exact);
    out.p_value = r.p_value;
    out.relative_effect_a = r.relative_effect_a;
  } catch (const Error& e) {
    if (e.code() != errc::kDegenerateDistribution) throw;
    out.degenerate = true;
  }
  return out;
}

std::optional<stats::ExactNullDistribution> exact_for(const SimConfig& c) {
  if (c.method == stats::MethodChoice::NormalApprox || c.n_a > c.exact_cap || c.n_b > c.exact_cap)
    return std::nullopt;
  return stats::exact_null_distribution(c.n_a, c.n_b, c.exact_cap);
}

}  // namespace

std::string_view to_string(EffectFamily f) {
  return f == EffectFamily::LocationShiftNormal ? "normal" : "logistic";
}

std::optional<EffectFamily> parse_family(std::string_view text) {
  if (text == "normal") return EffectFamily::LocationShiftNormal;
  if (text == "logistic") return EffectFamily::LocationShiftLogistic;
  return std::nullopt;
}

void validate(const SimConfig& c) {
  if (c.n_a < 1 || c.n_b < 1) invalid("n_a and n_b must be at least 1");
  if (c.reps < 1) invalid("reps must be at least 1");
  if (!std::isfinite(c.delta)) invalid("delta must be finite");
  if (!(c.panel_noise_sd >= 0.0) || !std::isfinite(c.panel_noise_sd)) invalid("noise_sd must be >= 0");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) invalid("alpha must lie in (0, 1)");
  if (c.tie_policy.kind == TiePolicy::Kind::RoundToGrid) {
    if (!(c.tie_policy.step > 0.0) || !std::isfinite(c.tie_policy.step)) invalid("tie_step must be > 0");
    if (c.method == stats::MethodChoice::Exact) invalid("the exact method cannot be forced when ties are generated");
  }
  if (c.method == stats::MethodChoice::Exact && (c.n_a > c.exact_cap || c.n_b > c.exact_cap))
    invalid("exact method requested above exact_cap");
}

TrialOutcome simulate_trial(const SimConfig& config, std::uint64_t rep_seed) {
  validate(config);
  const auto exact = exact_for(config);
  return run_trial(config, rep_seed, exact ? &*exact : nullptr);
}

SimResult run_cell(const SimConfig& config, unsigned threads) {
  validate(config);
  const auto exact = exact_for(config);
  const auto* dist = exact ? &*exact : nullptr;

  std::vector<TrialOutcome> outcomes(config.reps);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) outcomes[i] = run_trial(config, derive_seed(config.seed, i), dist);
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(config.reps)));
  if (threads == 1) {
    work(0, config.reps);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (config.reps + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(config.reps, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }

  SimResult r;
  r.config = config;
  r.reps_used = config.reps;
  std::size_t rejections = 0;
  double sum = 0.0;
  for (const auto& o : outcomes) {
    if (o.degenerate) ++r.degenerate_reps;
    if (!o.degenerate && o.p_value <= config.alpha) ++rejections;
    sum += o.relative_effect_a;
  }
  const double reps = static_cast<double>(config.reps);
  r.rejection_rate = static_cast<double>(rejections) / reps;
  r.mc_stderr = std::sqrt(r.rejection_rate * (1.0 - r.rejection_rate) / reps);
  r.mean_relative_effect = sum / reps;
  if (config.reps > 1) {
    double ss = 0.0;
    for (const auto& o : outcomes) ss += (o.relative_effect_a - r.mean_relative_effect) * (o.relative_effect_a - r.mean_relative_effect);
    r.relative_effect_stderr = std::sqrt(ss / (reps - 1.0) / reps);
  }
  return r;
}

std::vector<SimResult> operating_characteristics(std::span<const SimConfig> grid, unsigned threads) {
  if (grid.empty()) throw Error(errc::kInvalidArgument, "simulation grid is empty");
  std::vector<SimResult> out;
  out.reserve(grid.size());
  for (const auto& cell : grid) out.push_back(run_cell(cell, threads));
  return out;
}

}  // namespace impact::sim
