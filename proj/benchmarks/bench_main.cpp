#include "impact/power_sim.hpp"
#include "impact/rank_stats.hpp"
#include "impact/random.hpp"

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

using namespace impact;

namespace {

void BM_ExactNullDistribution(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(stats::exact_null_distribution(n, n));
}
BENCHMARK(BM_ExactNullDistribution)->Arg(8)->Arg(12)->Arg(25);

stats::RankVector random_ranks(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> order(2 * n);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i + 1;
  rng.shuffle(std::span(order));
  std::vector<stats::RankEntry> entries;
  for (std::size_t i = 0; i < order.size(); ++i)
    entries.push_back({"p" + std::to_string(i), i < n ? stats::Group::A : stats::Group::B,
                       HalfInteger(static_cast<std::int64_t>(order[i]))});
  return stats::RankVector(entries);
}

void BM_Wilcoxon(benchmark::State& state) {
  const auto rv = random_ranks(static_cast<std::size_t>(state.range(0)), 11);
  stats::WilcoxonConfig cfg;
  cfg.method = state.range(1) ? stats::MethodChoice::Exact : stats::MethodChoice::NormalApprox;
  for (auto _ : state) benchmark::DoNotOptimize(stats::wilcoxon_from_ranks(rv, cfg));
}
BENCHMARK(BM_Wilcoxon)->Args({12, 0})->Args({12, 1})->Args({25, 1})->Args({200, 0});

void BM_SimulationCell(benchmark::State& state) {
  sim::SimConfig c;
  c.n_a = c.n_b = 12;
  c.delta = 1.0;
  c.panel_noise_sd = 1.0;
  c.reps = 1000;
  c.seed = 5;
  for (auto _ : state) benchmark::DoNotOptimize(sim::run_cell(c));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.reps));
}
BENCHMARK(BM_SimulationCell)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
