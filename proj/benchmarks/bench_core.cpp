#include <benchmark/benchmark.h>

#include "idt/constructions.hpp"
#include "idt/estimators.hpp"

namespace {

using namespace idt;

void BM_Sample(benchmark::State& state) {
  const auto dist = optimal_lower(0.05, 1.0).distribution;
  const std::size_t m = state.range(0);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dist.sample(seed++, m));
  }
  state.SetItemsProcessed(state.iterations() * m);
}
BENCHMARK(BM_Sample)->Arg(1024)->Arg(65536);

void BM_AnalyticRisk(benchmark::State& state) {
  const auto bundle = suboptimal_lower(1.0 / 16.0, 0.1);
  const auto& rule = bundle.stated_rules[1];
  for (auto _ : state) {
    benchmark::DoNotOptimize(risk(bundle.distribution, bundle.candidate_c[1], rule));
  }
}
BENCHMARK(BM_AnalyticRisk);

void BM_OptimalInClass(benchmark::State& state) {
  const auto bundle = suboptimal_lower(1.0 / 16.0, 0.1);
  const auto& fam = std::get<ExplicitFamily>(*bundle.family);
  const auto& cls = fam.classes[1].second;
  double c = 0.51;
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimal_in_class(bundle.distribution, cls, c));
    c = c < 0.7 ? c + 1e-4 : 0.51;
  }
}
BENCHMARK(BM_OptimalInClass);

void BM_EstimateOptimal(benchmark::State& state) {
  const auto dist = optimal_lower(0.05, 1.0).distribution;
  const Agent agent = OptimalBayesAgent{0.45};
  const std::size_t m = state.range(0);
  const DecisionLog log = generate_log(agent, dist, m, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_optimal(dist, log));
  }
  state.SetItemsProcessed(state.iterations() * m);
}
BENCHMARK(BM_EstimateOptimal)->Arg(1024)->Arg(65536);

void BM_EstimateKnownClass(benchmark::State& state) {
  const auto bundle = md_unsmooth_instance(0.05);
  const auto& fam = std::get<ExplicitFamily>(*bundle.family);
  const DecisionLog log = generate_log(bundle.agents[0], bundle.distribution, state.range(0), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_known_class(bundle.distribution, fam.classes[0].second, log));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EstimateKnownClass)->Arg(1024)->Arg(16384);

}  // namespace

BENCHMARK_MAIN();
