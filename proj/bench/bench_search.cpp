#include <benchmark/benchmark.h>

#include <vector>

#include "nlmc/builtin.hpp"
#include "nlmc/contraction.hpp"
#include "nlmc/detail/grid_search.hpp"
#include "nlmc/kernels.hpp"
#include "nlmc/measures.hpp"

namespace {

struct GridData {
  std::size_t points = 0;
  std::size_t m = 0;
  std::vector<double> laws;
  std::vector<double> q;
};

GridData make_grid(std::size_t denominator) {
  const auto k = nlmc::example2_kernel(0.4);
  GridData g;
  g.m = k.states();
  const auto grid = nlmc::simplex_grid(k.space(), denominator);
  g.points = grid.size();
  nlmc::Matrix scratch;
  for (const auto& mu : grid) {
    g.laws.insert(g.laws.end(), mu.vector().begin(), mu.vector().end());
    nlmc::k_step_into(k, mu.weights(), 2, scratch);
    g.q.insert(g.q.end(), scratch.a.begin(), scratch.a.end());
  }
  return g;
}

nlmc::Exec exec_of(const benchmark::State& state) {
  return state.range(1) == 0 ? nlmc::Exec::serial : nlmc::Exec::parallel;
}

void BM_GridAlpha(benchmark::State& state) {
  const auto g = make_grid(static_cast<std::size_t>(state.range(0)));
  const auto exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(nlmc::detail::grid_alpha_max(g.q, g.points, g.m, exec));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.points * g.points));
}

void BM_GridLambda(benchmark::State& state) {
  const auto g = make_grid(static_cast<std::size_t>(state.range(0)));
  const auto exec = exec_of(state);
  for (auto _ : state)
    benchmark::DoNotOptimize(nlmc::detail::grid_lambda_max(g.q, g.laws, g.points, g.m, 1e-9, exec));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.points * g.points));
}

void BM_TwoStepCertified(benchmark::State& state) {
  const auto k = nlmc::example2_kernel(0.4);
  nlmc::SearchConfig cfg;
  cfg.denominator = static_cast<std::size_t>(state.range(0));
  cfg.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(nlmc::coefficients_k_step(k, 2, cfg));
}

}  // namespace

BENCHMARK(BM_GridAlpha)->ArgsProduct({{10, 20}, {0, 1}})->ArgNames({"grid", "parallel"})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridLambda)->ArgsProduct({{10, 20}, {0, 1}})->ArgNames({"grid", "parallel"})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TwoStepCertified)
    ->ArgsProduct({{10, 20}, {0, 1}})
    ->ArgNames({"grid", "parallel"})
    ->Unit(benchmark::kMillisecond)
    ->Iterations(1);

BENCHMARK_MAIN();
