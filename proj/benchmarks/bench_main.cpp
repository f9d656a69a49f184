#include <benchmark/benchmark.h>

#include <random>

#include "qmorse/flow.hpp"
#include "qmorse/hyperkahler.hpp"
#include "qmorse/poincare.hpp"
#include "qmorse/quiver.hpp"
#include "qmorse/strata.hpp"

using namespace qmorse;

namespace {

const char* const kNames[] = {"a2", "jordan", "two-loop"};

void BM_Flow(benchmark::State& state) {
  const auto d = builtin::by_name(kNames[state.range(0)]);
  std::mt19937_64 rng(1);
  const auto A0 = random_representation(d.quiver, d.dims, rng);
  std::size_t steps = 0;
  for (auto _ : state) {
    const auto r = integrate_flow(d.quiver, A0, d.alpha, FlowConfig{});
    steps = r.accepted_steps;
    benchmark::DoNotOptimize(r.f);
  }
  state.SetLabel(kNames[state.range(0)]);
  state.counters["steps"] = static_cast<double>(steps);
}
BENCHMARK(BM_Flow)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_FlowStar(benchmark::State& state) {
  std::vector<int> dims(static_cast<std::size_t>(state.range(0)), 2);
  std::vector<bool> orient(dims.size(), true);
  const auto d = builtin::star(dims, orient);
  std::mt19937_64 rng(2);
  const auto A0 = random_representation(d.quiver, d.dims, rng);
  for (auto _ : state) benchmark::DoNotOptimize(integrate_flow(d.quiver, A0, d.alpha, FlowConfig{}).f);
}
BENCHMARK(BM_FlowStar)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

void BM_GroupFlow(benchmark::State& state) {
  const auto d = builtin::two_loop();
  std::mt19937_64 rng(3);
  const auto A0 = random_representation(d.quiver, d.dims, rng);
  for (auto _ : state) benchmark::DoNotOptimize(integrate_group_flow(d.quiver, A0, d.alpha, FlowConfig{}).max_drift);
}
BENCHMARK(BM_GroupFlow)->Unit(benchmark::kMillisecond);

void BM_EnumerateStar(benchmark::State& state) {
  std::vector<int> dims(static_cast<std::size_t>(state.range(0)), 2);
  std::vector<bool> orient;
  for (std::size_t i = 0; i < dims.size(); ++i) orient.push_back(i % 2 == 0);
  const auto d = builtin::star(dims, orient);
  std::size_t count = 0;
  for (auto _ : state) {
    count = enumerate_hn_types(d.quiver, d.dims, d.alpha).size();
    benchmark::DoNotOptimize(count);
  }
  state.counters["types"] = static_cast<double>(count);
}
BENCHMARK(BM_EnumerateStar)->DenseRange(1, 4);

void BM_EnumerateRandom(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<std::string> names;
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
  for (int i = 0; i + 1 < n; ++i) edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(i + 1)});
  const Quiver q(names, edges);
  const DimVector v(std::vector<int>(static_cast<std::size_t>(n), 2));
  std::vector<Rational> a;
  for (int i = 0; i < n; ++i) a.push_back(Rational(n - 1 - 2 * i));
  const auto alpha = StabilityParam::trace_free(a, v);
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_hn_types(q, v, alpha).size());
}
BENCHMARK(BM_EnumerateRandom)->DenseRange(2, 4);

void BM_Poincare(benchmark::State& state) {
  std::vector<int> dims(static_cast<std::size_t>(state.range(0)), 2);
  std::vector<bool> orient;
  for (std::size_t i = 0; i < dims.size(); ++i) orient.push_back(i % 2 == 0);
  const auto d = builtin::star(dims, orient);
  const bool memo = state.range(1) != 0;
  for (auto _ : state) {
    PoincareSolver solver(d.quiver, memo);
    benchmark::DoNotOptimize(solver.semistable(d.dims, d.alpha, 20));
  }
  state.SetLabel(memo ? "memo" : "no-memo");
}
BENCHMARK(BM_Poincare)->ArgsProduct({{1, 2, 3, 4}, {0, 1}});

void BM_PoincareTwoLoop(benchmark::State& state) {
  const auto d = builtin::two_loop();
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(poincare_semistable(d.quiver, d.dims, d.alpha, n));
}
BENCHMARK(BM_PoincareTwoLoop)->RangeMultiplier(2)->Range(8, 64);

void BM_HomSpace(benchmark::State& state) {
  const auto d = builtin::two_loop();
  std::mt19937_64 rng(5);
  const auto B = random_representation(d.quiver, d.dims, rng);
  const auto C = act(d.quiver, random_invertible(d.dims, rng), B);
  for (auto _ : state) benchmark::DoNotOptimize(hom_space(d.quiver, B, C).dimension());
}
BENCHMARK(BM_HomSpace);

}  // namespace

BENCHMARK_MAIN();
