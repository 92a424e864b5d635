#include <prefnav/eval/frechet.hpp>
#include <prefnav/rng.hpp>

#include <benchmark/benchmark.h>

using namespace prefnav;

namespace {

std::vector<geom::Vec2> walk(Rng& rng, int n) {
  std::vector<geom::Vec2> p{{0, 0}};
  for (int i = 1; i < n; ++i) p.push_back({p.back().x + uniform(rng, 0, 0.1), p.back().y + uniform(rng, -0.05, 0.05)});
  return p;
}

void BM_DiscreteFrechet(benchmark::State& state) {
  Rng rng(1);
  const auto a = walk(rng, 150), b = walk(rng, 150);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(eval::discrete_frechet(a, b, n));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DiscreteFrechet)->RangeMultiplier(2)->Range(25, 400)->Complexity(benchmark::oNSquared);

void BM_DeviationAware(benchmark::State& state) {
  Rng rng(2);
  const auto a = walk(rng, 150), b = walk(rng, 120);
  for (auto _ : state) benchmark::DoNotOptimize(eval::deviation_aware_frechet(a, b));
}
BENCHMARK(BM_DeviationAware);

}  // namespace
