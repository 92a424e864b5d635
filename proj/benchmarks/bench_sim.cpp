#include <prefnav/geom/scene.hpp>
#include <prefnav/perception/scan.hpp>
#include <prefnav/rng.hpp>

#include <benchmark/benchmark.h>

using namespace prefnav;

namespace {

geom::Scene bench_scene() {
  return geom::Scene("bench", {0, 0, 10, 6},
                     {{{4.9, 0}, {5.1, 0}, {5.1, 2.4}, {4.9, 2.4}}, {{1.8, 3.6}, {3.0, 3.6}, {3.0, 4.4}, {1.8, 4.4}}},
                     {{{2.4, 1.6}, 0.35}, {{7.0, 3.4}, 0.4}}, {});
}

void BM_Raycast(benchmark::State& state) {
  const auto scene = bench_scene();
  Rng rng(1);
  const geom::Pose2 at(uniform(rng, 0.5, 4.5), uniform(rng, 0.5, 5.5), 0.3);
  double angle = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(geom::raycast(scene, at, angle, 6.0));
    angle += 0.01;
  }
}
BENCHMARK(BM_Raycast);

void BM_RenderScan(benchmark::State& state) {
  const auto scene = bench_scene();
  const geom::Pose2 robot(1.0, 1.0, 0.2);
  const std::optional<geom::Pose2> human = geom::Pose2(3.0, 2.5, 0.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(perception::render_scan(scene, robot, human, 2.0 * geom::kPi / 3.0,
                                                     static_cast<int>(state.range(0))));
}
BENCHMARK(BM_RenderScan)->Arg(64)->Arg(256);

}  // namespace
