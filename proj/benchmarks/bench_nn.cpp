#include <prefnav/nn/gru.hpp>
#include <prefnav/nn/mlp.hpp>

#include <benchmark/benchmark.h>

using namespace prefnav;
using nn::Activation;

namespace {

// Actor-sized network (13 -> 256 -> 256 -> 2) on a batch of state.range(0).
void BM_MlpForwardBackward(benchmark::State& state) {
  Rng rng(1);
  nn::Mlp net = nn::Mlp::make(13, {256, 256}, 2, Activation::kRelu, Activation::kTanh, rng);
  const nn::Matrix x = nn::Matrix::Random(13, state.range(0));
  const nn::Matrix g = nn::Matrix::Ones(2, state.range(0));
  for (auto _ : state) {
    net.zero_grad();
    benchmark::DoNotOptimize(net.forward(x));
    benchmark::DoNotOptimize(net.backward(g));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForwardBackward)->Arg(1)->Arg(64)->Arg(256);

void BM_MlpPredictSingle(benchmark::State& state) {
  Rng rng(2);
  const nn::Mlp net = nn::Mlp::make(13, {256, 256}, 2, Activation::kRelu, Activation::kTanh, rng);
  const nn::Matrix x = nn::Matrix::Random(13, 1);
  for (auto _ : state) benchmark::DoNotOptimize(net.predict(x));
}
BENCHMARK(BM_MlpPredictSingle);

}  // namespace
