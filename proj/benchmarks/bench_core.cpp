#include <benchmark/benchmark.h>

#include <vector>

#include "lexsimp/binning.hpp"
#include "lexsimp/network.hpp"
#include "lexsimp/random.hpp"

namespace {

using namespace lexsimp;

void BM_BinTransform(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto bins = FeatureBins::make(0.0, 10.0, k, 0.2);
  std::vector<double> out(static_cast<std::size_t>(k));
  Rng rng(1);
  std::vector<double> values(1024);
  for (auto& v : values) v = rng.uniform(-2.0, 12.0);
  std::size_t i = 0;
  for (auto _ : state) {
    bins.transform(values[i++ & 1023], out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_BinTransform)->Arg(5)->Arg(10)->Arg(20);

void BM_Forward(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto net = Network::init(dim, 1);
  Rng rng(2);
  std::vector<double> x(dim);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Forward)->Arg(30)->Arg(150)->Arg(1000);

void BM_ForwardBackward(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto net = Network::init(dim, 1);
  Rng rng(3);
  std::vector<double> x(dim);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  const auto mask = DropoutMask::sample(rng, 0.2);
  std::vector<double> grad(net.param_count());
  ForwardCache cache;
  for (auto _ : state) {
    const double y = net.forward(x, &mask, cache);
    net.backward(cache, &mask, 2.0 * (y - 0.5), grad);
    benchmark::DoNotOptimize(grad.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ForwardBackward)->Arg(30)->Arg(150)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
