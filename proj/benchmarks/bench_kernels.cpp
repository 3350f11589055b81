#include <benchmark/benchmark.h>

#include "vxae/autograd.hpp"
#include "vxae/ops.hpp"
#include "vxae/rng.hpp"

namespace {

using namespace vxae;

Tensor<float> random(Shape shape, std::uint64_t seed, bool grad = false) {
  Rng rng(seed);
  std::vector<float> v(static_cast<std::size_t>(shape_numel(shape)));
  for (auto& x : v) x = static_cast<float>(rng.uniform() - 0.5);
  return Tensor<float>::from_values(std::move(shape), std::move(v), grad);
}

// Args: channels in, channels out, spatial side, stride.
void BM_Conv3dForward(benchmark::State& state) {
  const int ci = state.range(0), co = state.range(1), d = state.range(2), s = state.range(3);
  const auto x = random({8, ci, d, d, d}, 1), w = random({co, ci, 3, 3, 3}, 2), b = random({co}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(conv3d(x, w, b, s, 1));
  state.SetItemsProcessed(state.iterations() * 8 * ci * co * 27 * (d / s) * (d / s) * (d / s));
}
BENCHMARK(BM_Conv3dForward)->Args({1, 4, 32, 1})->Args({4, 4, 32, 1})->Args({8, 16, 16, 1})->Args({32, 32, 4, 1})
    ->Args({1, 8, 32, 2})->Unit(benchmark::kMillisecond);

void BM_Conv3dBackward(benchmark::State& state) {
  const int ci = state.range(0), co = state.range(1), d = state.range(2);
  const auto x = random({8, ci, d, d, d}, 1, true), w = random({co, ci, 3, 3, 3}, 2, true);
  for (auto _ : state) {
    x.impl()->grad.clear();
    w.impl()->grad.clear();
    backward(sum(conv3d(x, w, {}, 1, 1)));
  }
}
BENCHMARK(BM_Conv3dBackward)->Args({4, 4, 32})->Args({8, 16, 16})->Unit(benchmark::kMillisecond);

void BM_Conv3dTransposeForward(benchmark::State& state) {
  const int ci = state.range(0), co = state.range(1), d = state.range(2), k = state.range(3);
  const auto x = random({8, ci, d, d, d}, 1), w = random({ci, co, k, k, k}, 2);
  const int p = k == 3 ? 1 : 0, op = k == 3 ? 1 : 0;
  for (auto _ : state) benchmark::DoNotOptimize(conv3d_transpose(x, w, {}, 2, p, op));
}
BENCHMARK(BM_Conv3dTransposeForward)->Args({8, 8, 16, 3})->Args({16, 8, 8, 2})->Args({4, 4, 16, 2})
    ->Unit(benchmark::kMillisecond);

void BM_DepthwiseConv3d(benchmark::State& state) {
  const int c = state.range(0), d = state.range(1), s = state.range(2);
  const auto x = random({8, c, d, d, d}, 1), w = random({c, 1, 3, 3, 3}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(depthwise_conv3d(x, w, s, 1));
}
BENCHMARK(BM_DepthwiseConv3d)->Args({32, 16, 1})->Args({64, 16, 2})->Args({128, 4, 1})->Unit(benchmark::kMillisecond);

void BM_PointwiseConv3d(benchmark::State& state) {
  const int ci = state.range(0), co = state.range(1), d = state.range(2);
  const auto x = random({8, ci, d, d, d}, 1), w = random({co, ci, 1, 1, 1}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(pointwise_conv3d(x, w));
}
BENCHMARK(BM_PointwiseConv3d)->Args({8, 32, 16})->Args({32, 8, 16})->Args({96, 24, 8})->Unit(benchmark::kMillisecond);

void BM_BatchNormTrain(benchmark::State& state) {
  const auto x = random({8, 32, 16, 16, 16}, 1);
  auto g = Tensor<float>::full({32}, 1.0f), b = Tensor<float>::zeros({32});
  auto m = Tensor<float>::zeros({32}), v = Tensor<float>::full({32}, 1.0f);
  for (auto _ : state) benchmark::DoNotOptimize(batch_norm(x, g, b, m, v, Mode::Train));
}
BENCHMARK(BM_BatchNormTrain)->Unit(benchmark::kMillisecond);

}  // namespace
