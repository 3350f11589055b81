#include <benchmark/benchmark.h>

#include "vxae/adam.hpp"
#include "vxae/autograd.hpp"
#include "vxae/binvox.hpp"
#include "vxae/log.hpp"
#include "vxae/model.hpp"
#include "vxae/stl.hpp"
#include "vxae/voxelize.hpp"

namespace {

using namespace vxae;

void BM_VoxelizeIcosphere(benchmark::State& state) {
  const auto mesh = make_icosphere(4);
  const int dim = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(voxelize(mesh, dim));
  state.counters["triangles"] = static_cast<double>(mesh.size());
}
BENCHMARK(BM_VoxelizeIcosphere)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_VoxelizeOpenSurface(benchmark::State& state) {
  auto mesh = make_torus(1.0, 0.3, 64, 32);
  mesh.triangles.pop_back();
  log::set_level(log::Level::Error);  // one warning per call otherwise
  for (auto _ : state) benchmark::DoNotOptimize(voxelize(mesh, 64));
}
BENCHMARK(BM_VoxelizeOpenSurface)->Unit(benchmark::kMillisecond);

void BM_BinvoxRoundTrip(benchmark::State& state) {
  const auto grid = voxelize(make_torus(1.0, 0.3, 48, 24), 64);
  for (auto _ : state) benchmark::DoNotOptimize(read_binvox(write_binvox(grid)));
}
BENCHMARK(BM_BinvoxRoundTrip)->Unit(benchmark::kMicrosecond);

void BM_StlParseBinary(benchmark::State& state) {
  const auto bytes = write_stl_binary(make_icosphere(5));
  for (auto _ : state) benchmark::DoNotOptimize(parse_stl(bytes));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(bytes.size()));
}
BENCHMARK(BM_StlParseBinary)->Unit(benchmark::kMicrosecond);

// One optimizer step (forward, MSE, backward, Adam) at batch 8.
void train_step(benchmark::State& state, const char* model_name, int dim) {
  Autoencoder<float> model(build_model(model_name, dim), 1);
  const auto grid = voxelize(make_torus(1.0, 0.35, 48, 24), dim);
  std::vector<float> v;
  for (int n = 0; n < 8; ++n) v.insert(v.end(), grid.occupancy.begin(), grid.occupancy.end());
  const auto x = Tensor<float>::from_values({8, 1, dim, dim, dim}, v);
  AdamState<float> adam;
  auto params = model.params().trainable();
  std::uint64_t step = 0;
  for (auto _ : state) {
    model.params().zero_grad();
    const auto loss = mse_loss(model.forward(x, Mode::Train, step++).recon, x);
    backward(loss);
    adam_step<float>(params, adam);
  }
}
BENCHMARK_CAPTURE(train_step, residual_32, "residual", 32)->Unit(benchmark::kMillisecond)->Iterations(3);
BENCHMARK_CAPTURE(train_step, baseline_32, "baseline", 32)->Unit(benchmark::kMillisecond)->Iterations(3);
BENCHMARK_CAPTURE(train_step, residual_64, "residual", 64)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace
