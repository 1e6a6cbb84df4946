// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>

#include "dpsim/cost_volume.hpp"
#include "dpsim/psf_predictor.hpp"
#include "dpsim/renderer.hpp"

namespace {

using namespace dpsim;

const CameraRig& rig() {
  static const CameraRig r = [] {
    const SensorGeometry s{36.0, 24.0, 768, 512};
    return CameraRig(load_lens_file(std::filesystem::path(DPSIM_DATA_DIR) / "rf50.lens"), s,
                     DpPixelGeometry::calibrated_default(s.pitch()), RigSettings{});
  }();
  return r;
}

void BM_TraceDpPsf(benchmark::State& state) {
  const FrustumPoint p{0.4, -0.3, 0.6};
  for (auto _ : state) benchmark::DoNotOptimize(trace_dp_psf(rig(), p));
  state.SetItemsProcessed(state.iterations() * rig().n_rays());
}
BENCHMARK(BM_TraceDpPsf)->Unit(benchmark::kMillisecond);

void BM_MlpForwardBatch(benchmark::State& state) {
  const MlpWeights w = init_mlp(21, 1);
  std::vector<FrustumPoint> pts(static_cast<std::size_t>(state.range(0)), FrustumPoint{0.1, 0.2, 2.0});
  std::vector<float> out(pts.size() * 2 * 21 * 21);
  for (auto _ : state) {
    predict_kernels(w, rig().settings(), pts, out);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForwardBatch)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_RenderDp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0)), ks = 21;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Image aif = Image::zeros(n, n, 3);
  for (double& v : aif.data) v = u(rng);
  PsfMap map;
  map.width = n;
  map.height = n;
  map.ks = ks;
  map.kernels.resize(static_cast<std::size_t>(n) * n * 2 * ks * ks);
  for (float& v : map.kernels) v = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(render_dp(aif, map));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_RenderDp)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_CostVolume(benchmark::State& state) {
  Tensor x = Tensor::zeros({1, 16, 64, 96}), y = Tensor::zeros({1, 16, 64, 96});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  for (float& v : x.data) v = u(rng);
  for (float& v : y.data) v = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(dp_cost_volume(x, y, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_CostVolume)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
