// Copyright 2026 The FoveaParse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <vector>

#include <benchmark/benchmark.h>

#include "fovea/crf.hpp"
#include "fovea/perspective.hpp"
#include "fovea/synth.hpp"

namespace {

using namespace fovea;

// One synthetic scene at the requested size with oracle scores and a V map.
struct Workload {
  Scene scene;
  ScoreMap unary;
  PerspectiveHeatmap v;
  ClassTable table;

  explicit Workload(int size) {
    SceneSpec spec = SceneSpec::defaults();
    spec.width = spec.height = size;
    spec.vanishing_x = spec.vanishing_y = size / 2.0;
    spec.ray_scale = 0.4 * size;
    spec.rng_seed = 17;
    scene = generate_scene(spec);
    const std::vector<InstanceSet> sets{scene.instances};
    table = compute_average_sizes(sets, scene_class_table(spec));
    const PerspectiveHeatmap h = heatmap_h(scene.instances, table, {});
    v = heatmap_v(h, h, 1.0);
    unary = unary_from_scores(
        ScaleOracle(spec, OracleConfig{}).classify(scene.gt, scene.instances, 1.0));
  }
};

void BM_MeanFieldBlocked(benchmark::State& state) {
  const Workload w(static_cast<int>(state.range(0)));
  const auto features = pixel_features(w.scene.image);
  CrfParams p;
  p.iterations = 5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mean_field(w.unary, features, w.scene.boxes, w.v, p));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(w.unary.pixel_count()));
}
BENCHMARK(BM_MeanFieldBlocked)->Arg(32)->Arg(64)->Arg(96)->Unit(benchmark::kMillisecond);

// A non-zero fallback couples every pair, so this is the O(N^2) reference.
void BM_MeanFieldDense(benchmark::State& state) {
  const Workload w(static_cast<int>(state.range(0)));
  const auto features = pixel_features(w.scene.image);
  CrfParams p;
  p.iterations = 5;
  p.mu_fallback = 1e-3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mean_field(w.unary, features, w.scene.boxes, w.v, p));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(w.unary.pixel_count()));
}
BENCHMARK(BM_MeanFieldDense)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_LocateFovea(benchmark::State& state) {
  const Workload w(static_cast<int>(state.range(0)));
  const int stride = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(locate_fovea(w.v, 0.5, 0.5, stride));
  }
}
BENCHMARK(BM_LocateFovea)->Args({96, 1})->Args({96, 4})->Args({256, 1})->Args({256, 4});

void BM_HeatmapH(benchmark::State& state) {
  const Workload w(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(heatmap_h(w.scene.instances, w.table, {}));
  }
}
BENCHMARK(BM_HeatmapH)->Arg(96)->Arg(256);

void BM_GenerateScene(benchmark::State& state) {
  SceneSpec spec = SceneSpec::defaults();
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_scene(spec));
    ++spec.rng_seed;
  }
}
BENCHMARK(BM_GenerateScene);

}  // namespace

BENCHMARK_MAIN();
