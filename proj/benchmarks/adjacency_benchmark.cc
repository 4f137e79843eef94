// Copyright 2026 The partgraph Authors. All Rights Reserved.
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


#include <benchmark/benchmark.h>

#include "partgraph/adjacency.h"
#include "partgraph/synth.h"

namespace partgraph {
namespace {

Scene scene_of_size(int n) {
  SceneSpec spec;
  spec.width = spec.height = n;
  spec.seed = 3;
  return generate(spec);
}

void BM_AdjacencyFromLabels(benchmark::State& state) {
  const Scene scene = scene_of_size(static_cast<int>(state.range(0)));
  AdjacencyConfig cfg;
  cfg.method = state.range(1) ? AdjacencyMethod::kExactDistance
                              : AdjacencyMethod::kDilateIntersect;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        adjacency_from_labels(scene.parts, scene.mapping.num_parts(), cfg));
  }
  state.SetItemsProcessed(state.iterations() * scene.parts.pixel_count());
}
BENCHMARK(BM_AdjacencyFromLabels)->ArgsProduct({{32, 128, 256}, {0, 1}});

void BM_SoftAdjacency(benchmark::State& state) {
  const Scene scene = scene_of_size(static_cast<int>(state.range(0)));
  const ProbMap pred = one_hot(scene.parts, scene.mapping.num_parts());
  AdjacencyConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(soft_adjacency(pred, cfg));
}
BENCHMARK(BM_SoftAdjacency)->Arg(32)->Arg(128);

void BM_GmLossAndGrad(benchmark::State& state) {
  const Scene scene = scene_of_size(static_cast<int>(state.range(0)));
  const int parts = scene.mapping.num_parts();
  const ProbMap pred = one_hot(scene.parts, parts);
  AdjacencyConfig cfg;
  cfg.soft.mode = state.range(1) ? DilationMode::kSmoothMax : DilationMode::kHardMax;
  const AdjacencyMatrix gt = normalize_rows(adjacency_from_labels(scene.parts, parts, cfg));
  for (auto _ : state) benchmark::DoNotOptimize(gm_loss_and_grad(pred, gt, cfg));
}
BENCHMARK(BM_GmLossAndGrad)->ArgsProduct({{32, 128}, {0, 1}});

}  // namespace
}  // namespace partgraph

BENCHMARK_MAIN();
