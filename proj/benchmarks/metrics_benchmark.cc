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

#include "partgraph/metrics.h"
#include "partgraph/synth.h"

namespace partgraph {
namespace {

void BM_ConfusionAndReport(benchmark::State& state) {
  SceneSpec spec;
  spec.width = spec.height = static_cast<int>(state.range(0));
  const Scene gt = generate(spec);
  spec.seed = 1;
  const Scene pred = generate(spec);
  const int parts = gt.mapping.num_parts();
  const LabelSet labels(gt.mapping);
  for (auto _ : state) {
    benchmark::DoNotOptimize(report(confusion(pred.parts, gt.parts, parts), labels));
  }
  state.SetItemsProcessed(state.iterations() * gt.parts.pixel_count());
}
BENCHMARK(BM_ConfusionAndReport)->Arg(64)->Arg(512);

}  // namespace
}  // namespace partgraph

BENCHMARK_MAIN();
