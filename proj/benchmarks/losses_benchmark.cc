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

#include <cmath>
#include <vector>

#include "partgraph/losses.h"
#include "partgraph/rng.h"
#include "partgraph/synth.h"

namespace partgraph {
namespace {

struct Fixture {
  Scene scene;
  ProbMap pred;
};

// A scene plus a random softmax prediction over its parts.
Fixture make_fixture(int n) {
  SceneSpec spec;
  spec.width = spec.height = n;
  Scene scene = generate(spec);
  const int c = scene.mapping.num_parts();
  Xorshift64Star rng(5);
  std::vector<double> probs(static_cast<std::size_t>(n) * n * c);
  for (std::size_t p = 0; p < probs.size(); p += c) {
    double sum = 0.0;
    for (int k = 0; k < c; ++k) sum += probs[p + k] = std::exp(rng.normal());
    for (int k = 0; k < c; ++k) probs[p + k] /= sum;
  }
  ProbMap pred(n, n, c, std::move(probs));
  return {std::move(scene), std::move(pred)};
}

void BM_CrossEntropy(benchmark::State& state) {
  const Fixture f = make_fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cross_entropy(f.pred, f.scene.parts));
}
BENCHMARK(BM_CrossEntropy)->Arg(32)->Arg(256);

void BM_ReconstructionLoss(benchmark::State& state) {
  const Fixture f = make_fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        reconstruction_loss(f.pred, f.scene.objects, f.scene.mapping));
  }
}
BENCHMARK(BM_ReconstructionLoss)->Arg(32)->Arg(256);

void BM_TotalLoss(benchmark::State& state) {
  const Fixture f = make_fixture(static_cast<int>(state.range(0)));
  const AdjacencyConfig cfg;
  const LossWeights weights;
  const AdjacencyMatrix gt =
      ground_truth_graph(f.scene.parts, f.scene.mapping.num_parts(), cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(total_loss(f.pred, f.scene.parts, f.scene.objects,
                                        f.scene.mapping, gt, cfg, weights));
  }
}
BENCHMARK(BM_TotalLoss)->Arg(32)->Arg(128);

}  // namespace
}  // namespace partgraph

BENCHMARK_MAIN();
