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

#include <vector>

#include "partgraph/condnet.h"
#include "partgraph/parallel.h"
#include "partgraph/rng.h"
#include "partgraph/synth.h"

namespace partgraph {
namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  Xorshift64Star rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

// Args: spatial size, channels (in = out), kernel.
void BM_Conv2dForward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int c = static_cast<int>(state.range(1));
  const int k = static_cast<int>(state.range(2));
  const Tensor x(c, n, n, random_values(static_cast<std::size_t>(c) * n * n, 1));
  const std::vector<double> w = random_values(static_cast<std::size_t>(c) * c * k * k, 2);
  const std::vector<double> b(c, 0.1);
  const ConvView conv{c, c, k, w, b};
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_forward(x, conv, 1));
  state.SetItemsProcessed(state.iterations() * 2LL * n * n * c * c * k * k);
}
BENCHMARK(BM_Conv2dForward)->Args({32, 8, 3})->Args({64, 16, 3})->Args({32, 8, 7});

void BM_Conv2dBackward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int c = static_cast<int>(state.range(1));
  const int k = static_cast<int>(state.range(2));
  const Tensor x(c, n, n, random_values(static_cast<std::size_t>(c) * n * n, 1));
  const Tensor g(c, n, n, random_values(static_cast<std::size_t>(c) * n * n, 3));
  const std::vector<double> w = random_values(static_cast<std::size_t>(c) * c * k * k, 2);
  const std::vector<double> b(c, 0.1);
  const ConvView conv{c, c, k, w, b};
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_backward(x, conv, 1, g));
}
BENCHMARK(BM_Conv2dBackward)->Args({32, 8, 3})->Args({64, 16, 3});

// One full-batch training step of the default toy network on default scenes.
// Arg: worker threads.
void BM_TrainStep(benchmark::State& state) {
  const std::vector<Scene> data = generate_batch(SceneSpec{}, 20);
  const ToyNetConfig net;
  TrainConfig cfg;
  cfg.steps = 1;
  set_thread_limit(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_toy(data, net, LossWeights{}, AdjacencyConfig{}, cfg));
  }
  set_thread_limit(1);
}
BENCHMARK(BM_TrainStep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace partgraph

BENCHMARK_MAIN();
