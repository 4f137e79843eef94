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

#include "partgraph/morphology.h"
#include "partgraph/rng.h"

namespace partgraph {
namespace {

BinaryMask random_mask(int n, double density) {
  Xorshift64Star rng(11);
  BinaryMask mask(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) mask.set(x, y, rng.uniform() < density);
  }
  return mask;
}

Plane random_plane(int n) {
  Xorshift64Star rng(12);
  Plane p{n, n, std::vector<double>(static_cast<std::size_t>(n) * n)};
  for (double& v : p.values) v = rng.uniform();
  return p;
}

void BM_BinaryDilate(benchmark::State& state) {
  const BinaryMask mask = random_mask(static_cast<int>(state.range(0)), 0.05);
  const StructuringElement elem{ElementShape::kSquare,
                                static_cast<int>(state.range(1))};
  for (auto _ : state) benchmark::DoNotOptimize(dilate(mask, elem));
  state.SetItemsProcessed(state.iterations() * mask.pixel_count());
}
BENCHMARK(BM_BinaryDilate)->ArgsProduct({{64, 256, 512}, {1, 2, 4}});

void BM_SoftDilate(benchmark::State& state) {
  const Plane field = random_plane(static_cast<int>(state.range(0)));
  const StructuringElement elem{ElementShape::kSquare, 2};
  const SoftDilation soft{state.range(1) ? DilationMode::kSmoothMax
                                         : DilationMode::kHardMax,
                          20.0};
  for (auto _ : state) benchmark::DoNotOptimize(soft_dilate(field, elem, soft));
  state.SetItemsProcessed(state.iterations() * field.values.size());
}
BENCHMARK(BM_SoftDilate)->ArgsProduct({{64, 256}, {0, 1}});

void BM_SoftDilateBackward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Plane field = random_plane(n);
  const Plane grad = random_plane(n);
  const StructuringElement elem{ElementShape::kSquare, 2};
  const SoftDilation soft{state.range(1) ? DilationMode::kSmoothMax
                                         : DilationMode::kHardMax,
                          20.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(soft_dilate_backward(field, elem, soft, grad));
  }
}
BENCHMARK(BM_SoftDilateBackward)->ArgsProduct({{64, 256}, {0, 1}});

}  // namespace
}  // namespace partgraph

BENCHMARK_MAIN();
