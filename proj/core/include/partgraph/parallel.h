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

#ifndef PARTGRAPH_PARALLEL_H_
#define PARTGRAPH_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace partgraph {

// Process-wide cap on worker threads used by parallel_for. Defaults to 1.
void set_thread_limit(int threads);
int thread_limit();

// Runs fn(i) for every i in [0, n) using up to thread_limit() threads.
// Iterations are statically partitioned; callers must write only to
// per-index slots and reduce afterwards in index order so that results do
// not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace partgraph

#endif  // PARTGRAPH_PARALLEL_H_
