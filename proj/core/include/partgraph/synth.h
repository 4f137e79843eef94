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

// Deterministic synthetic part/object scenes.
//
// Every scene has a background (part 0, object 0) plus spec.num_objects
// foreground objects; object j (1-based) owns parts_per_object[j - 1]
// consecutive part indices. Objects are laid out left to right in
// equal-width columns separated by `separation` background pixels, in a
// seeded random order, with a one-pixel background margin at the left and
// right canvas edges.
//
//   stacked_rects  each object is a rectangle cut into horizontal bands, one
//                  per part, stacked top to bottom in part order, so parts
//                  form a chain and every band touches the background.
//   nested_blobs   each object is an ellipse cut into concentric shells, the
//                  outermost shell being the object's first part.
//
// All randomness comes from Xorshift64Star (see rng.h). Scene k of a batch
// uses derive_seed(spec.seed, k). Part mean colors come from a separate
// stream seeded with palette_seed so that colors identify part classes
// across scenes.

#ifndef PARTGRAPH_SYNTH_H_
#define PARTGRAPH_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "partgraph/segmap.h"
#include "partgraph/tensor.h"

namespace partgraph {

enum class SceneLayout { kStackedRects, kNestedBlobs };

SceneLayout parse_scene_layout(const std::string& name);
std::string to_string(SceneLayout layout);

struct SceneSpec {
  int width = 32;
  int height = 32;
  int num_objects = 3;
  std::vector<int> parts_per_object = {2, 2, 2};
  int min_instance = 16;  // minimum pixels per part
  SceneLayout layout = SceneLayout::kStackedRects;
  std::uint64_t seed = 0;

  int min_band_height = 5;  // stacked_rects band height floor
  int separation = 5;       // background pixels between object columns
  std::uint64_t palette_seed = 1;
  double noise = 0.05;  // std-dev of per-pixel color noise

  // Background plus all foreground parts.
  int num_parts() const;
  void validate() const;
};

SceneSpec parse_scene_spec(const std::string& json_text);
std::string scene_spec_to_json(const SceneSpec& spec);

struct Scene {
  LabelMap parts;
  LabelMap objects;
  PartsToObjectsMapping mapping;
  Tensor rgb;  // 3 x H x W, values in [0, 1]
};

PartsToObjectsMapping scene_mapping(const SceneSpec& spec);

// Throws DomainError when the requested layout cannot fit on the canvas.
Scene generate(const SceneSpec& spec);

// `count` scenes; scene k is generate() with seed derive_seed(spec.seed, k).
std::vector<Scene> generate_batch(const SceneSpec& spec, int count);

}  // namespace partgraph

#endif  // PARTGRAPH_SYNTH_H_
