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

#include "partgraph/synth.h"

#include <vector>

#include <gtest/gtest.h>

#include "partgraph/adjacency.h"
#include "partgraph/errors.h"
#include "partgraph/rng.h"

namespace partgraph {
namespace {

AdjacencyMatrix exact_graph(const Scene& s, int threshold) {
  AdjacencyConfig cfg;
  cfg.threshold = threshold;
  cfg.method = AdjacencyMethod::kExactDistance;
  return adjacency_from_labels(s.parts, s.mapping.num_parts(), cfg);
}

std::vector<std::size_t> part_sizes(const Scene& s) {
  std::vector<std::size_t> n(s.mapping.num_parts(), 0);
  for (std::size_t p = 0; p < s.parts.pixel_count(); ++p) ++n[s.parts[p]];
  return n;
}

TEST(SceneSpecTest, DefaultsAndValidation) {
  SceneSpec spec;
  EXPECT_EQ(spec.num_parts(), 7);
  EXPECT_NO_THROW(spec.validate());
  SceneSpec bad = spec;
  bad.width = 7;
  EXPECT_THROW(bad.validate(), DomainError);
  bad = spec;
  bad.parts_per_object = {2, 2};
  EXPECT_THROW(bad.validate(), DomainError);
  bad = spec;
  bad.parts_per_object = {2, 0, 2};
  EXPECT_THROW(bad.validate(), DomainError);
}

TEST(SceneSpecTest, JsonRoundTrip) {
  SceneSpec spec;
  spec.width = 40;
  spec.layout = SceneLayout::kNestedBlobs;
  spec.seed = 12345678901234ull;
  spec.parts_per_object = {1, 3, 2};
  const SceneSpec back = parse_scene_spec(scene_spec_to_json(spec));
  EXPECT_EQ(back.width, 40);
  EXPECT_EQ(back.layout, SceneLayout::kNestedBlobs);
  EXPECT_EQ(back.seed, spec.seed);
  EXPECT_EQ(back.parts_per_object, spec.parts_per_object);
  EXPECT_EQ(back.noise, spec.noise);
  EXPECT_THROW(parse_scene_spec("{\"layout\": \"spiral\"}"), DomainError);
  EXPECT_THROW(parse_scene_spec("[1, 2"), FormatError);
}

TEST(SceneMappingTest, BackgroundThenContiguousObjects) {
  SceneSpec spec;
  spec.parts_per_object = {1, 3, 2};
  EXPECT_EQ(scene_mapping(spec).boundaries(), (std::vector<int>{0, 1, 2, 5, 7}));
}

TEST(GenerateTest, SinglePartOnlyTouchesBackground) {
  SceneSpec spec;
  spec.num_objects = 1;
  spec.parts_per_object = {1};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    spec.seed = seed;
    const Scene s = generate(spec);
    for (auto method :
         {AdjacencyMethod::kDilateIntersect, AdjacencyMethod::kExactDistance}) {
      AdjacencyConfig cfg;
      cfg.method = method;
      const AdjacencyMatrix m = adjacency_from_labels(s.parts, 2, cfg);
      EXPECT_GT(m(0, 1), 0.0);
      EXPECT_GT(m(1, 0), 0.0);
    }
  }
}

TEST(GenerateTest, StackedBandsFormAChain) {
  SceneSpec spec;
  spec.num_objects = 1;
  spec.parts_per_object = {3};
  spec.min_band_height = 6;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    spec.seed = seed;
    const AdjacencyMatrix m = exact_graph(generate(spec), 4);
    EXPECT_GT(m(1, 2), 0.0);
    EXPECT_GT(m(2, 3), 0.0);
    EXPECT_EQ(m(1, 3), 0.0);
    EXPECT_EQ(m(3, 1), 0.0);
  }
}

TEST(GenerateTest, MultiObjectGraphIsUnionOfChains) {
  SceneSpec spec;  // three objects of two parts, 5 px apart
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    spec.seed = seed;
    const Scene s = generate(spec);
    const AdjacencyMatrix m = exact_graph(s, 4);
    for (int i = 1; i < 7; ++i) {
      EXPECT_GT(m(0, i), 0.0) << "part " << i << " misses the background";
      for (int j = 1; j < 7; ++j) {
        if (i == j) continue;
        const bool same_object = s.mapping.object_of(i) == s.mapping.object_of(j);
        EXPECT_EQ(m(i, j) > 0.0, same_object) << i << "," << j;
      }
    }
  }
}

TEST(GenerateTest, InvariantsHoldForBothLayouts) {
  for (auto layout : {SceneLayout::kStackedRects, SceneLayout::kNestedBlobs}) {
    SceneSpec spec;
    spec.layout = layout;
    spec.width = 48;
    spec.height = 40;
    spec.parts_per_object = {1, 2, 3};
    for (const Scene& s : generate_batch(spec, 8)) {
      EXPECT_EQ(project_labels(s.parts, s.mapping), s.objects);
      for (std::size_t n : part_sizes(s)) {
        EXPECT_GE(n, static_cast<std::size_t>(spec.min_instance));
      }
      EXPECT_EQ(s.rgb.channels(), 3);
      EXPECT_EQ(s.rgb.height(), 40);
      EXPECT_EQ(s.rgb.width(), 48);
      for (double v : s.rgb.values()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
    }
  }
}

TEST(GenerateTest, SameSeedIsBitIdentical) {
  SceneSpec spec;
  spec.seed = 77;
  const Scene a = generate(spec);
  const Scene b = generate(spec);
  EXPECT_EQ(a.parts, b.parts);
  EXPECT_EQ(a.objects, b.objects);
  EXPECT_EQ(a.rgb, b.rgb);
  spec.seed = 78;
  EXPECT_NE(generate(spec).parts, a.parts);
}

TEST(GenerateTest, BatchUsesDerivedSeeds) {
  SceneSpec spec;
  spec.seed = 3;
  const auto batch = generate_batch(spec, 3);
  SceneSpec one = spec;
  one.seed = derive_seed(3, 2);
  EXPECT_EQ(batch[2].parts, generate(one).parts);
  EXPECT_EQ(batch[2].rgb, generate(one).rgb);
}

TEST(GenerateTest, PartColorsAreStableAcrossScenes) {
  SceneSpec spec;
  spec.noise = 0.0;
  const auto batch = generate_batch(spec, 4);
  std::vector<double> color(7 * 3, -1.0);
  for (const Scene& s : batch) {
    for (std::size_t p = 0; p < s.parts.pixel_count(); ++p) {
      const int part = s.parts[p];
      for (int c = 0; c < 3; ++c) {
        const double v = s.rgb.values()[c * s.rgb.plane_size() + p];
        if (color[part * 3 + c] < 0.0) color[part * 3 + c] = v;
        EXPECT_EQ(v, color[part * 3 + c]);
      }
    }
  }
}

TEST(GenerateTest, InfeasibleLayoutIsSizingError) {
  SceneSpec spec;
  spec.width = 8;
  spec.height = 8;
  spec.num_objects = 3;
  spec.parts_per_object = {3, 3, 3};
  EXPECT_THROW(generate(spec), DomainError);
}

}  // namespace
}  // namespace partgraph
