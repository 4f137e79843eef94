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

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>

#include "json.hpp"
#include "partgraph/errors.h"
#include "partgraph/parallel.h"
#include "partgraph/rng.h"

namespace partgraph {
namespace {

constexpr int kMaxAttempts = 64;

struct Column {
  int x0;
  int width;
};

std::vector<Column> columns(const SceneSpec& spec) {
  const int n = spec.num_objects;
  const int avail = spec.width - 2 - (n - 1) * spec.separation;
  const int cw = avail / n;
  std::vector<Column> cols;
  for (int j = 0; j < n; ++j) cols.push_back({1 + j * (cw + spec.separation), cw});
  return cols;
}

[[noreturn]] void infeasible(const std::string& why) {
  throw DomainError("scene spec infeasible for the canvas: " + why);
}

// Splits `total` rows into k bands of at least `floor_h` rows each.
std::vector<int> split_bands(int total, int k, int floor_h,
                             Xorshift64Star& rng) {
  std::vector<int> bands(k, floor_h);
  for (int extra = total - k * floor_h; extra > 0; --extra) {
    ++bands[rng.uniform_int(0, k - 1)];
  }
  return bands;
}

void paint_stacked(const SceneSpec& spec, const Column& col, int first_part,
                   int k, Xorshift64Star& rng, std::vector<std::uint16_t>& lab) {
  const int min_w = std::max(3, col.width / 2);
  const int rw = rng.uniform_int(min_w, col.width);
  const int band_floor = std::max(
      spec.min_band_height, (spec.min_instance + rw - 1) / rw);
  const int min_h = k * band_floor;
  if (min_h > spec.height) {
    infeasible("object with " + std::to_string(k) + " bands needs " +
               std::to_string(min_h) + " rows, canvas has " +
               std::to_string(spec.height));
  }
  const int rh = rng.uniform_int(min_h, std::max(min_h, spec.height * 3 / 4));
  const int x0 = col.x0 + rng.uniform_int(0, col.width - rw);
  const int y0 = rng.uniform_int(0, spec.height - rh);
  const auto bands = split_bands(rh, k, band_floor, rng);
  int y = y0;
  for (int b = 0; b < k; ++b) {
    for (int yy = y; yy < y + bands[b]; ++yy) {
      for (int xx = x0; xx < x0 + rw; ++xx) {
        lab[static_cast<std::size_t>(yy) * spec.width + xx] =
            static_cast<std::uint16_t>(first_part + b);
      }
    }
    y += bands[b];
  }
}

void paint_nested(const SceneSpec& spec, const Column& col, int first_part,
                  int k, Xorshift64Star& rng, std::vector<std::uint16_t>& lab) {
  const double ax = rng.uniform(0.35, 0.5) * col.width;
  const double ay = rng.uniform(0.25, 0.45) * spec.height;
  const double cx = col.x0 + col.width / 2.0;
  const double cy = rng.uniform(ay, spec.height - ay);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = col.x0; x < col.x0 + col.width; ++x) {
      const double dx = (x + 0.5 - cx) / ax, dy = (y + 0.5 - cy) / ay;
      const double d = std::sqrt(dx * dx + dy * dy);
      if (d > 1.0) continue;
      const int shell = std::min(k - 1, static_cast<int>((1.0 - d) * k));
      lab[static_cast<std::size_t>(y) * spec.width + x] =
          static_cast<std::uint16_t>(first_part + shell);
    }
  }
}

std::vector<std::array<double, 3>> palette(const SceneSpec& spec) {
  Xorshift64Star rng(spec.palette_seed);
  std::vector<std::array<double, 3>> colors;
  const int n = spec.num_parts();
  for (int c = 0; c < n; ++c) {
    std::array<double, 3> best{};
    double best_sep = -1.0;
    // Rejection sampling for separation; keeps the most separated draw.
    for (int attempt = 0; attempt < 32; ++attempt) {
      std::array<double, 3> cand = {rng.uniform(0.1, 0.9),
                                    rng.uniform(0.1, 0.9),
                                    rng.uniform(0.1, 0.9)};
      double sep = 1.0;
      for (const auto& prev : colors) {
        double linf = 0.0;
        for (int i = 0; i < 3; ++i) {
          linf = std::max(linf, std::abs(prev[i] - cand[i]));
        }
        sep = std::min(sep, linf);
      }
      if (sep > best_sep) {
        best_sep = sep;
        best = cand;
      }
      if (sep >= 0.2) break;
    }
    colors.push_back(best);
  }
  return colors;
}

}  // namespace

SceneLayout parse_scene_layout(const std::string& name) {
  if (name == "stacked_rects") return SceneLayout::kStackedRects;
  if (name == "nested_blobs") return SceneLayout::kNestedBlobs;
  throw DomainError("unknown scene layout \"" + name +
                    "\" (expected stacked_rects|nested_blobs)");
}

std::string to_string(SceneLayout layout) {
  return layout == SceneLayout::kStackedRects ? "stacked_rects"
                                              : "nested_blobs";
}

int SceneSpec::num_parts() const {
  return 1 + std::accumulate(parts_per_object.begin(), parts_per_object.end(),
                             0);
}

void SceneSpec::validate() const {
  if (width < 8 || height < 8) {
    throw DomainError("scene dimensions must be >= 8, got " +
                      std::to_string(width) + "x" + std::to_string(height));
  }
  if (num_objects < 1 ||
      parts_per_object.size() != static_cast<std::size_t>(num_objects)) {
    throw DomainError("parts_per_object must list one count per object");
  }
  for (int k : parts_per_object) {
    if (k < 1) throw DomainError("every object needs at least one part");
  }
  if (min_instance < 1 || min_band_height < 1 || separation < 0 ||
      noise < 0.0) {
    throw DomainError("scene spec sizes must be positive");
  }
  if (num_parts() > 65536) throw DomainError("too many parts");
  const int avail = width - 2 - (num_objects - 1) * separation;
  if (avail / num_objects < 3) {
    infeasible(std::to_string(num_objects) + " objects with separation " +
               std::to_string(separation) + " do not fit in width " +
               std::to_string(width));
  }
}

SceneSpec parse_scene_spec(const std::string& json_text) {
  using json = nlohmann::json;
  SceneSpec spec;
  try {
    const json doc = json::parse(json_text);
    spec.width = doc.value("width", spec.width);
    spec.height = doc.value("height", spec.height);
    spec.parts_per_object =
        doc.value("parts_per_object", spec.parts_per_object);
    spec.num_objects = doc.value(
        "num_objects", static_cast<int>(spec.parts_per_object.size()));
    spec.min_instance = doc.value("min_instance", spec.min_instance);
    spec.layout = parse_scene_layout(
        doc.value("layout", to_string(spec.layout)));
    spec.seed = doc.value("seed", spec.seed);
    spec.min_band_height = doc.value("min_band_height", spec.min_band_height);
    spec.separation = doc.value("separation", spec.separation);
    spec.palette_seed = doc.value("palette_seed", spec.palette_seed);
    spec.noise = doc.value("noise", spec.noise);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed scene spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::string scene_spec_to_json(const SceneSpec& spec) {
  nlohmann::json doc = {
      {"width", spec.width},
      {"height", spec.height},
      {"num_objects", spec.num_objects},
      {"parts_per_object", spec.parts_per_object},
      {"min_instance", spec.min_instance},
      {"layout", to_string(spec.layout)},
      {"seed", spec.seed},
      {"min_band_height", spec.min_band_height},
      {"separation", spec.separation},
      {"palette_seed", spec.palette_seed},
      {"noise", spec.noise},
  };
  return doc.dump(2) + "\n";
}

PartsToObjectsMapping scene_mapping(const SceneSpec& spec) {
  std::vector<int> boundaries = {0, 1};
  for (int k : spec.parts_per_object) boundaries.push_back(boundaries.back() + k);
  return PartsToObjectsMapping(std::move(boundaries));
}

Scene generate(const SceneSpec& spec) {
  spec.validate();
  const PartsToObjectsMapping mapping = scene_mapping(spec);
  const int n_parts = mapping.num_parts();
  Xorshift64Star rng(spec.seed);
  const auto cols = columns(spec);

  std::optional<LabelMap> parts;
  for (int attempt = 0; attempt < kMaxAttempts && !parts; ++attempt) {
    std::vector<int> order(spec.num_objects);
    std::iota(order.begin(), order.end(), 0);
    for (int i = spec.num_objects - 1; i > 0; --i) {
      std::swap(order[i], order[rng.uniform_int(0, i)]);
    }
    std::vector<std::uint16_t> lab(
        static_cast<std::size_t>(spec.width) * spec.height, 0);
    for (int slot = 0; slot < spec.num_objects; ++slot) {
      const int obj = order[slot] + 1;
      const int k = mapping.end_part(obj) - mapping.first_part(obj);
      if (spec.layout == SceneLayout::kStackedRects) {
        paint_stacked(spec, cols[slot], mapping.first_part(obj), k, rng, lab);
      } else {
        paint_nested(spec, cols[slot], mapping.first_part(obj), k, rng, lab);
      }
    }
    std::vector<int> area(n_parts, 0);
    for (auto v : lab) ++area[v];
    if (std::all_of(area.begin() + 1, area.end(),
                    [&](int a) { return a >= spec.min_instance; }) &&
        area[0] > 0) {
      parts.emplace(spec.width, spec.height, n_parts, std::move(lab));
    }
  }
  if (!parts) {
    infeasible("could not place every part with >= " +
               std::to_string(spec.min_instance) + " pixels");
  }

  const auto colors = palette(spec);
  Tensor rgb(3, spec.height, spec.width);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const auto& mean = colors[parts->at(x, y)];
      for (int c = 0; c < 3; ++c) {
        rgb.at(c, y, x) =
            std::clamp(mean[c] + spec.noise * rng.normal(), 0.0, 1.0);
      }
    }
  }
  LabelMap objects = project_labels(*parts, mapping);
  return Scene{std::move(*parts), std::move(objects), mapping, std::move(rgb)};
}

std::vector<Scene> generate_batch(const SceneSpec& spec, int count) {
  if (count < 0) throw DomainError("scene count must be >= 0");
  std::vector<std::optional<Scene>> slots(count);
  parallel_for(count, [&](std::size_t k) {
    SceneSpec s = spec;
    s.seed = derive_seed(spec.seed, k);
    slots[k] = generate(s);
  });
  std::vector<Scene> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace partgraph
