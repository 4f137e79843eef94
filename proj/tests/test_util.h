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

// Shared generators and independent oracles for the test suites. Nothing in
// here calls into the code paths it is used to check.

#ifndef PARTGRAPH_TESTS_TEST_UTIL_H_
#define PARTGRAPH_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <unistd.h>

#include "partgraph/morphology.h"
#include "partgraph/rng.h"
#include "partgraph/segmap.h"

namespace partgraph::testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag)
      : path_(std::filesystem::temp_directory_path() /
              ("partgraph_" + tag + "_" + std::to_string(::getpid()))) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline LabelMap random_label_map(Xorshift64Star& rng, int w, int h,
                                 int classes) {
  std::vector<std::uint16_t> labels(static_cast<std::size_t>(w) * h);
  for (auto& v : labels) v = static_cast<std::uint16_t>(rng.uniform_int(0, classes - 1));
  return LabelMap(w, h, classes, std::move(labels));
}

// Piecewise-constant map made of a few random rectangles over a random
// background; gives realistic part blobs rather than salt-and-pepper noise.
inline LabelMap random_blob_map(Xorshift64Star& rng, int w, int h,
                                int classes) {
  std::vector<std::uint16_t> labels(static_cast<std::size_t>(w) * h,
                                    static_cast<std::uint16_t>(rng.uniform_int(0, classes - 1)));
  const int rects = rng.uniform_int(2, 6);
  for (int r = 0; r < rects; ++r) {
    const int x0 = rng.uniform_int(0, w - 1), y0 = rng.uniform_int(0, h - 1);
    const int x1 = rng.uniform_int(x0, w - 1), y1 = rng.uniform_int(y0, h - 1);
    const auto c = static_cast<std::uint16_t>(rng.uniform_int(0, classes - 1));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) labels[static_cast<std::size_t>(y) * w + x] = c;
    }
  }
  return LabelMap(w, h, classes, std::move(labels));
}

// Softmax of Gaussian logits with the given scale: strictly interior
// probabilities.
inline ProbMap random_prob_map(Xorshift64Star& rng, int w, int h, int classes,
                               double scale = 1.0) {
  std::vector<double> probs(static_cast<std::size_t>(w) * h * classes);
  for (std::size_t p = 0; p < static_cast<std::size_t>(w) * h; ++p) {
    double z = 0.0;
    for (int c = 0; c < classes; ++c) {
      const double e = std::exp(scale * rng.normal());
      probs[p * classes + c] = e;
      z += e;
    }
    for (int c = 0; c < classes; ++c) probs[p * classes + c] /= z;
  }
  return ProbMap(w, h, classes, std::move(probs));
}

// Mixture (1 - floor_mass) * softmax + floor_mass / C: every entry is at
// least floor_mass / C. Keeps central differences of log terms accurate,
// since their truncation error grows like h^2 / q^2.
inline ProbMap random_interior_prob_map(Xorshift64Star& rng, int w, int h,
                                        int classes, double floor_mass = 0.2) {
  const ProbMap base = random_prob_map(rng, w, h, classes);
  std::vector<double> probs(base.data().begin(), base.data().end());
  for (double& p : probs) p = (1.0 - floor_mass) * p + floor_mass / classes;
  return ProbMap(w, h, classes, std::move(probs));
}

inline PartsToObjectsMapping random_mapping(Xorshift64Star& rng, int parts) {
  std::vector<int> b = {0};
  while (b.back() < parts) b.push_back(rng.uniform_int(b.back() + 1, parts));
  return PartsToObjectsMapping(std::move(b));
}

// Central difference of f along coordinate i of x.
inline double central_difference(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, std::size_t i, double h) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double fp = f(x);
  x[i] = x0 - h;
  const double fm = f(x);
  return (fp - fm) / (2.0 * h);
}

// |a - n| / max(|a|, |n|, floor). The floor keeps coordinates whose true
// derivative is (near) zero from dividing noise by noise.
inline double relative_error(double analytic, double numeric,
                             double floor = 1e-6) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

// Brute-force membership of pixel (x, y) in the dilation of `mask` by the
// element: scans every pixel of the image.
inline bool in_dilation_brute(const BinaryMask& mask, int x, int y,
                              ElementShape shape, int radius) {
  for (int sy = 0; sy < mask.height(); ++sy) {
    for (int sx = 0; sx < mask.width(); ++sx) {
      if (!mask.at(sx, sy)) continue;
      const int dx = std::abs(sx - x), dy = std::abs(sy - y);
      const bool inside = shape == ElementShape::kSquare
                              ? std::max(dx, dy) <= radius
                              : dx + dy <= radius;
      if (inside) return true;
    }
  }
  return false;
}

inline bool within(ElementShape shape, int dx, int dy, int radius) {
  dx = std::abs(dx);
  dy = std::abs(dy);
  return shape == ElementShape::kSquare ? std::max(dx, dy) <= radius
                                        : dx + dy <= radius;
}

// Dilation-intersection counts by a double loop over all pixel pairs: pixel
// s lies in the dilation of part i iff some pixel q of part i is within the
// radius of s. Returns row-major num_parts x num_parts counts, zero diagonal.
inline std::vector<long long> brute_dilate_intersect(const LabelMap& map,
                                                     int num_parts,
                                                     ElementShape shape,
                                                     int radius) {
  const int w = map.width(), h = map.height();
  const std::size_t n = map.pixel_count();
  std::vector<std::vector<bool>> cover(n, std::vector<bool>(num_parts, false));
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t q = 0; q < n; ++q) {
      const int dx = static_cast<int>(s % w) - static_cast<int>(q % w);
      const int dy = static_cast<int>(s / w) - static_cast<int>(q / w);
      if (within(shape, dx, dy, radius)) cover[s][map[q]] = true;
    }
  }
  (void)h;
  std::vector<long long> counts(static_cast<std::size_t>(num_parts) * num_parts, 0);
  for (std::size_t s = 0; s < n; ++s) {
    for (int i = 0; i < num_parts; ++i) {
      for (int j = 0; j < num_parts; ++j) {
        if (i != j && cover[s][i] && cover[s][j]) ++counts[i * num_parts + j];
      }
    }
  }
  return counts;
}

// Counts of pixels of part i within distance T of some pixel of part j.
inline std::vector<long long> brute_exact_distance(const LabelMap& map,
                                                   int num_parts,
                                                   ElementShape shape,
                                                   int threshold) {
  const int w = map.width();
  const std::size_t n = map.pixel_count();
  std::vector<long long> counts(static_cast<std::size_t>(num_parts) * num_parts, 0);
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<bool> near(num_parts, false);
    for (std::size_t q = 0; q < n; ++q) {
      const int dx = static_cast<int>(s % w) - static_cast<int>(q % w);
      const int dy = static_cast<int>(s / w) - static_cast<int>(q / w);
      if (within(shape, dx, dy, threshold)) near[map[q]] = true;
    }
    for (int j = 0; j < num_parts; ++j) {
      if (j != map[s] && near[j]) ++counts[map[s] * num_parts + j];
    }
  }
  return counts;
}

}  // namespace partgraph::testing

#endif  // PARTGRAPH_TESTS_TEST_UTIL_H_
