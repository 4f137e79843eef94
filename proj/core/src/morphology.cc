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

#include "partgraph/morphology.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <utility>

#include "partgraph/errors.h"

namespace partgraph {
namespace {

void check_elem(const StructuringElement& elem) {
  if (elem.radius < 0) {
    throw DomainError("structuring element radius must be >= 0, got " +
                      std::to_string(elem.radius));
  }
}

void check_soft(const SoftDilation& soft) {
  if (soft.mode == DilationMode::kSmoothMax && !(soft.beta > 0.0)) {
    throw DomainError("smooth-max beta must be > 0, got " +
                      std::to_string(soft.beta));
  }
}

void check_plane(const Plane& p, const char* what) {
  if (p.width <= 0 || p.height <= 0 ||
      p.values.size() != static_cast<std::size_t>(p.width) * p.height) {
    throw DomainError(std::string("malformed ") + what + " plane");
  }
}

// Log-sum-exp smooth max over the clipped window around (x, y), plus the
// window maximum used for stabilization.
double window_lse(const Plane& f, const std::vector<std::pair<int, int>>& offs,
                  int x, int y, double beta, double* max_out) {
  double m = -1e300;
  for (const auto& [dx, dy] : offs) {
    const int sx = x + dx, sy = y + dy;
    if (sx < 0 || sy < 0 || sx >= f.width || sy >= f.height) continue;
    m = std::max(m, f.values[static_cast<std::size_t>(sy) * f.width + sx]);
  }
  double acc = 0.0;
  for (const auto& [dx, dy] : offs) {
    const int sx = x + dx, sy = y + dy;
    if (sx < 0 || sy < 0 || sx >= f.width || sy >= f.height) continue;
    acc += std::exp(beta *
                    (f.values[static_cast<std::size_t>(sy) * f.width + sx] - m));
  }
  *max_out = m;
  return m + std::log(acc) / beta;
}

}  // namespace

bool StructuringElement::contains(int dx, int dy) const {
  switch (shape) {
    case ElementShape::kSquare:
      return std::abs(dx) <= radius && std::abs(dy) <= radius;
    case ElementShape::kDiamond:
      return std::abs(dx) + std::abs(dy) <= radius;
  }
  return false;
}

std::vector<std::pair<int, int>> StructuringElement::offsets() const {
  std::vector<std::pair<int, int>> out;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (contains(dx, dy)) out.emplace_back(dx, dy);
    }
  }
  return out;
}

ElementShape parse_element_shape(const std::string& name) {
  if (name == "square") return ElementShape::kSquare;
  if (name == "diamond") return ElementShape::kDiamond;
  throw DomainError("unknown structuring element \"" + name +
                    "\" (expected square|diamond)");
}

std::string to_string(ElementShape shape) {
  return shape == ElementShape::kSquare ? "square" : "diamond";
}

DilationMode parse_dilation_mode(const std::string& name) {
  if (name == "hard" || name == "hard_max") return DilationMode::kHardMax;
  if (name == "smooth" || name == "smooth_max") return DilationMode::kSmoothMax;
  throw DomainError("unknown dilation mode \"" + name +
                    "\" (expected hard_max|smooth_max)");
}

std::string to_string(DilationMode mode) {
  return mode == DilationMode::kHardMax ? "hard_max" : "smooth_max";
}

BinaryMask::BinaryMask(int width, int height)
    : BinaryMask(width, height,
                 std::vector<std::uint8_t>(
                     static_cast<std::size_t>(std::max(width, 0)) *
                     static_cast<std::size_t>(std::max(height, 0)))) {}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width <= 0 || height <= 0) {
    throw DomainError("mask dimensions must be positive");
  }
  if (bits_.size() != static_cast<std::size_t>(width) * height) {
    throw DomainError("mask bit count does not match its dimensions");
  }
  for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& elem) {
  check_elem(elem);
  const int w = mask.width(), h = mask.height();
  BinaryMask out(w, h);
  if (elem.radius == 0) return mask;
  const auto offs = elem.offsets();
  // Scatter each set pixel; the element is symmetric so scatter == gather.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      for (const auto& [dx, dy] : offs) {
        const int sx = x + dx, sy = y + dy;
        if (sx < 0 || sy < 0 || sx >= w || sy >= h) continue;
        out.set(sx, sy);
      }
    }
  }
  return out;
}

Plane soft_dilate(const Plane& field, const StructuringElement& elem,
                  const SoftDilation& soft) {
  check_elem(elem);
  check_soft(soft);
  check_plane(field, "input");
  const int w = field.width, h = field.height;
  Plane out{w, h, std::vector<double>(field.values.size())};
  const auto offs = elem.offsets();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v;
      if (soft.mode == DilationMode::kHardMax) {
        v = -1e300;
        for (const auto& [dx, dy] : offs) {
          const int sx = x + dx, sy = y + dy;
          if (sx < 0 || sy < 0 || sx >= w || sy >= h) continue;
          v = std::max(v, field.values[static_cast<std::size_t>(sy) * w + sx]);
        }
      } else {
        double m;
        v = std::clamp(window_lse(field, offs, x, y, soft.beta, &m), 0.0, 1.0);
      }
      out.values[static_cast<std::size_t>(y) * w + x] = v;
    }
  }
  return out;
}

Plane soft_dilate_backward(const Plane& field, const StructuringElement& elem,
                           const SoftDilation& soft, const Plane& grad_out) {
  check_elem(elem);
  check_soft(soft);
  check_plane(field, "input");
  check_plane(grad_out, "gradient");
  if (grad_out.width != field.width || grad_out.height != field.height) {
    throw DomainError("gradient plane shape differs from input plane");
  }
  const int w = field.width, h = field.height;
  Plane grad{w, h, std::vector<double>(field.values.size(), 0.0)};
  const auto offs = elem.offsets();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double g = grad_out.values[static_cast<std::size_t>(y) * w + x];
      if (g == 0.0) continue;
      if (soft.mode == DilationMode::kHardMax) {
        std::size_t best = 0;
        double best_v = -1e300;
        for (const auto& [dx, dy] : offs) {
          const int sx = x + dx, sy = y + dy;
          if (sx < 0 || sy < 0 || sx >= w || sy >= h) continue;
          const std::size_t q = static_cast<std::size_t>(sy) * w + sx;
          if (field.values[q] > best_v) {
            best_v = field.values[q];
            best = q;
          }
        }
        grad.values[best] += g;
      } else {
        double m;
        const double lse = window_lse(field, offs, x, y, soft.beta, &m);
        if (lse < 0.0 || lse > 1.0) continue;  // clamped
        // d lse / d x_q = softmax weight of q within the window.
        for (const auto& [dx, dy] : offs) {
          const int sx = x + dx, sy = y + dy;
          if (sx < 0 || sy < 0 || sx >= w || sy >= h) continue;
          const std::size_t q = static_cast<std::size_t>(sy) * w + sx;
          grad.values[q] += g * std::exp(soft.beta * (field.values[q] - lse));
        }
      }
    }
  }
  return grad;
}

}  // namespace partgraph
