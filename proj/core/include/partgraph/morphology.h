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

// Binary and soft 2D dilation with square (Chebyshev) or diamond
// (Manhattan) structuring elements. Neighborhoods are clipped at the image
// border; no padding value ever participates.

#ifndef PARTGRAPH_MORPHOLOGY_H_
#define PARTGRAPH_MORPHOLOGY_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace partgraph {

enum class ElementShape { kSquare, kDiamond };

struct StructuringElement {
  ElementShape shape = ElementShape::kSquare;
  int radius = 0;

  bool contains(int dx, int dy) const;
  // Offsets (dx, dy) in row-major scan order (dy outer, dx inner).
  std::vector<std::pair<int, int>> offsets() const;
};

ElementShape parse_element_shape(const std::string& name);
std::string to_string(ElementShape shape);

class BinaryMask {
 public:
  BinaryMask(int width, int height);
  BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return bits_.size(); }

  bool at(int x, int y) const {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  bool operator[](std::size_t pixel) const { return bits_[pixel] != 0; }
  void set(int x, int y, bool value = true) {
    bits_[static_cast<std::size_t>(y) * width_ + x] = value ? 1 : 0;
  }
  std::size_t count() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& elem);

// Real-valued H×W field, row-major.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> values;
};

enum class DilationMode {
  kHardMax,    // windowed maximum
  kSmoothMax,  // (1/beta) log sum exp(beta x), clamped to [0, 1]
};

struct SoftDilation {
  DilationMode mode = DilationMode::kHardMax;
  double beta = 20.0;
};

DilationMode parse_dilation_mode(const std::string& name);
std::string to_string(DilationMode mode);

Plane soft_dilate(const Plane& field, const StructuringElement& elem,
                  const SoftDilation& soft);

// Vector-Jacobian product of soft_dilate at `field`: maps the gradient with
// respect to the dilated output to the gradient with respect to the input.
// Hard max routes each output's gradient to the first window maximum in scan
// order; clamped smooth-max outputs pass no gradient.
Plane soft_dilate_backward(const Plane& field, const StructuringElement& elem,
                           const SoftDilation& soft, const Plane& grad_out);

}  // namespace partgraph

#endif  // PARTGRAPH_MORPHOLOGY_H_
