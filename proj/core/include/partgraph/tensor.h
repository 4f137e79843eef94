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

#ifndef PARTGRAPH_TENSOR_H_
#define PARTGRAPH_TENSOR_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "partgraph/segmap.h"

namespace partgraph {

// Rank-3 array, channel-major: data[(c * height + y) * width + x].
class Tensor {
 public:
  Tensor() = default;
  Tensor(int channels, int height, int width, double fill = 0.0);
  Tensor(int channels, int height, int width, std::vector<double> data);

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(height_) * width_;
  }

  double& at(int c, int y, int x) {
    return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }
  double at(int c, int y, int x) const {
    return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }

  double* ptr(int c, int y, int x) { return &at(c, y, x); }
  const double* ptr(int c, int y, int x) const {
    return &data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  bool same_shape(const Tensor& o) const {
    return channels_ == o.channels_ && height_ == o.height_ &&
           width_ == o.width_;
  }
  std::string shape_string() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

// Channel-last ProbMap to channel-major tensor and back.
Tensor to_tensor(const ProbMap& probs);
ProbMap to_prob_map(const Tensor& t);

}  // namespace partgraph

#endif  // PARTGRAPH_TENSOR_H_
