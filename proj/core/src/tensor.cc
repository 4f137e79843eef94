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

#include "partgraph/tensor.h"

#include <utility>

#include "partgraph/errors.h"

namespace partgraph {

Tensor::Tensor(int channels, int height, int width, double fill)
    : channels_(channels), height_(height), width_(width) {
  if (channels <= 0 || height <= 0 || width <= 0) {
    throw DomainError("tensor dimensions must be positive, got " +
                      shape_string());
  }
  data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
}

Tensor::Tensor(int channels, int height, int width, std::vector<double> data)
    : Tensor(channels, height, width) {
  if (data.size() != data_.size()) {
    throw DomainError("tensor " + shape_string() + " expects " +
                      std::to_string(data_.size()) + " values, got " +
                      std::to_string(data.size()));
  }
  data_ = std::move(data);
}

std::string Tensor::shape_string() const {
  return "(" + std::to_string(channels_) + "," + std::to_string(height_) +
         "," + std::to_string(width_) + ")";
}

Tensor to_tensor(const ProbMap& probs) {
  Tensor t(probs.num_classes(), probs.height(), probs.width());
  for (int c = 0; c < probs.num_classes(); ++c) {
    for (std::size_t p = 0; p < probs.pixel_count(); ++p) {
      t.values()[c * t.plane_size() + p] = probs.at(p, c);
    }
  }
  return t;
}

ProbMap to_prob_map(const Tensor& t) {
  const int channels = t.channels();
  std::vector<double> probs(t.size());
  for (int c = 0; c < channels; ++c) {
    for (std::size_t p = 0; p < t.plane_size(); ++p) {
      probs[p * channels + c] = t.values()[c * t.plane_size() + p];
    }
  }
  return ProbMap(t.width(), t.height(), channels, std::move(probs));
}

}  // namespace partgraph
