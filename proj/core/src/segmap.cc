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

#include "partgraph/segmap.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "partgraph/errors.h"

namespace partgraph {
namespace {

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0) {
    std::ostringstream msg;
    msg << "map dimensions must be positive, got " << width << "x" << height;
    throw DomainError(msg.str());
  }
}

void check_num_classes(int num_classes) {
  if (num_classes <= 0 || num_classes > 65536) {
    throw DomainError("num_classes must be in [1, 65536], got " +
                      std::to_string(num_classes));
  }
}

}  // namespace

LabelMap::LabelMap(int width, int height, int num_classes)
    : LabelMap(width, height, num_classes,
               std::vector<std::uint16_t>(
                   static_cast<std::size_t>(std::max(width, 0)) *
                   static_cast<std::size_t>(std::max(height, 0)))) {}

LabelMap::LabelMap(int width, int height, int num_classes,
                   std::vector<std::uint16_t> labels)
    : width_(width),
      height_(height),
      num_classes_(num_classes),
      labels_(std::move(labels)) {
  check_dims(width, height);
  check_num_classes(num_classes);
  if (labels_.size() != static_cast<std::size_t>(width) * height) {
    throw DomainError("label count " + std::to_string(labels_.size()) +
                      " does not match " + shape_string());
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] >= num_classes) {
      std::ostringstream msg;
      msg << "label " << labels_[i] << " at pixel (" << i % width << ", "
          << i / width << ") is out of range for " << num_classes
          << " classes";
      throw DomainError(msg.str());
    }
  }
}

LabelMap LabelMap::with_num_classes(int num_classes) const {
  return LabelMap(width_, height_, num_classes, labels_);
}

std::string LabelMap::shape_string() const {
  return std::to_string(width_) + "x" + std::to_string(height_);
}

ProbMap::ProbMap(int width, int height, int num_classes,
                 std::vector<double> probs)
    : ProbMap(width, height, num_classes, std::move(probs), true) {}

ProbMap ProbMap::Unchecked(int width, int height, int num_classes,
                           std::vector<double> probs) {
  return ProbMap(width, height, num_classes, std::move(probs), false);
}

ProbMap::ProbMap(int width, int height, int num_classes,
                 std::vector<double> probs, bool check)
    : width_(width),
      height_(height),
      num_classes_(num_classes),
      probs_(std::move(probs)) {
  check_dims(width, height);
  check_num_classes(num_classes);
  if (probs_.size() != pixel_count() * num_classes) {
    throw DomainError("probability count " + std::to_string(probs_.size()) +
                      " does not match " + shape_string());
  }
  if (!check) return;
  for (std::size_t p = 0; p < pixel_count(); ++p) {
    double sum = 0.0;
    for (int c = 0; c < num_classes; ++c) {
      const double v = probs_[p * num_classes + c];
      if (!(v >= 0.0 && v <= 1.0)) {
        throw DomainError("probability " + std::to_string(v) + " at pixel " +
                          std::to_string(p) + " channel " + std::to_string(c) +
                          " is outside [0, 1]");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
      throw DomainError("channel sum " + std::to_string(sum) + " at pixel " +
                        std::to_string(p) + " differs from 1");
    }
  }
}

std::vector<double> ProbMap::channel(int c) const {
  std::vector<double> plane(pixel_count());
  for (std::size_t p = 0; p < plane.size(); ++p) plane[p] = at(p, c);
  return plane;
}

std::string ProbMap::shape_string() const {
  return std::to_string(width_) + "x" + std::to_string(height_) + "x" +
         std::to_string(num_classes_);
}

PartsToObjectsMapping::PartsToObjectsMapping(
    std::vector<int> boundaries, std::vector<std::string> part_names,
    std::vector<std::string> object_names)
    : boundaries_(std::move(boundaries)),
      part_names_(std::move(part_names)),
      object_names_(std::move(object_names)) {
  if (boundaries_.size() < 2) {
    throw DomainError("mapping needs at least one object (2 boundaries)");
  }
  if (boundaries_.front() != 0) {
    throw DomainError("mapping boundaries must start at 0");
  }
  for (std::size_t j = 1; j < boundaries_.size(); ++j) {
    if (boundaries_[j] <= boundaries_[j - 1]) {
      throw DomainError("mapping boundaries must be strictly increasing");
    }
  }
  if (!part_names_.empty() &&
      part_names_.size() != static_cast<std::size_t>(num_parts())) {
    throw DomainError("mapping has " + std::to_string(part_names_.size()) +
                      " part names for " + std::to_string(num_parts()) +
                      " parts");
  }
  if (!object_names_.empty() &&
      object_names_.size() != static_cast<std::size_t>(num_objects())) {
    throw DomainError("mapping has " + std::to_string(object_names_.size()) +
                      " object names for " + std::to_string(num_objects()) +
                      " objects");
  }
  part_to_object_.resize(num_parts());
  for (int j = 0; j < num_objects(); ++j) {
    for (int i = first_part(j); i < end_part(j); ++i) part_to_object_[i] = j;
  }
}

LabelSet::LabelSet(PartsToObjectsMapping m, bool background,
                   bool background_in_miou)
    : mapping(std::move(m)),
      background_is_class_zero(background),
      background_in_miou(background_in_miou) {
  if (background_is_class_zero && mapping.end_part(0) != 1) {
    throw DomainError(
        "background object 0 must contain exactly part 0, but owns parts [0, " +
        std::to_string(mapping.end_part(0)) + ")");
  }
}

ProbMap one_hot(const LabelMap& map, int num_classes) {
  check_num_classes(num_classes);
  std::vector<double> probs(map.pixel_count() * num_classes, 0.0);
  for (std::size_t p = 0; p < map.pixel_count(); ++p) {
    const int label = map[p];
    if (label >= num_classes) {
      std::ostringstream msg;
      msg << "label " << label << " at pixel (" << p % map.width() << ", "
          << p / map.width() << ") is out of range for " << num_classes
          << " classes";
      throw DomainError(msg.str());
    }
    probs[p * num_classes + label] = 1.0;
  }
  return ProbMap(map.width(), map.height(), num_classes, std::move(probs));
}

LabelMap argmax_map(const ProbMap& probs) {
  const int channels = probs.num_classes();
  std::vector<std::uint16_t> labels(probs.pixel_count());
  for (std::size_t p = 0; p < labels.size(); ++p) {
    int best = 0;
    for (int c = 1; c < channels; ++c) {
      if (probs.at(p, c) > probs.at(p, best)) best = c;
    }
    labels[p] = static_cast<std::uint16_t>(best);
  }
  return LabelMap(probs.width(), probs.height(), channels, std::move(labels));
}

LabelMap project_labels(const LabelMap& parts,
                        const PartsToObjectsMapping& mapping) {
  if (parts.num_classes() != mapping.num_parts()) {
    throw DomainError("part map declares " +
                      std::to_string(parts.num_classes()) +
                      " classes but mapping covers " +
                      std::to_string(mapping.num_parts()) + " parts");
  }
  std::vector<std::uint16_t> objects(parts.pixel_count());
  for (std::size_t p = 0; p < objects.size(); ++p) {
    objects[p] = static_cast<std::uint16_t>(mapping.object_of(parts[p]));
  }
  return LabelMap(parts.width(), parts.height(), mapping.num_objects(),
                  std::move(objects));
}

ProbMap sum_probability(const ProbMap& pred,
                        const PartsToObjectsMapping& mapping) {
  if (pred.num_classes() != mapping.num_parts()) {
    throw DomainError("prediction has " + std::to_string(pred.num_classes()) +
                      " channels but mapping covers " +
                      std::to_string(mapping.num_parts()) + " parts");
  }
  const int objects = mapping.num_objects();
  std::vector<double> out(pred.pixel_count() * objects);
  for (std::size_t p = 0; p < pred.pixel_count(); ++p) {
    for (int j = 0; j < objects; ++j) {
      double sum = 0.0;
      for (int i = mapping.first_part(j); i < mapping.end_part(j); ++i) {
        sum += pred.at(p, i);
      }
      out[p * objects + j] = sum;
    }
  }
  // The input's simplex property carries over; probing inputs stay unchecked.
  return ProbMap::Unchecked(pred.width(), pred.height(), objects,
                            std::move(out));
}

}  // namespace partgraph
