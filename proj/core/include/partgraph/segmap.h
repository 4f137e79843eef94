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

// Segmentation-map value types and the conversions between hard label maps,
// soft probability maps, and part/object label spaces.
//
// All indices are 0-based. Part 0 / object 0 is the background class by
// convention when a label set declares one.

#ifndef PARTGRAPH_SEGMAP_H_
#define PARTGRAPH_SEGMAP_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace partgraph {

// H×W grid of class indices, row-major. Every label is < num_classes.
class LabelMap {
 public:
  // All-zero map.
  LabelMap(int width, int height, int num_classes);
  LabelMap(int width, int height, int num_classes,
           std::vector<std::uint16_t> labels);

  int width() const { return width_; }
  int height() const { return height_; }
  int num_classes() const { return num_classes_; }
  std::size_t pixel_count() const { return labels_.size(); }

  std::uint16_t at(int x, int y) const {
    return labels_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::uint16_t operator[](std::size_t pixel) const { return labels_[pixel]; }
  std::span<const std::uint16_t> labels() const { return labels_; }

  // Same pixels, different declared class count (must still bound labels).
  LabelMap with_num_classes(int num_classes) const;

  bool same_shape(const LabelMap& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }
  std::string shape_string() const;

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  int width_;
  int height_;
  int num_classes_;
  std::vector<std::uint16_t> labels_;
};

// H×W×C per-pixel class probabilities, channel-last row-major:
// probs[(y * W + x) * C + c].
class ProbMap {
 public:
  // Tolerance on the per-pixel channel sum enforced by the checked
  // constructor.
  static constexpr double kSimplexTolerance = 1e-6;

  // Validates entries in [0, 1] and per-pixel sums within tolerance.
  ProbMap(int width, int height, int num_classes, std::vector<double> probs);

  // Skips the simplex check (shape is still checked). Used for gradient
  // probing, where individual entries are perturbed off the simplex.
  static ProbMap Unchecked(int width, int height, int num_classes,
                           std::vector<double> probs);

  int width() const { return width_; }
  int height() const { return height_; }
  int num_classes() const { return num_classes_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * height_;
  }

  double at(std::size_t pixel, int c) const {
    return probs_[pixel * num_classes_ + c];
  }
  std::span<const double> data() const { return probs_; }

  // One H×W plane of channel c.
  std::vector<double> channel(int c) const;

  bool same_shape(const LabelMap& map) const {
    return width_ == map.width() && height_ == map.height();
  }
  std::string shape_string() const;

  friend bool operator==(const ProbMap&, const ProbMap&) = default;

 private:
  ProbMap(int width, int height, int num_classes, std::vector<double> probs,
          bool check);

  int width_;
  int height_;
  int num_classes_;
  std::vector<double> probs_;
};

// The monotone boundary array mapping contiguous part ranges to objects:
// object j owns parts [boundaries[j], boundaries[j + 1]). boundaries[0] = 0
// and boundaries.back() = num_parts. (A 1-based formulation where object j
// owns l[j-1]+1 .. l[j] is the same array read with shifted part indices.)
class PartsToObjectsMapping {
 public:
  explicit PartsToObjectsMapping(std::vector<int> boundaries,
                                 std::vector<std::string> part_names = {},
                                 std::vector<std::string> object_names = {});

  int num_parts() const { return boundaries_.back(); }
  int num_objects() const { return static_cast<int>(boundaries_.size()) - 1; }
  int first_part(int object) const { return boundaries_[object]; }
  int end_part(int object) const { return boundaries_[object + 1]; }

  // Object owning `part`; part must be in [0, num_parts).
  int object_of(int part) const { return part_to_object_[part]; }

  const std::vector<int>& boundaries() const { return boundaries_; }
  const std::vector<std::string>& part_names() const { return part_names_; }
  const std::vector<std::string>& object_names() const {
    return object_names_;
  }

  friend bool operator==(const PartsToObjectsMapping&,
                         const PartsToObjectsMapping&) = default;

 private:
  std::vector<int> boundaries_;
  std::vector<int> part_to_object_;
  std::vector<std::string> part_names_;
  std::vector<std::string> object_names_;
};

struct LabelSet {
  explicit LabelSet(PartsToObjectsMapping m, bool background = true,
                    bool background_in_miou = true);

  int num_parts() const { return mapping.num_parts(); }
  int num_objects() const { return mapping.num_objects(); }

  PartsToObjectsMapping mapping;
  // When set, object 0 is background and owns exactly part 0.
  bool background_is_class_zero;
  // Selects whether the background class feeds the headline mIoU.
  bool background_in_miou;
};

ProbMap one_hot(const LabelMap& map, int num_classes);

// Per-pixel argmax; ties go to the lowest channel index.
LabelMap argmax_map(const ProbMap& probs);

LabelMap project_labels(const LabelMap& parts,
                        const PartsToObjectsMapping& mapping);

// Object channel j is the sum of part channels in object j's range.
ProbMap sum_probability(const ProbMap& pred,
                        const PartsToObjectsMapping& mapping);

}  // namespace partgraph

#endif  // PARTGRAPH_SEGMAP_H_
