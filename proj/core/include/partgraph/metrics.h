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

// Per-class and summary segmentation metrics from a confusion matrix.
//
// For class c with TP/FP/FN taken from the matrix:
//   IoU_c = TP / (TP + FP + FN)
//   PA_c  = TP / (TP + FN)            (per-class recall)
//   mIoU  = mean IoU_c, mCA = mean PA_c, over classes present in the ground
//           truth or the prediction
//   mPA   = sum TP / total pixels     (overall pixel accuracy)
// Classes with neither ground-truth nor predicted pixels have no value and
// are excluded from every mean. A class predicted but absent from the ground
// truth scores IoU 0 and PA 0.

#ifndef PARTGRAPH_METRICS_H_
#define PARTGRAPH_METRICS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "partgraph/segmap.h"

namespace partgraph {

class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes);

  int size() const { return size_; }
  // Rows are ground-truth classes, columns predicted classes.
  std::uint64_t operator()(int gt, int pred) const {
    return counts_[static_cast<std::size_t>(gt) * size_ + pred];
  }
  void add(int gt, int pred, std::uint64_t n = 1) {
    counts_[static_cast<std::size_t>(gt) * size_ + pred] += n;
  }
  std::uint64_t total() const;

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

  friend bool operator==(const ConfusionMatrix&,
                         const ConfusionMatrix&) = default;

 private:
  int size_;
  std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& gt,
                          int num_classes);

struct MetricReport {
  std::vector<std::optional<double>> per_class_iou;
  std::vector<std::optional<double>> per_class_pa;
  double miou = 0.0;  // headline; background inclusion per the label set
  double miou_with_background = 0.0;
  double miou_without_background = 0.0;
  double mpa = 0.0;
  double mca = 0.0;
  std::vector<std::optional<double>> per_object_miou;
  double object_avg = 0.0;
};

MetricReport report(const ConfusionMatrix& cm, const LabelSet& label_set);

std::string report_to_json(const MetricReport& r, const LabelSet& label_set);
std::string report_to_csv(const MetricReport& r, const LabelSet& label_set);

}  // namespace partgraph

#endif  // PARTGRAPH_METRICS_H_
