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

#include "partgraph/metrics.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "partgraph/errors.h"

namespace partgraph {
namespace {

// Ratios are kept in extended precision until the final rounding, so small
// rational means such as 7/12 come out as the nearest double.
using Ratios = std::vector<std::optional<long double>>;

long double mean_of(const Ratios& values, std::size_t first,
                    std::size_t last) {
  long double sum = 0.0L;
  int n = 0;
  for (std::size_t c = first; c < last; ++c) {
    if (values[c]) {
      sum += *values[c];
      ++n;
    }
  }
  return n ? sum / n : 0.0L;
}

long double mean_of(const Ratios& values, std::size_t first) {
  return mean_of(values, first, values.size());
}

std::vector<std::optional<double>> rounded(const Ratios& values) {
  std::vector<std::optional<double>> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i]) out[i] = static_cast<double>(*values[i]);
  }
  return out;
}

std::string fmt9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string name_or_index(const std::vector<std::string>& names, int i,
                          const char* prefix) {
  if (static_cast<std::size_t>(i) < names.size()) return names[i];
  return std::string(prefix) + std::to_string(i);
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : size_(num_classes),
      counts_(static_cast<std::size_t>(num_classes > 0 ? num_classes : 0) *
              (num_classes > 0 ? num_classes : 0)) {
  if (num_classes <= 0) {
    throw DomainError("confusion matrix needs at least one class");
  }
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.size_ != size_) {
    throw DomainError("cannot add confusion matrices of sizes " +
                      std::to_string(size_) + " and " +
                      std::to_string(other.size_));
  }
  for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
  return *this;
}

ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& gt,
                          int num_classes) {
  if (!pred.same_shape(gt)) {
    throw DomainError("prediction is " + pred.shape_string() +
                      " but ground truth is " + gt.shape_string());
  }
  ConfusionMatrix cm(num_classes);
  for (std::size_t p = 0; p < gt.pixel_count(); ++p) {
    if (gt[p] >= num_classes || pred[p] >= num_classes) {
      throw DomainError("label at pixel " + std::to_string(p) +
                        " exceeds " + std::to_string(num_classes) +
                        " classes");
    }
    cm.add(gt[p], pred[p]);
  }
  return cm;
}

MetricReport report(const ConfusionMatrix& cm, const LabelSet& label_set) {
  const int n = cm.size();
  if (n != label_set.num_parts()) {
    throw DomainError("confusion matrix has " + std::to_string(n) +
                      " classes but label set has " +
                      std::to_string(label_set.num_parts()) + " parts");
  }
  const std::uint64_t total = cm.total();
  if (total == 0) throw DomainError("confusion matrix is empty");

  Ratios iou(n), pa(n);
  std::uint64_t correct = 0;
  for (int c = 0; c < n; ++c) {
    const std::uint64_t tp = cm(c, c);
    std::uint64_t gt_count = 0, pred_count = 0;
    for (int k = 0; k < n; ++k) {
      gt_count += cm(c, k);
      pred_count += cm(k, c);
    }
    correct += tp;
    if (gt_count == 0 && pred_count == 0) continue;
    const std::uint64_t uni = gt_count + pred_count - tp;
    iou[c] = static_cast<long double>(tp) / static_cast<long double>(uni);
    pa[c] = gt_count ? static_cast<long double>(tp) /
                           static_cast<long double>(gt_count)
                     : 0.0L;
  }

  const bool skip_bg =
      label_set.background_is_class_zero && !label_set.background_in_miou;
  const auto& m = label_set.mapping;
  Ratios objects(m.num_objects());
  for (int j = 0; j < m.num_objects(); ++j) {
    const auto first = iou.begin() + m.first_part(j);
    const auto last = iou.begin() + m.end_part(j);
    if (std::any_of(first, last, [](const auto& v) { return v.has_value(); })) {
      objects[j] = mean_of(iou, m.first_part(j), m.end_part(j));
    }
  }

  MetricReport r;
  r.per_class_iou = rounded(iou);
  r.per_class_pa = rounded(pa);
  r.miou_with_background = static_cast<double>(mean_of(iou, 0));
  r.miou_without_background =
      label_set.background_is_class_zero
          ? static_cast<double>(mean_of(iou, 1))
          : r.miou_with_background;
  r.miou = skip_bg ? r.miou_without_background : r.miou_with_background;
  r.mca = static_cast<double>(mean_of(pa, skip_bg ? 1 : 0));
  r.mpa = static_cast<double>(correct) / static_cast<double>(total);
  r.per_object_miou = rounded(objects);
  r.object_avg = static_cast<double>(mean_of(objects, skip_bg ? 1 : 0));
  return r;
}

std::string report_to_json(const MetricReport& r, const LabelSet& label_set) {
  using json = nlohmann::json;
  const auto opt = [](const std::vector<std::optional<double>>& v) {
    json a = json::array();
    for (const auto& x : v) a.push_back(x ? json(*x) : json(nullptr));
    return a;
  };
  json parts = json::array();
  for (int c = 0; c < label_set.num_parts(); ++c) {
    parts.push_back(
        name_or_index(label_set.mapping.part_names(), c, "part_"));
  }
  json objects = json::array();
  for (int j = 0; j < label_set.num_objects(); ++j) {
    objects.push_back(
        name_or_index(label_set.mapping.object_names(), j, "object_"));
  }
  json doc = {
      {"part_names", parts},
      {"object_names", objects},
      {"per_class_iou", opt(r.per_class_iou)},
      {"per_class_pa", opt(r.per_class_pa)},
      {"miou", r.miou},
      {"miou_with_background", r.miou_with_background},
      {"miou_without_background", r.miou_without_background},
      {"mpa", r.mpa},
      {"mca", r.mca},
      {"per_object_miou", opt(r.per_object_miou)},
      {"object_avg", r.object_avg},
  };
  return doc.dump(2) + "\n";
}

std::string report_to_csv(const MetricReport& r, const LabelSet& label_set) {
  std::ostringstream out;
  const auto cell = [](const std::optional<double>& v) {
    return v ? fmt9(*v) : std::string();
  };
  out << "class,object,iou,pa\n";
  for (int c = 0; c < label_set.num_parts(); ++c) {
    out << name_or_index(label_set.mapping.part_names(), c, "part_") << ","
        << name_or_index(label_set.mapping.object_names(),
                         label_set.mapping.object_of(c), "object_")
        << "," << cell(r.per_class_iou[c]) << "," << cell(r.per_class_pa[c])
        << "\n";
  }
  for (int j = 0; j < label_set.num_objects(); ++j) {
    out << "object_miou,"
        << name_or_index(label_set.mapping.object_names(), j, "object_")
        << "," << cell(r.per_object_miou[j]) << ",\n";
  }
  out << "miou,," << fmt9(r.miou) << ",\n";
  out << "miou_with_background,," << fmt9(r.miou_with_background) << ",\n";
  out << "miou_without_background,," << fmt9(r.miou_without_background)
      << ",\n";
  out << "mpa,,," << fmt9(r.mpa) << "\n";
  out << "mca,,," << fmt9(r.mca) << "\n";
  out << "object_avg,," << fmt9(r.object_avg) << ",\n";
  return out.str();
}

}  // namespace partgraph
