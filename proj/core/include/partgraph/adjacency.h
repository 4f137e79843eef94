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

// Weighted part-adjacency graphs and the graph-matching loss.
//
// The raw weight between parts i and j is the number of pixels lying in both
// dilated part masks, with the dilation radius ceil(T / 2) for a distance
// threshold T. Rows are then L2-normalized into proximity ratios, and two
// graphs are compared with the Frobenius norm of their difference.
//
// The prediction side uses the same construction on soft probabilities:
// every channel is soft-dilated and the intersection count becomes the
// pixelwise product sum, which makes the loss differentiable with respect to
// the predicted probabilities.

#ifndef PARTGRAPH_ADJACENCY_H_
#define PARTGRAPH_ADJACENCY_H_

#include <string>
#include <vector>

#include "partgraph/morphology.h"
#include "partgraph/segmap.h"

namespace partgraph {

enum class AdjacencyMethod {
  kDilateIntersect,  // |dilate(p_i) ∩ dilate(p_j)|, radius ceil(T/2)
  kExactDistance,    // |{s in p_i : dist(s, p_j) <= T}|
};

enum class EdgeWeighting { kWeighted, kUnweighted };

enum class MatrixKind { kRawCounts, kNormalized };

AdjacencyMethod parse_adjacency_method(const std::string& name);
std::string to_string(AdjacencyMethod method);
EdgeWeighting parse_edge_weighting(const std::string& name);
std::string to_string(EdgeWeighting weighting);

struct AdjacencyConfig {
  int threshold = 4;  // T, in pixels
  ElementShape shape = ElementShape::kSquare;
  AdjacencyMethod method = AdjacencyMethod::kDilateIntersect;
  EdgeWeighting weighting = EdgeWeighting::kWeighted;
  // When false, part 0 (background) gets an all-zero row and column.
  bool include_background = true;
  // Dilation used on the soft (prediction) path.
  SoftDilation soft;

  int dilation_radius() const { return (threshold + 1) / 2; }
  StructuringElement dilation_element() const {
    return {shape, dilation_radius()};
  }
  void validate() const;
};

class AdjacencyMatrix {
 public:
  static constexpr double kNormTolerance = 1e-9;

  // Validates: zero diagonal, nonnegative entries, and for kNormalized every
  // row either all-zero or of unit L2 norm.
  AdjacencyMatrix(int size, std::vector<double> entries, MatrixKind kind);

  int size() const { return size_; }
  MatrixKind kind() const { return kind_; }
  double operator()(int i, int j) const {
    return entries_[static_cast<std::size_t>(i) * size_ + j];
  }
  const std::vector<double>& entries() const { return entries_; }

  double row_norm(int i) const;
  bool is_symmetric() const;

  friend bool operator==(const AdjacencyMatrix&,
                         const AdjacencyMatrix&) = default;

 private:
  int size_;
  std::vector<double> entries_;
  MatrixKind kind_;
};

AdjacencyMatrix adjacency_from_labels(const LabelMap& map, int num_parts,
                                      const AdjacencyConfig& cfg);

// All-zero rows stay all-zero.
AdjacencyMatrix normalize_rows(const AdjacencyMatrix& raw);

struct SoftAdjacency {
  AdjacencyMatrix raw;
  AdjacencyMatrix normalized;
};

// Prediction-side graph. Always uses dilation-intersection with cfg.soft as
// the dilation operator. Under unweighted edges each raw product sum s maps
// to min(s, 1), which equals the 0/1 indicator on integer counts.
SoftAdjacency soft_adjacency(const ProbMap& pred, const AdjacencyConfig& cfg);

// Frobenius distance between two normalized graphs.
double gm_loss(const AdjacencyMatrix& gt, const AdjacencyMatrix& pred);

struct GmLossGrad {
  double loss = 0.0;
  std::vector<double> grad;  // shaped like pred.data()
};

// gm_loss(gt, soft_adjacency(pred).normalized) and its gradient with respect
// to every probability entry. At a zero loss the gradient is the zero field;
// rows with zero norm pass no gradient.
GmLossGrad gm_loss_and_grad(const ProbMap& pred, const AdjacencyMatrix& gt,
                            const AdjacencyConfig& cfg);

std::vector<double> gm_loss_grad(const ProbMap& pred,
                                 const AdjacencyMatrix& gt,
                                 const AdjacencyConfig& cfg);

}  // namespace partgraph

#endif  // PARTGRAPH_ADJACENCY_H_
