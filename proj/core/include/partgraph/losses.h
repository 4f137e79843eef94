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

// Training objective over a predicted part probability map:
//
//   total = ce + lambda1 * rec + lambda2 * gm
//
// ce is the part-level negative log-likelihood, rec the object-level negative
// log-likelihood of the part probabilities summed within each object, and gm
// the graph-matching distance between ground-truth and predicted adjacency.
// Pixel terms are averaged over the image. Every term returns its gradient
// with respect to the probability entries (channel-last, like ProbMap).

#ifndef PARTGRAPH_LOSSES_H_
#define PARTGRAPH_LOSSES_H_

#include <string>
#include <vector>

#include "partgraph/adjacency.h"
#include "partgraph/segmap.h"

namespace partgraph {

// Lower clamp applied to probabilities before taking the log.
inline constexpr double kLogClamp = 1e-12;

struct LossWeights {
  double lambda1 = 1e-3;  // reconstruction
  double lambda2 = 1e-1;  // graph matching

  void validate() const;
};

struct LossReport {
  double ce = 0.0;
  double rec = 0.0;
  double gm = 0.0;
  double total = 0.0;
};

struct LossTerm {
  double value = 0.0;
  std::vector<double> grad;
};

LossTerm cross_entropy(const ProbMap& pred, const LabelMap& gt);

LossTerm reconstruction_loss(const ProbMap& pred, const LabelMap& gt_objects,
                             const PartsToObjectsMapping& mapping);

struct TotalLoss {
  LossReport report;
  std::vector<double> grad;
};

// gt_graph is the normalized ground-truth adjacency of gt_parts (callers
// that evaluate many predictions against one target compute it once).
TotalLoss total_loss(const ProbMap& pred, const LabelMap& gt_parts,
                     const LabelMap& gt_objects,
                     const PartsToObjectsMapping& mapping,
                     const AdjacencyMatrix& gt_graph,
                     const AdjacencyConfig& cfg, const LossWeights& weights);

// Builds the ground-truth graph from gt_parts.
TotalLoss total_loss(const ProbMap& pred, const LabelMap& gt_parts,
                     const LabelMap& gt_objects,
                     const PartsToObjectsMapping& mapping,
                     const AdjacencyConfig& cfg, const LossWeights& weights);

// Normalized ground-truth graph used by total_loss.
AdjacencyMatrix ground_truth_graph(const LabelMap& gt_parts, int num_parts,
                                   const AdjacencyConfig& cfg);

}  // namespace partgraph

#endif  // PARTGRAPH_LOSSES_H_
