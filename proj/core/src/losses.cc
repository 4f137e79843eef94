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

#include "partgraph/losses.h"

#include <cmath>
#include <utility>

#include "partgraph/errors.h"

namespace partgraph {
namespace {

void check_same_shape(const ProbMap& pred, const LabelMap& gt,
                      const char* what) {
  if (!pred.same_shape(gt)) {
    throw DomainError(std::string(what) + ": prediction is " +
                      std::to_string(pred.width()) + "x" +
                      std::to_string(pred.height()) + " but ground truth is " +
                      gt.shape_string());
  }
}

// Mean negative log-likelihood of `truth` under per-pixel class
// probabilities `prob(p, c)`. Writes d loss / d prob(p, truth[p]) into
// `grad_true` (zero where the clamp is active).
template <typename ProbFn>
double mean_nll(std::size_t pixels, const LabelMap& truth, ProbFn prob,
                std::vector<double>& grad_true) {
  grad_true.assign(pixels, 0.0);
  const double inv_n = 1.0 / static_cast<double>(pixels);
  double sum = 0.0;
  for (std::size_t p = 0; p < pixels; ++p) {
    const double q = prob(p, truth[p]);
    if (q > kLogClamp) {
      sum -= std::log(q);
      grad_true[p] = -inv_n / q;
    } else {
      sum -= std::log(kLogClamp);
    }
  }
  return sum * inv_n;
}

}  // namespace

void LossWeights::validate() const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) {
    throw DomainError("loss weights must be >= 0");
  }
}

LossTerm cross_entropy(const ProbMap& pred, const LabelMap& gt) {
  check_same_shape(pred, gt, "cross_entropy");
  const int c = pred.num_classes();
  for (std::size_t p = 0; p < gt.pixel_count(); ++p) {
    if (gt[p] >= c) {
      throw DomainError("cross_entropy: label " + std::to_string(gt[p]) +
                        " exceeds " + std::to_string(c) + " channels");
    }
  }
  std::vector<double> g;
  LossTerm out;
  out.value = mean_nll(
      pred.pixel_count(), gt,
      [&](std::size_t p, int k) { return pred.at(p, k); }, g);
  out.grad.assign(pred.data().size(), 0.0);
  for (std::size_t p = 0; p < g.size(); ++p) {
    out.grad[p * c + gt[p]] = g[p];
  }
  return out;
}

LossTerm reconstruction_loss(const ProbMap& pred, const LabelMap& gt_objects,
                             const PartsToObjectsMapping& mapping) {
  check_same_shape(pred, gt_objects, "reconstruction_loss");
  const ProbMap summed = sum_probability(pred, mapping);
  for (std::size_t p = 0; p < gt_objects.pixel_count(); ++p) {
    if (gt_objects[p] >= mapping.num_objects()) {
      throw DomainError("reconstruction_loss: object label " +
                        std::to_string(gt_objects[p]) + " exceeds " +
                        std::to_string(mapping.num_objects()) + " objects");
    }
  }
  std::vector<double> g;
  LossTerm out;
  out.value = mean_nll(
      pred.pixel_count(), gt_objects,
      [&](std::size_t p, int j) { return summed.at(p, j); }, g);
  // Every part channel of the true object receives the object's gradient.
  const int c = pred.num_classes();
  out.grad.assign(pred.data().size(), 0.0);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const int j = gt_objects[p];
    for (int i = mapping.first_part(j); i < mapping.end_part(j); ++i) {
      out.grad[p * c + i] = g[p];
    }
  }
  return out;
}

AdjacencyMatrix ground_truth_graph(const LabelMap& gt_parts, int num_parts,
                                   const AdjacencyConfig& cfg) {
  return normalize_rows(adjacency_from_labels(gt_parts, num_parts, cfg));
}

TotalLoss total_loss(const ProbMap& pred, const LabelMap& gt_parts,
                     const LabelMap& gt_objects,
                     const PartsToObjectsMapping& mapping,
                     const AdjacencyMatrix& gt_graph,
                     const AdjacencyConfig& cfg, const LossWeights& weights) {
  weights.validate();
  if (!gt_parts.same_shape(gt_objects)) {
    throw DomainError("total_loss: part map is " + gt_parts.shape_string() +
                      " but object map is " + gt_objects.shape_string());
  }
  const auto wrap = [](const char* term, auto&& fn) {
    try {
      return fn();
    } catch (const DomainError& e) {
      throw DomainError(std::string(term) + ": " + e.what());
    }
  };
  const LossTerm ce = wrap("L_CE", [&] { return cross_entropy(pred, gt_parts); });
  const LossTerm rec = wrap("L_rec", [&] {
    return reconstruction_loss(pred, gt_objects, mapping);
  });
  const GmLossGrad gm =
      wrap("L_GM", [&] { return gm_loss_and_grad(pred, gt_graph, cfg); });

  TotalLoss out;
  out.report.ce = ce.value;
  out.report.rec = rec.value;
  out.report.gm = gm.loss;
  out.report.total =
      ce.value + weights.lambda1 * rec.value + weights.lambda2 * gm.loss;
  out.grad.resize(ce.grad.size());
  for (std::size_t k = 0; k < out.grad.size(); ++k) {
    out.grad[k] = ce.grad[k] + weights.lambda1 * rec.grad[k] +
                  weights.lambda2 * gm.grad[k];
  }
  return out;
}

TotalLoss total_loss(const ProbMap& pred, const LabelMap& gt_parts,
                     const LabelMap& gt_objects,
                     const PartsToObjectsMapping& mapping,
                     const AdjacencyConfig& cfg, const LossWeights& weights) {
  const AdjacencyMatrix gt_graph = [&] {
    try {
      return ground_truth_graph(gt_parts, pred.num_classes(), cfg);
    } catch (const DomainError& e) {
      throw DomainError(std::string("L_GM: ") + e.what());
    }
  }();
  return total_loss(pred, gt_parts, gt_objects, mapping, gt_graph, cfg,
                    weights);
}

}  // namespace partgraph
