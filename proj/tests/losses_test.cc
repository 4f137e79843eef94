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
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "partgraph/errors.h"
#include "test_util.h"

namespace partgraph {
namespace {

using testing::central_difference;
using testing::random_blob_map;
using testing::random_label_map;
using testing::random_mapping;
using testing::random_prob_map;
using testing::relative_error;

std::vector<double> flat(const ProbMap& m) {
  return {m.data().begin(), m.data().end()};
}

// Per-pixel loop oracles, written against the raw probability array.
double ce_oracle(const std::vector<double>& probs, int c, const LabelMap& gt) {
  double s = 0.0;
  for (std::size_t p = 0; p < gt.pixel_count(); ++p) {
    s += -std::log(std::max(probs[p * c + gt[p]], kLogClamp));
  }
  return s / static_cast<double>(gt.pixel_count());
}

double rec_oracle(const std::vector<double>& probs, int c,
                  const LabelMap& objects, const std::vector<int>& bounds) {
  double s = 0.0;
  for (std::size_t p = 0; p < objects.pixel_count(); ++p) {
    double q = 0.0;
    for (int k = bounds[objects[p]]; k < bounds[objects[p] + 1]; ++k) {
      q += probs[p * c + k];
    }
    s += -std::log(std::max(q, kLogClamp));
  }
  return s / static_cast<double>(objects.pixel_count());
}

TEST(CrossEntropyTest, OneHotGivesZero) {
  Xorshift64Star rng(71);
  const LabelMap gt = random_label_map(rng, 5, 4, 4);
  const LossTerm t = cross_entropy(one_hot(gt, 4), gt);
  EXPECT_EQ(t.value, 0.0);
}

TEST(CrossEntropyTest, UniformGivesLogC) {
  for (int c : {2, 3, 7}) {
    const LabelMap gt(3, 3, c);
    const ProbMap uniform(3, 3, c, std::vector<double>(9 * c, 1.0 / c));
    EXPECT_NEAR(cross_entropy(uniform, gt).value, std::log(c), 1e-15);
  }
}

TEST(CrossEntropyTest, ZeroProbabilityIsClamped) {
  const LabelMap gt(1, 1, 2, {1});
  const LossTerm t = cross_entropy(ProbMap(1, 1, 2, {1.0, 0.0}), gt);
  EXPECT_DOUBLE_EQ(t.value, -std::log(kLogClamp));
  EXPECT_TRUE(std::isfinite(t.grad[1]));
}

TEST(CrossEntropyTest, MatchesLoopOracleAndFiniteDifferences) {
  Xorshift64Star rng(72);
  for (int trial = 0; trial < 10; ++trial) {
    const LabelMap gt = random_label_map(rng, 5, 5, 4);
    const ProbMap pred = random_prob_map(rng, 5, 5, 4);
    const LossTerm t = cross_entropy(pred, gt);
    const std::vector<double> x = flat(pred);
    EXPECT_NEAR(t.value, ce_oracle(x, 4, gt), 1e-13);
    const auto f = [&](const std::vector<double>& v) { return ce_oracle(v, 4, gt); };
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_LT(relative_error(t.grad[i], central_difference(f, x, i, 1e-5)),
                1e-5);
    }
  }
}

TEST(CrossEntropyTest, ShapeAndLabelErrors) {
  EXPECT_THROW(cross_entropy(one_hot(LabelMap(2, 2, 3), 3), LabelMap(3, 2, 3)),
               DomainError);
  EXPECT_THROW(cross_entropy(one_hot(LabelMap(1, 1, 2), 2), LabelMap(1, 1, 5, {4})),
               DomainError);
}

TEST(ReconstructionLossTest, ConsistentOneHotGivesZero) {
  Xorshift64Star rng(73);
  const PartsToObjectsMapping m({0, 1, 3, 6});
  const LabelMap parts = random_blob_map(rng, 7, 6, 6);
  EXPECT_EQ(reconstruction_loss(one_hot(parts, 6), project_labels(parts, m), m).value,
            0.0);
}

TEST(ReconstructionLossTest, WrongPartOfCorrectObjectIsPenalizedOnlyByCe) {
  // Three parts (background, two parts of one object), two objects.
  const PartsToObjectsMapping m({0, 1, 3});
  const LabelMap parts(4, 2, 3, {0, 1, 1, 2, 0, 2, 2, 1});
  const LabelMap swapped(4, 2, 3, {0, 2, 2, 1, 0, 1, 1, 2});
  const ProbMap pred = one_hot(swapped, 3);
  EXPECT_EQ(reconstruction_loss(pred, project_labels(parts, m), m).value, 0.0);
  EXPECT_GT(cross_entropy(pred, parts).value, 0.0);
}

TEST(ReconstructionLossTest, MatchesCompositionOracleAndFiniteDifferences) {
  Xorshift64Star rng(74);
  for (int trial = 0; trial < 10; ++trial) {
    const int parts = rng.uniform_int(2, 6);
    const PartsToObjectsMapping m = random_mapping(rng, parts);
    const LabelMap objects = random_label_map(rng, 5, 5, m.num_objects());
    const ProbMap pred = random_prob_map(rng, 5, 5, parts);
    const LossTerm t = reconstruction_loss(pred, objects, m);
    const std::vector<double> x = flat(pred);
    const auto f = [&](const std::vector<double>& v) {
      return rec_oracle(v, parts, objects, m.boundaries());
    };
    EXPECT_NEAR(t.value, f(x), 1e-13);
    EXPECT_NEAR(t.value, cross_entropy(sum_probability(pred, m), objects).value,
                1e-13);
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_LT(relative_error(t.grad[i], central_difference(f, x, i, 1e-5)),
                1e-5);
    }
  }
}

TEST(ReconstructionLossTest, GradientIsSharedAcrossObjectParts) {
  Xorshift64Star rng(75);
  const PartsToObjectsMapping m({0, 1, 4});
  const LabelMap objects(3, 1, 2, {1, 1, 0});
  const LossTerm t = reconstruction_loss(random_prob_map(rng, 3, 1, 4), objects, m);
  EXPECT_EQ(t.grad[1], t.grad[2]);
  EXPECT_EQ(t.grad[2], t.grad[3]);
  EXPECT_EQ(t.grad[0], 0.0);
  EXPECT_LT(t.grad[8], 0.0);  // pixel 2 belongs to object 0 = part 0
  EXPECT_EQ(t.grad[9], 0.0);
  EXPECT_EQ(t.grad[11], 0.0);
}

TEST(ReconstructionLossTest, MappingMismatchIsDomainError) {
  const PartsToObjectsMapping m({0, 1, 3});
  EXPECT_THROW(reconstruction_loss(one_hot(LabelMap(2, 2, 4), 4), LabelMap(2, 2, 2), m),
               DomainError);
  EXPECT_THROW(reconstruction_loss(one_hot(LabelMap(1, 1, 3), 3),
                                   LabelMap(1, 1, 3, {2}), m),
               DomainError);
}

AdjacencyConfig smooth_config() {
  AdjacencyConfig cfg;
  cfg.threshold = 2;
  cfg.soft = {DilationMode::kSmoothMax, 20.0};
  return cfg;
}

TEST(TotalLossTest, ZeroWeightsReduceToCrossEntropy) {
  Xorshift64Star rng(76);
  const PartsToObjectsMapping m({0, 1, 3});
  const LabelMap parts = random_blob_map(rng, 6, 6, 3);
  const ProbMap pred = random_prob_map(rng, 6, 6, 3);
  const TotalLoss t = total_loss(pred, parts, project_labels(parts, m), m,
                                 AdjacencyConfig{}, {0.0, 0.0});
  const LossTerm ce = cross_entropy(pred, parts);
  EXPECT_EQ(t.report.total, t.report.ce);
  EXPECT_EQ(t.report.ce, ce.value);
  EXPECT_EQ(t.grad, ce.grad);
}

TEST(TotalLossTest, OneHotGroundTruthIsZero) {
  Xorshift64Star rng(77);
  const PartsToObjectsMapping m({0, 1, 3, 5});
  const LabelMap parts = random_blob_map(rng, 9, 8, 5);
  const TotalLoss t = total_loss(one_hot(parts, 5), parts,
                                 project_labels(parts, m), m, AdjacencyConfig{},
                                 LossWeights{});
  EXPECT_EQ(t.report.ce, 0.0);
  EXPECT_EQ(t.report.rec, 0.0);
  EXPECT_EQ(t.report.gm, 0.0);
  EXPECT_EQ(t.report.total, 0.0);
}

TEST(TotalLossTest, ReportAndGradientAreWeightedSums) {
  Xorshift64Star rng(78);
  for (int trial = 0; trial < 10; ++trial) {
    const PartsToObjectsMapping m({0, 1, 3, 4});
    const LabelMap parts = random_blob_map(rng, 6, 5, 4);
    const LabelMap objects = project_labels(parts, m);
    const ProbMap pred = random_prob_map(rng, 6, 5, 4);
    const AdjacencyConfig cfg = smooth_config();
    const LossWeights w{rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0)};
    const TotalLoss t = total_loss(pred, parts, objects, m, cfg, w);
    const LossTerm ce = cross_entropy(pred, parts);
    const LossTerm rec = reconstruction_loss(pred, objects, m);
    const AdjacencyMatrix gt = ground_truth_graph(parts, 4, cfg);
    const GmLossGrad gm = gm_loss_and_grad(pred, gt, cfg);
    EXPECT_EQ(t.report.ce, ce.value);
    EXPECT_EQ(t.report.rec, rec.value);
    EXPECT_EQ(t.report.gm, gm.loss);
    EXPECT_NEAR(t.report.total, ce.value + w.lambda1 * rec.value + w.lambda2 * gm.loss,
                1e-9);
    for (std::size_t i = 0; i < t.grad.size(); ++i) {
      EXPECT_NEAR(t.grad[i],
                  ce.grad[i] + w.lambda1 * rec.grad[i] + w.lambda2 * gm.grad[i],
                  1e-12);
    }
  }
}

TEST(TotalLossTest, GradientMatchesFiniteDifferences) {
  Xorshift64Star rng(79);
  for (int trial = 0; trial < 8; ++trial) {
    const PartsToObjectsMapping m({0, 1, 3});
    const LabelMap parts = random_blob_map(rng, 6, 6, 3);
    const LabelMap objects = project_labels(parts, m);
    const ProbMap pred = random_prob_map(rng, 6, 6, 3);
    const AdjacencyConfig cfg = smooth_config();
    const LossWeights w;
    const TotalLoss t = total_loss(pred, parts, objects, m, cfg, w);
    const std::vector<double> x = flat(pred);
    const auto f = [&](const std::vector<double>& v) {
      return total_loss(ProbMap::Unchecked(6, 6, 3, v), parts, objects, m, cfg, w)
          .report.total;
    };
    for (int k = 0; k < 20; ++k) {
      const auto i = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(x.size()) - 1));
      EXPECT_LT(relative_error(t.grad[i], central_difference(f, x, i, 1e-4)),
                1e-4);
    }
  }
}

TEST(TotalLossTest, ComponentErrorsNameTheComponent) {
  const PartsToObjectsMapping m({0, 1, 3});
  const LabelMap parts(2, 2, 3);
  try {
    total_loss(one_hot(parts, 3), parts, LabelMap(2, 2, 5, {0, 0, 0, 4}), m,
               AdjacencyConfig{}, LossWeights{});
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("L_rec", 0), 0u) << e.what();
  }
  EXPECT_THROW(total_loss(one_hot(parts, 3), parts, project_labels(parts, m), m,
                          AdjacencyConfig{}, {-1.0, 0.0}),
               DomainError);
}

}  // namespace
}  // namespace partgraph
