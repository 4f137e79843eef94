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

#include "partgraph/adjacency.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "partgraph/errors.h"
#include "partgraph/parallel.h"

namespace partgraph {
namespace {

std::vector<BinaryMask> part_masks(const LabelMap& map, int num_parts) {
  std::vector<BinaryMask> masks(num_parts,
                                BinaryMask(map.width(), map.height()));
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) masks[map.at(x, y)].set(x, y);
  }
  return masks;
}

void apply_background_and_weighting(std::vector<double>& m, int n,
                                    const AdjacencyConfig& cfg) {
  if (!cfg.include_background && n > 0) {
    for (int k = 0; k < n; ++k) {
      m[k] = 0.0;
      m[static_cast<std::size_t>(k) * n] = 0.0;
    }
  }
  if (cfg.weighting == EdgeWeighting::kUnweighted) {
    for (double& v : m) v = std::min(v, 1.0);
  }
}

}  // namespace

AdjacencyMethod parse_adjacency_method(const std::string& name) {
  if (name == "dilate" || name == "dilate_intersect") {
    return AdjacencyMethod::kDilateIntersect;
  }
  if (name == "exact" || name == "exact_distance") {
    return AdjacencyMethod::kExactDistance;
  }
  throw DomainError("unknown adjacency method \"" + name +
                    "\" (expected dilate|exact)");
}

std::string to_string(AdjacencyMethod method) {
  return method == AdjacencyMethod::kDilateIntersect ? "dilate_intersect"
                                                     : "exact_distance";
}

EdgeWeighting parse_edge_weighting(const std::string& name) {
  if (name == "weighted") return EdgeWeighting::kWeighted;
  if (name == "unweighted") return EdgeWeighting::kUnweighted;
  throw DomainError("unknown edge weighting \"" + name +
                    "\" (expected weighted|unweighted)");
}

std::string to_string(EdgeWeighting weighting) {
  return weighting == EdgeWeighting::kWeighted ? "weighted" : "unweighted";
}

void AdjacencyConfig::validate() const {
  if (threshold < 0) {
    throw DomainError("distance threshold T must be >= 0, got " +
                      std::to_string(threshold));
  }
  if (soft.mode == DilationMode::kSmoothMax && !(soft.beta > 0.0)) {
    throw DomainError("smooth-max beta must be > 0");
  }
}

AdjacencyMatrix::AdjacencyMatrix(int size, std::vector<double> entries,
                                 MatrixKind kind)
    : size_(size), entries_(std::move(entries)), kind_(kind) {
  if (size <= 0) throw DomainError("adjacency matrix size must be positive");
  if (entries_.size() != static_cast<std::size_t>(size) * size) {
    throw DomainError("adjacency matrix needs " +
                      std::to_string(size * size) + " entries, got " +
                      std::to_string(entries_.size()));
  }
  for (int i = 0; i < size; ++i) {
    if ((*this)(i, i) != 0.0) {
      throw DomainError("adjacency diagonal entry " + std::to_string(i) +
                        " is nonzero");
    }
    for (int j = 0; j < size; ++j) {
      if (!((*this)(i, j) >= 0.0) || !std::isfinite((*this)(i, j))) {
        throw DomainError("adjacency entry (" + std::to_string(i) + ", " +
                          std::to_string(j) + ") is negative or non-finite");
      }
    }
    if (kind == MatrixKind::kNormalized) {
      const double n = row_norm(i);
      if (n != 0.0 && std::abs(n - 1.0) > kNormTolerance) {
        throw DomainError("normalized adjacency row " + std::to_string(i) +
                          " has norm " + std::to_string(n));
      }
    }
  }
}

double AdjacencyMatrix::row_norm(int i) const {
  double s = 0.0;
  for (int j = 0; j < size_; ++j) s += (*this)(i, j) * (*this)(i, j);
  return std::sqrt(s);
}

bool AdjacencyMatrix::is_symmetric() const {
  for (int i = 0; i < size_; ++i) {
    for (int j = i + 1; j < size_; ++j) {
      if ((*this)(i, j) != (*this)(j, i)) return false;
    }
  }
  return true;
}

AdjacencyMatrix adjacency_from_labels(const LabelMap& map, int num_parts,
                                      const AdjacencyConfig& cfg) {
  cfg.validate();
  if (num_parts <= 0) throw DomainError("num_parts must be positive");
  for (std::size_t p = 0; p < map.pixel_count(); ++p) {
    if (map[p] >= num_parts) {
      throw DomainError("label " + std::to_string(map[p]) + " at pixel " +
                        std::to_string(p) + " exceeds num_parts " +
                        std::to_string(num_parts));
    }
  }
  const int n = num_parts;
  const auto masks = part_masks(map, n);
  std::vector<double> counts(static_cast<std::size_t>(n) * n, 0.0);

  if (cfg.method == AdjacencyMethod::kDilateIntersect) {
    const StructuringElement elem = cfg.dilation_element();
    std::vector<BinaryMask> dilated(n, BinaryMask(map.width(), map.height()));
    parallel_for(n, [&](std::size_t i) {
      dilated[i] = masks[i].count() ? dilate(masks[i], elem) : masks[i];
    });
    // Integer accumulation per pixel; order-independent.
    std::vector<long long> c(counts.size(), 0);
    std::vector<int> covering;
    for (std::size_t p = 0; p < map.pixel_count(); ++p) {
      covering.clear();
      for (int i = 0; i < n; ++i) {
        if (dilated[i][p]) covering.push_back(i);
      }
      for (std::size_t a = 0; a < covering.size(); ++a) {
        for (std::size_t b = a + 1; b < covering.size(); ++b) {
          ++c[static_cast<std::size_t>(covering[a]) * n + covering[b]];
          ++c[static_cast<std::size_t>(covering[b]) * n + covering[a]];
        }
      }
    }
    for (std::size_t k = 0; k < c.size(); ++k) {
      counts[k] = static_cast<double>(c[k]);
    }
  } else {
    const StructuringElement reach{cfg.shape, cfg.threshold};
    std::vector<BinaryMask> grown(n, BinaryMask(map.width(), map.height()));
    parallel_for(n, [&](std::size_t j) {
      grown[j] = masks[j].count() ? dilate(masks[j], reach) : masks[j];
    });
    for (int i = 0; i < n; ++i) {
      for (std::size_t p = 0; p < map.pixel_count(); ++p) {
        if (map[p] != i) continue;
        for (int j = 0; j < n; ++j) {
          if (j != i && grown[j][p]) {
            counts[static_cast<std::size_t>(i) * n + j] += 1.0;
          }
        }
      }
    }
  }
  apply_background_and_weighting(counts, n, cfg);
  return AdjacencyMatrix(n, std::move(counts), MatrixKind::kRawCounts);
}

AdjacencyMatrix normalize_rows(const AdjacencyMatrix& raw) {
  if (raw.kind() != MatrixKind::kRawCounts) {
    throw DomainError("normalize_rows expects a raw-count matrix");
  }
  const int n = raw.size();
  std::vector<double> out(raw.entries());
  for (int i = 0; i < n; ++i) {
    const double norm = raw.row_norm(i);
    if (norm == 0.0) continue;
    for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(i) * n + j] /= norm;
  }
  return AdjacencyMatrix(n, std::move(out), MatrixKind::kNormalized);
}

namespace {

struct SoftForward {
  std::vector<Plane> channels;
  std::vector<Plane> dilated;
  std::vector<double> products;  // pre-weighting pair sums
  std::vector<double> raw;       // post-weighting
};

SoftForward soft_forward(const ProbMap& pred, const AdjacencyConfig& cfg) {
  cfg.validate();
  const int n = pred.num_classes();
  const StructuringElement elem = cfg.dilation_element();
  SoftForward f;
  f.channels.resize(n);
  f.dilated.resize(n);
  parallel_for(n, [&](std::size_t i) {
    f.channels[i] = Plane{pred.width(), pred.height(),
                          pred.channel(static_cast<int>(i))};
    f.dilated[i] = soft_dilate(f.channels[i], elem, cfg.soft);
  });
  f.products.assign(static_cast<std::size_t>(n) * n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < static_cast<std::size_t>(n); ++j) {
      double s = 0.0;
      const auto& a = f.dilated[i].values;
      const auto& b = f.dilated[j].values;
      for (std::size_t p = 0; p < a.size(); ++p) s += a[p] * b[p];
      f.products[i * n + j] = s;
      f.products[j * n + i] = s;
    }
  });
  f.raw = f.products;
  apply_background_and_weighting(f.raw, n, cfg);
  return f;
}

}  // namespace

SoftAdjacency soft_adjacency(const ProbMap& pred, const AdjacencyConfig& cfg) {
  SoftForward f = soft_forward(pred, cfg);
  AdjacencyMatrix raw(pred.num_classes(), std::move(f.raw),
                      MatrixKind::kRawCounts);
  AdjacencyMatrix normalized = normalize_rows(raw);
  return {std::move(raw), std::move(normalized)};
}

double gm_loss(const AdjacencyMatrix& gt, const AdjacencyMatrix& pred) {
  if (gt.size() != pred.size()) {
    throw DomainError("graph size mismatch: " + std::to_string(gt.size()) +
                      " vs " + std::to_string(pred.size()));
  }
  if (gt.kind() != MatrixKind::kNormalized ||
      pred.kind() != MatrixKind::kNormalized) {
    throw DomainError("gm_loss expects row-normalized matrices");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < gt.entries().size(); ++k) {
    const double d = gt.entries()[k] - pred.entries()[k];
    s += d * d;
  }
  return std::sqrt(s);
}

GmLossGrad gm_loss_and_grad(const ProbMap& pred, const AdjacencyMatrix& gt,
                            const AdjacencyConfig& cfg) {
  if (gt.kind() != MatrixKind::kNormalized) {
    throw DomainError("ground-truth graph must be row-normalized");
  }
  const int n = pred.num_classes();
  if (gt.size() != n) {
    throw DomainError("ground-truth graph has " + std::to_string(gt.size()) +
                      " parts but prediction has " + std::to_string(n) +
                      " channels");
  }
  SoftForward f = soft_forward(pred, cfg);
  const AdjacencyMatrix raw(n, f.raw, MatrixKind::kRawCounts);
  const AdjacencyMatrix m = normalize_rows(raw);

  GmLossGrad out;
  out.loss = gm_loss(gt, m);
  out.grad.assign(pred.data().size(), 0.0);
  if (out.loss == 0.0) return out;

  const auto idx = [n](int i, int j) {
    return static_cast<std::size_t>(i) * n + j;
  };
  // d/dM of the Frobenius norm.
  std::vector<double> g_m(idx(n, 0));
  for (std::size_t k = 0; k < g_m.size(); ++k) {
    g_m[k] = (m.entries()[k] - gt.entries()[k]) / out.loss;
  }
  // Through the row normalization M_i = R_i / |R_i|.
  std::vector<double> g_raw(g_m.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    const double norm = raw.row_norm(i);
    if (norm == 0.0) continue;
    double dot = 0.0;
    for (int j = 0; j < n; ++j) dot += g_m[idx(i, j)] * m(i, j);
    for (int k = 0; k < n; ++k) {
      g_raw[idx(i, k)] = (g_m[idx(i, k)] - m(i, k) * dot) / norm;
    }
  }
  // Through background masking and min(s, 1) saturation.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t k = idx(i, j);
      if (i == j || (!cfg.include_background && (i == 0 || j == 0)) ||
          (cfg.weighting == EdgeWeighting::kUnweighted &&
           f.products[k] >= 1.0)) {
        g_raw[k] = 0.0;
      }
    }
  }
  // Through the pairwise product sums, then each channel's dilation.
  const StructuringElement elem = cfg.dilation_element();
  std::vector<Plane> g_channel(n);
  parallel_for(n, [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    Plane g_dil{pred.width(), pred.height(),
                std::vector<double>(pred.pixel_count(), 0.0)};
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double w = g_raw[idx(i, j)] + g_raw[idx(j, i)];
      if (w == 0.0) continue;
      const auto& d = f.dilated[j].values;
      for (std::size_t p = 0; p < d.size(); ++p) g_dil.values[p] += w * d[p];
    }
    g_channel[ii] = soft_dilate_backward(f.channels[ii], elem, cfg.soft, g_dil);
  });
  for (int c = 0; c < n; ++c) {
    for (std::size_t p = 0; p < pred.pixel_count(); ++p) {
      out.grad[p * n + c] = g_channel[c].values[p];
    }
  }
  return out;
}

std::vector<double> gm_loss_grad(const ProbMap& pred,
                                 const AdjacencyMatrix& gt,
                                 const AdjacencyConfig& cfg) {
  return gm_loss_and_grad(pred, gt, cfg).grad;
}

}  // namespace partgraph
