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

// Toy-scale part segmentation network conditioned on object-level maps.
//
// Layout for k decoder stages (all convolutions "same"-padded):
//
//   embedding   object probs -> S_1 .. S_k'   stride-2 conv + ReLU each;
//               S_l sits at 1/2^l resolution
//   encoder     rgb -> E_1 .. E_k             stride-2 conv + ReLU each
//   decoder     stage i = 1..k:
//                 D_i = ReLU(conv(i == 1 ? E_k : up2(F_{i-1})))
//                 F_i = D_i ++ S_{k+1-i}      (channel concat, D_i first)
//               D_i sits at 1/2^(k+1-i) resolution, matching S_{k+1-i}.
//   head        softmax(conv1x1(up2(F_k)))  -> N_p channels at full size
//
// Conditioning `single` concatenates only at stage 1 (the deepest level);
// `off` never concatenates and ignores the object input entirely.
//
// Tensors are double precision. Parameters are seeded uniform in
// +-1/sqrt(fan_in). Training is plain SGD on the full objective with a
// polynomial learning-rate decay of power 0.9.

#ifndef PARTGRAPH_CONDNET_H_
#define PARTGRAPH_CONDNET_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "partgraph/adjacency.h"
#include "partgraph/losses.h"
#include "partgraph/segmap.h"
#include "partgraph/synth.h"
#include "partgraph/tensor.h"

namespace partgraph {

// ---------------------------------------------------------------------------
// Kernels.

// Read-only view of convolution parameters.
// weights: [out_channels][in_channels][kernel][kernel]; bias: [out_channels].
struct ConvView {
  int out_channels;
  int in_channels;
  int kernel;
  std::span<const double> weights;
  std::span<const double> bias;
};

// Cross-correlation with zero "same" padding (kernel / 2 on each side).
// Output size is ceil(input / stride) per axis.
Tensor conv2d_forward(const Tensor& x, const ConvView& conv, int stride);

struct ConvGrads {
  Tensor input;
  std::vector<double> weights;
  std::vector<double> bias;
};

ConvGrads conv2d_backward(const Tensor& x, const ConvView& conv, int stride,
                          const Tensor& grad_out);

Tensor relu(const Tensor& x);
// Gradient of relu at pre-activation `pre`.
Tensor relu_backward(const Tensor& pre, const Tensor& grad_out);

Tensor upsample2(const Tensor& x);
Tensor upsample2_backward(const Tensor& grad_out);

// Nearest-neighbor upsampling by the smallest integer factor covering
// (height, width), then a center crop to exactly (height, width).
Tensor resize_nearest_crop(const Tensor& x, int height, int width);
Tensor resize_nearest_crop_backward(const Tensor& x_shape_source,
                                    const Tensor& grad_out);

// Per-pixel softmax over channels.
Tensor softmax_channels(const Tensor& logits);
// Gradient with respect to logits, given probs = softmax(logits).
Tensor softmax_backward(const Tensor& probs, const Tensor& grad_probs);

// ---------------------------------------------------------------------------
// Parameters.

struct Param {
  std::string name;
  std::vector<int> shape;
  std::vector<double> value;

  friend bool operator==(const Param&, const Param&) = default;
};

class ParamSet {
 public:
  Param& add(std::string name, std::vector<int> shape);
  const Param& get(const std::string& name) const;
  Param& get(const std::string& name);

  std::vector<Param>& params() { return params_; }
  const std::vector<Param>& params() const { return params_; }
  std::size_t total_size() const;

  // Zero-valued set with identical names and shapes.
  ParamSet zeros_like() const;

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  std::vector<Param> params_;
};

// TPRM: "TPRM" | u8 version = 1 | u32 count | count x (u32 name_len | name |
// u32 rank | rank x u32 dims | prod(dims) x f32), little-endian.
inline constexpr std::uint8_t kParamsVersion = 1;
void save_params(const ParamSet& params, const std::filesystem::path& path);
ParamSet load_params(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Configuration.

struct EmbeddingConfig {
  std::vector<int> kernel_sizes = {7, 5, 3, 3};
  std::vector<int> strides = {2, 2, 2, 2};
  std::vector<int> channel_sizes = {8, 16, 32, 64};

  int num_layers() const { return static_cast<int>(kernel_sizes.size()); }
  void validate() const;
};

enum class Conditioning { kMulti, kSingle, kOff };

Conditioning parse_conditioning(const std::string& name);
std::string to_string(Conditioning mode);

struct ToyNetConfig {
  int input_channels = 3;
  int num_parts = 7;
  int num_objects = 4;
  int stages = 4;  // k
  std::vector<int> encoder_channels = {8, 16, 32, 64};
  std::vector<int> decoder_channels = {32, 16, 16, 16};
  int kernel = 3;       // encoder and decoder kernels
  int head_kernel = 1;
  EmbeddingConfig embedding;
  Conditioning conditioning = Conditioning::kMulti;
  std::uint64_t seed = 7;

  void validate() const;
  // Whether decoder stage i (1-based) concatenates an embedding level.
  bool conditions_stage(int i) const;
  // 1-based embedding level consumed by decoder stage i: k + 1 - i.
  int embedding_level_for_stage(int i) const { return stages + 1 - i; }
};

ToyNetConfig parse_toy_net_config(const std::string& json_text);
std::string toy_net_config_to_json(const ToyNetConfig& cfg);

ParamSet init_params(const ToyNetConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Network operations.

// Zero-pads object probs (bottom/right) to a multiple of the total stride,
// then runs the embedding cascade. Returns S_1 .. S_k'.
std::vector<Tensor> embed_objects(const Tensor& object_probs,
                                  const EmbeddingConfig& cfg,
                                  const ParamSet& params);

// Channel concat of decoder_feat and level k + 1 - stage of the pyramid
// (1-based stage); identity when the stage is not conditioned. On a spatial
// mismatch the smaller tensor is resized with resize_nearest_crop to the
// larger one; a tensor larger on one axis but smaller on the other is an
// error.
Tensor concat_condition(const Tensor& decoder_feat,
                        const std::vector<Tensor>& pyramid, int stage,
                        const ToyNetConfig& cfg);

struct ForwardCache;  // intermediate activations for backprop

class ToyNet {
 public:
  ToyNet(ToyNetConfig cfg, ParamSet params);

  const ToyNetConfig& config() const { return cfg_; }
  const ParamSet& params() const { return params_; }
  ParamSet& mutable_params() { return params_; }

  // Returns per-pixel part probabilities as a channel-major tensor.
  Tensor forward(const Tensor& rgb, const Tensor& object_probs,
                 ForwardCache* cache = nullptr) const;

  struct Gradients {
    ParamSet params;
    Tensor rgb;
    Tensor object_probs;
  };
  Gradients backward(const ForwardCache& cache,
                     const Tensor& grad_probs) const;

 private:
  ToyNetConfig cfg_;
  ParamSet params_;
};

struct ForwardCache {
  Tensor rgb;
  Tensor object_padded;
  std::vector<Tensor> embed_in, embed_pre, embed_out;
  std::vector<Tensor> enc_in, enc_pre, enc_out;
  std::vector<Tensor> dec_in, dec_pre, dec_out, dec_cat;
  Tensor head_in;
  Tensor probs;
};

ProbMap toy_forward(const Tensor& rgb, const ProbMap& object_probs,
                    const ToyNetConfig& cfg, const ParamSet& params);

// ---------------------------------------------------------------------------
// Training.

struct TrainConfig {
  int steps = 200;
  double lr = 5e-3;
  double decay_power = 0.9;
  std::uint64_t seed = 7;
  int batch_size = 0;  // 0 = full dataset every step
};

struct TrainResult {
  ParamSet params;
  std::vector<LossReport> trace;  // mean over the batch, before each update
};

// Learning rate at step t (0-based): lr * (1 - t / steps)^power.
double poly_lr(const TrainConfig& cfg, int step);

// Ground-truth object maps are one-hot encoded as the conditioning input.
TrainResult train_toy(const std::vector<Scene>& dataset,
                      const ToyNetConfig& net, const LossWeights& weights,
                      const AdjacencyConfig& adjacency,
                      const TrainConfig& train);

// Mean loss terms of a trained network over held-out scenes.
LossReport evaluate_toy(const std::vector<Scene>& scenes,
                        const ToyNetConfig& net, const ParamSet& params,
                        const LossWeights& weights,
                        const AdjacencyConfig& adjacency);

}  // namespace partgraph

#endif  // PARTGRAPH_CONDNET_H_
