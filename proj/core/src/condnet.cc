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

#include "partgraph/condnet.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <utility>

#include "json.hpp"
#include "partgraph/errors.h"
#include "partgraph/parallel.h"
#include "partgraph/rng.h"

namespace partgraph {
namespace {

int out_size(int in, int stride) { return (in - 1) / stride + 1; }

void check_conv(const Tensor& x, const ConvView& conv, int stride) {
  if (conv.kernel < 1 || conv.kernel % 2 == 0) {
    throw DomainError("convolution kernel must be odd, got " +
                      std::to_string(conv.kernel));
  }
  if (stride < 1) throw DomainError("convolution stride must be >= 1");
  if (x.channels() != conv.in_channels) {
    throw DomainError("convolution expects " +
                      std::to_string(conv.in_channels) +
                      " input channels, got tensor " + x.shape_string());
  }
  const std::size_t wsize = static_cast<std::size_t>(conv.out_channels) *
                            conv.in_channels * conv.kernel * conv.kernel;
  if (conv.weights.size() != wsize ||
      conv.bias.size() != static_cast<std::size_t>(conv.out_channels)) {
    throw DomainError("convolution parameter sizes do not match shape");
  }
}

// Valid output rows y such that 0 <= y * stride + k - pad < in.
std::pair<int, int> valid_range(int out, int in, int stride, int k, int pad) {
  int lo = 0;
  while (lo < out && lo * stride + k - pad < 0) ++lo;
  int hi = out;
  while (hi > lo && (hi - 1) * stride + k - pad >= in) --hi;
  return {lo, hi};
}

ConvView conv_view(const ParamSet& params, const std::string& prefix,
                   int out_c, int in_c, int kernel) {
  const Param& w = params.get(prefix + ".weight");
  const Param& b = params.get(prefix + ".bias");
  return ConvView{out_c, in_c, kernel, w.value, b.value};
}

void add_into(std::vector<double>& dst, const std::vector<double>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  Tensor out(a.channels() + b.channels(), a.height(), a.width());
  std::copy(a.values().begin(), a.values().end(), out.values().begin());
  std::copy(b.values().begin(), b.values().end(),
            out.values().begin() + static_cast<std::ptrdiff_t>(a.size()));
  return out;
}

Tensor slice_channels(const Tensor& t, int first, int count) {
  Tensor out(count, t.height(), t.width());
  const auto begin =
      t.values().begin() + static_cast<std::ptrdiff_t>(first * t.plane_size());
  std::copy(begin, begin + static_cast<std::ptrdiff_t>(out.size()),
            out.values().begin());
  return out;
}

// Spatial target shared by two tensors under the concat resize rule.
std::pair<int, int> concat_target(const Tensor& a, const Tensor& b) {
  if (a.height() >= b.height() && a.width() >= b.width()) {
    return {a.height(), a.width()};
  }
  if (b.height() >= a.height() && b.width() >= a.width()) {
    return {b.height(), b.width()};
  }
  throw DomainError("cannot reconcile spatial shapes " + a.shape_string() +
                    " and " + b.shape_string());
}

Tensor maybe_resize(const Tensor& t, int h, int w) {
  if (t.height() == h && t.width() == w) return t;
  return resize_nearest_crop(t, h, w);
}

Tensor maybe_resize_backward(const Tensor& src, const Tensor& grad) {
  if (src.height() == grad.height() && src.width() == grad.width()) return grad;
  return resize_nearest_crop_backward(src, grad);
}

int total_stride(const EmbeddingConfig& cfg) {
  int s = 1;
  for (int v : cfg.strides) s *= v;
  return s;
}

Tensor pad_to_multiple(const Tensor& x, int multiple) {
  const int h = (x.height() + multiple - 1) / multiple * multiple;
  const int w = (x.width() + multiple - 1) / multiple * multiple;
  if (h == x.height() && w == x.width()) return x;
  Tensor out(x.channels(), h, w);
  for (int c = 0; c < x.channels(); ++c) {
    for (int y = 0; y < x.height(); ++y) {
      for (int xx = 0; xx < x.width(); ++xx) out.at(c, y, xx) = x.at(c, y, xx);
    }
  }
  return out;
}

bool all_finite(const Tensor& t) {
  return std::all_of(t.values().begin(), t.values().end(),
                     [](double v) { return std::isfinite(v); });
}

std::string embed_name(int l) { return "embed." + std::to_string(l); }
std::string enc_name(int l) { return "encoder." + std::to_string(l); }
std::string dec_name(int i) { return "decoder." + std::to_string(i); }

// Channels of F_i (1-based stage), the input of the next stage.
int stage_output_channels(const ToyNetConfig& cfg, int i) {
  int c = cfg.decoder_channels[i - 1];
  if (cfg.conditions_stage(i)) {
    c += cfg.embedding.channel_sizes[cfg.embedding_level_for_stage(i) - 1];
  }
  return c;
}

int decoder_input_channels(const ToyNetConfig& cfg, int i) {
  return i == 1 ? cfg.encoder_channels.back()
                : stage_output_channels(cfg, i - 1);
}

std::vector<Tensor> embed_forward(const Tensor& padded,
                                  const EmbeddingConfig& cfg,
                                  const ParamSet& params,
                                  ForwardCache* cache) {
  std::vector<Tensor> pyramid;
  Tensor cur = padded;
  int in_c = padded.channels();
  for (int l = 0; l < cfg.num_layers(); ++l) {
    const ConvView conv = conv_view(params, embed_name(l), cfg.channel_sizes[l],
                                    in_c, cfg.kernel_sizes[l]);
    Tensor pre = conv2d_forward(cur, conv, cfg.strides[l]);
    Tensor out = relu(pre);
    if (cache) {
      cache->embed_in.push_back(cur);
      cache->embed_pre.push_back(pre);
      cache->embed_out.push_back(out);
    }
    pyramid.push_back(out);
    cur = std::move(out);
    in_c = cfg.channel_sizes[l];
  }
  return pyramid;
}

}  // namespace

// ---------------------------------------------------------------------------
// Kernels.

Tensor conv2d_forward(const Tensor& x, const ConvView& conv, int stride) {
  check_conv(x, conv, stride);
  const int k = conv.kernel, pad = k / 2;
  const int ho = out_size(x.height(), stride), wo = out_size(x.width(), stride);
  Tensor out(conv.out_channels, ho, wo);
  for (int o = 0; o < conv.out_channels; ++o) {
    double* dst = &out.at(o, 0, 0);
    std::fill(dst, dst + out.plane_size(), conv.bias[o]);
    for (int i = 0; i < conv.in_channels; ++i) {
      for (int ky = 0; ky < k; ++ky) {
        const auto [y0, y1] = valid_range(ho, x.height(), stride, ky, pad);
        for (int kx = 0; kx < k; ++kx) {
          const double w =
              conv.weights[((static_cast<std::size_t>(o) * conv.in_channels +
                             i) * k + ky) * k + kx];
          const auto [x0, x1] = valid_range(wo, x.width(), stride, kx, pad);
          for (int y = y0; y < y1; ++y) {
            const int iy = y * stride + ky - pad;
            const double* src = x.ptr(i, iy, 0);
            double* row = dst + static_cast<std::size_t>(y) * wo;
            for (int xx = x0; xx < x1; ++xx) {
              row[xx] += w * src[xx * stride + kx - pad];
            }
          }
        }
      }
    }
  }
  return out;
}

ConvGrads conv2d_backward(const Tensor& x, const ConvView& conv, int stride,
                          const Tensor& grad_out) {
  check_conv(x, conv, stride);
  const int k = conv.kernel, pad = k / 2;
  const int ho = out_size(x.height(), stride), wo = out_size(x.width(), stride);
  if (grad_out.channels() != conv.out_channels || grad_out.height() != ho ||
      grad_out.width() != wo) {
    throw DomainError("convolution output gradient has shape " +
                      grad_out.shape_string());
  }
  ConvGrads g{Tensor(x.channels(), x.height(), x.width()),
              std::vector<double>(conv.weights.size(), 0.0),
              std::vector<double>(conv.out_channels, 0.0)};
  for (int o = 0; o < conv.out_channels; ++o) {
    const double* go = grad_out.ptr(o, 0, 0);
    double bsum = 0.0;
    for (std::size_t p = 0; p < grad_out.plane_size(); ++p) bsum += go[p];
    g.bias[o] = bsum;
    for (int i = 0; i < conv.in_channels; ++i) {
      for (int ky = 0; ky < k; ++ky) {
        const auto [y0, y1] = valid_range(ho, x.height(), stride, ky, pad);
        for (int kx = 0; kx < k; ++kx) {
          const std::size_t widx =
              ((static_cast<std::size_t>(o) * conv.in_channels + i) * k + ky) *
                  k + kx;
          const double w = conv.weights[widx];
          const auto [x0, x1] = valid_range(wo, x.width(), stride, kx, pad);
          double wsum = 0.0;
          for (int y = y0; y < y1; ++y) {
            const int iy = y * stride + ky - pad;
            const double* src = x.ptr(i, iy, 0);
            double* gin = &g.input.at(i, iy, 0);
            const double* grow = go + static_cast<std::size_t>(y) * wo;
            for (int xx = x0; xx < x1; ++xx) {
              const int ix = xx * stride + kx - pad;
              wsum += grow[xx] * src[ix];
              gin[ix] += w * grow[xx];
            }
          }
          g.weights[widx] = wsum;
        }
      }
    }
  }
  return g;
}

Tensor relu(const Tensor& x) {
  Tensor out = x;
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

Tensor relu_backward(const Tensor& pre, const Tensor& grad_out) {
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(pre.values()[i] > 0.0)) g.values()[i] = 0.0;
  }
  return g;
}

Tensor upsample2(const Tensor& x) {
  Tensor out(x.channels(), 2 * x.height(), 2 * x.width());
  for (int c = 0; c < x.channels(); ++c) {
    for (int y = 0; y < out.height(); ++y) {
      for (int xx = 0; xx < out.width(); ++xx) {
        out.at(c, y, xx) = x.at(c, y / 2, xx / 2);
      }
    }
  }
  return out;
}

Tensor upsample2_backward(const Tensor& grad_out) {
  if (grad_out.height() % 2 || grad_out.width() % 2) {
    throw DomainError("upsample gradient must have even spatial size");
  }
  Tensor g(grad_out.channels(), grad_out.height() / 2, grad_out.width() / 2);
  for (int c = 0; c < grad_out.channels(); ++c) {
    for (int y = 0; y < grad_out.height(); ++y) {
      for (int xx = 0; xx < grad_out.width(); ++xx) {
        g.at(c, y / 2, xx / 2) += grad_out.at(c, y, xx);
      }
    }
  }
  return g;
}

namespace {

struct ResizeMap {
  int fy, fx, oy, ox;
};

ResizeMap resize_map(const Tensor& x, int height, int width) {
  if (height <= 0 || width <= 0) throw DomainError("resize target must be positive");
  ResizeMap m;
  m.fy = std::max(1, (height + x.height() - 1) / x.height());
  m.fx = std::max(1, (width + x.width() - 1) / x.width());
  m.oy = (x.height() * m.fy - height) / 2;
  m.ox = (x.width() * m.fx - width) / 2;
  return m;
}

}  // namespace

Tensor resize_nearest_crop(const Tensor& x, int height, int width) {
  const ResizeMap m = resize_map(x, height, width);
  Tensor out(x.channels(), height, width);
  for (int c = 0; c < x.channels(); ++c) {
    for (int y = 0; y < height; ++y) {
      for (int xx = 0; xx < width; ++xx) {
        out.at(c, y, xx) = x.at(c, (y + m.oy) / m.fy, (xx + m.ox) / m.fx);
      }
    }
  }
  return out;
}

Tensor resize_nearest_crop_backward(const Tensor& x_shape_source,
                                    const Tensor& grad_out) {
  const ResizeMap m =
      resize_map(x_shape_source, grad_out.height(), grad_out.width());
  Tensor g(x_shape_source.channels(), x_shape_source.height(),
           x_shape_source.width());
  for (int c = 0; c < g.channels(); ++c) {
    for (int y = 0; y < grad_out.height(); ++y) {
      for (int xx = 0; xx < grad_out.width(); ++xx) {
        g.at(c, (y + m.oy) / m.fy, (xx + m.ox) / m.fx) += grad_out.at(c, y, xx);
      }
    }
  }
  return g;
}

Tensor softmax_channels(const Tensor& logits) {
  Tensor out(logits.channels(), logits.height(), logits.width());
  const std::size_t plane = logits.plane_size();
  const int ch = logits.channels();
  for (std::size_t p = 0; p < plane; ++p) {
    double m = -1e300;
    for (int c = 0; c < ch; ++c) m = std::max(m, logits.values()[c * plane + p]);
    double z = 0.0;
    for (int c = 0; c < ch; ++c) {
      const double e = std::exp(logits.values()[c * plane + p] - m);
      out.values()[c * plane + p] = e;
      z += e;
    }
    for (int c = 0; c < ch; ++c) out.values()[c * plane + p] /= z;
  }
  return out;
}

Tensor softmax_backward(const Tensor& probs, const Tensor& grad_probs) {
  Tensor g(probs.channels(), probs.height(), probs.width());
  const std::size_t plane = probs.plane_size();
  const int ch = probs.channels();
  for (std::size_t p = 0; p < plane; ++p) {
    double dot = 0.0;
    for (int c = 0; c < ch; ++c) {
      dot += probs.values()[c * plane + p] * grad_probs.values()[c * plane + p];
    }
    for (int c = 0; c < ch; ++c) {
      g.values()[c * plane + p] = probs.values()[c * plane + p] *
                                  (grad_probs.values()[c * plane + p] - dot);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Parameters.

Param& ParamSet::add(std::string name, std::vector<int> shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  params_.push_back(Param{std::move(name), std::move(shape),
                          std::vector<double>(n, 0.0)});
  return params_.back();
}

const Param& ParamSet::get(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p;
  }
  throw DomainError("missing parameter \"" + name + "\"");
}

Param& ParamSet::get(const std::string& name) {
  return const_cast<Param&>(std::as_const(*this).get(name));
}

std::size_t ParamSet::total_size() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet z;
  for (const auto& p : params_) z.add(p.name, p.shape);
  return z;
}

void save_params(const ParamSet& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  const auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  out.write("TPRM", 4);
  out.put(static_cast<char>(kParamsVersion));
  u32(static_cast<std::uint32_t>(params.params().size()));
  for (const auto& p : params.params()) {
    u32(static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    u32(static_cast<std::uint32_t>(p.shape.size()));
    for (int d : p.shape) u32(static_cast<std::uint32_t>(d));
    for (double v : p.value) {
      u32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  if (!out) throw FormatError("failed writing " + path.string());
}

ParamSet load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  const auto u32 = [&]() {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (in.gcount() != 4) throw FormatError("truncated TPRM file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
  };
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, "TPRM", 4) != 0) {
    throw FormatError("bad TPRM magic");
  }
  const int version = in.get();
  if (version != kParamsVersion) {
    throw FormatError("unsupported TPRM version " + std::to_string(version));
  }
  ParamSet set;
  const std::uint32_t count = u32();
  for (std::uint32_t n = 0; n < count; ++n) {
    const std::uint32_t len = u32();
    if (len > 4096) throw FormatError("malformed TPRM blob name length");
    std::string name(len, '\0');
    in.read(name.data(), len);
    if (in.gcount() != static_cast<std::streamsize>(len)) {
      throw FormatError("truncated TPRM file");
    }
    const std::uint32_t rank = u32();
    if (rank > 8) throw FormatError("malformed TPRM blob rank");
    std::vector<int> shape;
    std::size_t elems = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      const std::uint32_t d = u32();
      if (d == 0 || d > (1u << 24)) throw FormatError("malformed TPRM dims");
      shape.push_back(static_cast<int>(d));
      elems *= d;
      if (elems > (1u << 28)) throw FormatError("TPRM blob too large");
    }
    Param& p = set.add(name, shape);
    for (std::size_t i = 0; i < elems; ++i) {
      p.value[i] = static_cast<double>(std::bit_cast<float>(u32()));
    }
  }
  return set;
}

// ---------------------------------------------------------------------------
// Configuration.

void EmbeddingConfig::validate() const {
  if (kernel_sizes.empty() || strides.size() != kernel_sizes.size() ||
      channel_sizes.size() != kernel_sizes.size()) {
    throw DomainError("embedding config lists must be non-empty and agree in "
                      "length");
  }
  for (std::size_t l = 0; l < kernel_sizes.size(); ++l) {
    if (kernel_sizes[l] < 1 || kernel_sizes[l] % 2 == 0) {
      throw DomainError("embedding kernel sizes must be odd");
    }
    if (strides[l] < 1) throw DomainError("embedding strides must be >= 1");
    if (channel_sizes[l] < 1) throw DomainError("embedding channels must be >= 1");
  }
}

Conditioning parse_conditioning(const std::string& name) {
  if (name == "multi") return Conditioning::kMulti;
  if (name == "single") return Conditioning::kSingle;
  if (name == "off") return Conditioning::kOff;
  throw DomainError("unknown conditioning \"" + name +
                    "\" (expected multi|single|off)");
}

std::string to_string(Conditioning mode) {
  switch (mode) {
    case Conditioning::kMulti:
      return "multi";
    case Conditioning::kSingle:
      return "single";
    case Conditioning::kOff:
      return "off";
  }
  return "?";
}

void ToyNetConfig::validate() const {
  if (stages < 1) throw DomainError("toy net needs k >= 1 decoder stages");
  if (input_channels < 1 || num_parts < 1 || num_objects < 1) {
    throw DomainError("toy net channel counts must be positive");
  }
  if (encoder_channels.size() != static_cast<std::size_t>(stages) ||
      decoder_channels.size() != static_cast<std::size_t>(stages)) {
    throw DomainError("encoder/decoder channel plans must have k = " +
                      std::to_string(stages) + " entries");
  }
  for (int c : encoder_channels) {
    if (c < 1) throw DomainError("encoder channels must be >= 1");
  }
  for (int c : decoder_channels) {
    if (c < 1) throw DomainError("decoder channels must be >= 1");
  }
  if (kernel < 1 || kernel % 2 == 0 || head_kernel < 1 ||
      head_kernel % 2 == 0) {
    throw DomainError("toy net kernels must be odd");
  }
  embedding.validate();
  if (conditioning != Conditioning::kOff && embedding.num_layers() < stages) {
    throw DomainError("embedding has " +
                      std::to_string(embedding.num_layers()) +
                      " layers but decoder stage 1 needs level " +
                      std::to_string(stages));
  }
}

bool ToyNetConfig::conditions_stage(int i) const {
  switch (conditioning) {
    case Conditioning::kMulti:
      return true;
    case Conditioning::kSingle:
      return i == 1;
    case Conditioning::kOff:
      return false;
  }
  return false;
}

ToyNetConfig parse_toy_net_config(const std::string& json_text) {
  using json = nlohmann::json;
  ToyNetConfig cfg;
  try {
    const json doc = json::parse(json_text);
    const json& net = doc.contains("net") ? doc.at("net") : doc;
    cfg.input_channels = net.value("input_channels", cfg.input_channels);
    cfg.num_parts = net.value("num_parts", cfg.num_parts);
    cfg.num_objects = net.value("num_objects", cfg.num_objects);
    cfg.stages = net.value("stages", cfg.stages);
    cfg.encoder_channels = net.value("encoder_channels", cfg.encoder_channels);
    cfg.decoder_channels = net.value("decoder_channels", cfg.decoder_channels);
    cfg.kernel = net.value("kernel", cfg.kernel);
    cfg.head_kernel = net.value("head_kernel", cfg.head_kernel);
    cfg.conditioning = parse_conditioning(
        net.value("conditioning", to_string(cfg.conditioning)));
    cfg.seed = net.value("seed", cfg.seed);
    if (net.contains("embedding")) {
      const json& e = net.at("embedding");
      cfg.embedding.kernel_sizes =
          e.value("kernel_sizes", cfg.embedding.kernel_sizes);
      cfg.embedding.strides = e.value("strides", cfg.embedding.strides);
      cfg.embedding.channel_sizes =
          e.value("channel_sizes", cfg.embedding.channel_sizes);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed network config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string toy_net_config_to_json(const ToyNetConfig& cfg) {
  nlohmann::json doc = {
      {"input_channels", cfg.input_channels},
      {"num_parts", cfg.num_parts},
      {"num_objects", cfg.num_objects},
      {"stages", cfg.stages},
      {"encoder_channels", cfg.encoder_channels},
      {"decoder_channels", cfg.decoder_channels},
      {"kernel", cfg.kernel},
      {"head_kernel", cfg.head_kernel},
      {"conditioning", to_string(cfg.conditioning)},
      {"seed", cfg.seed},
      {"embedding",
       {{"kernel_sizes", cfg.embedding.kernel_sizes},
        {"strides", cfg.embedding.strides},
        {"channel_sizes", cfg.embedding.channel_sizes}}},
  };
  return doc.dump(2) + "\n";
}

ParamSet init_params(const ToyNetConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Xorshift64Star rng(seed);
  ParamSet set;
  const auto add_conv = [&](const std::string& prefix, int out_c, int in_c,
                            int k) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_c * k * k));
    Param& w = set.add(prefix + ".weight", {out_c, in_c, k, k});
    for (double& v : w.value) v = rng.uniform(-bound, bound);
    Param& b = set.add(prefix + ".bias", {out_c});
    for (double& v : b.value) v = rng.uniform(-bound, bound);
  };
  int in_c = cfg.num_objects;
  for (int l = 0; l < cfg.embedding.num_layers(); ++l) {
    add_conv(embed_name(l), cfg.embedding.channel_sizes[l], in_c,
             cfg.embedding.kernel_sizes[l]);
    in_c = cfg.embedding.channel_sizes[l];
  }
  in_c = cfg.input_channels;
  for (int l = 0; l < cfg.stages; ++l) {
    add_conv(enc_name(l), cfg.encoder_channels[l], in_c, cfg.kernel);
    in_c = cfg.encoder_channels[l];
  }
  for (int i = 1; i <= cfg.stages; ++i) {
    add_conv(dec_name(i), cfg.decoder_channels[i - 1],
             decoder_input_channels(cfg, i), cfg.kernel);
  }
  add_conv("head", cfg.num_parts, stage_output_channels(cfg, cfg.stages),
           cfg.head_kernel);
  return set;
}

// ---------------------------------------------------------------------------
// Network operations.

std::vector<Tensor> embed_objects(const Tensor& object_probs,
                                  const EmbeddingConfig& cfg,
                                  const ParamSet& params) {
  cfg.validate();
  return embed_forward(pad_to_multiple(object_probs, total_stride(cfg)), cfg,
                       params, nullptr);
}

Tensor concat_condition(const Tensor& decoder_feat,
                        const std::vector<Tensor>& pyramid, int stage,
                        const ToyNetConfig& cfg) {
  if (stage < 1 || stage > cfg.stages) {
    throw DomainError("decoder stage " + std::to_string(stage) +
                      " outside 1.." + std::to_string(cfg.stages));
  }
  if (!cfg.conditions_stage(stage)) return decoder_feat;
  const int level = cfg.embedding_level_for_stage(stage);
  if (static_cast<int>(pyramid.size()) < level) {
    throw DomainError("stage " + std::to_string(stage) + " needs pyramid level " +
                      std::to_string(level) + " but only " +
                      std::to_string(pyramid.size()) + " exist");
  }
  const Tensor& s = pyramid[level - 1];
  const auto [h, w] = concat_target(decoder_feat, s);
  return concat_channels(maybe_resize(decoder_feat, h, w), maybe_resize(s, h, w));
}

ToyNet::ToyNet(ToyNetConfig cfg, ParamSet params)
    : cfg_(std::move(cfg)), params_(std::move(params)) {
  cfg_.validate();
  const ParamSet expected = init_params(cfg_, 0);
  if (expected.params().size() != params_.params().size()) {
    throw DomainError("parameter set does not match the network config");
  }
  for (std::size_t i = 0; i < expected.params().size(); ++i) {
    const Param& a = expected.params()[i];
    const Param& b = params_.params()[i];
    if (a.name != b.name || a.shape != b.shape) {
      throw DomainError("parameter \"" + b.name +
                        "\" does not match expected \"" + a.name + "\"");
    }
  }
}

Tensor ToyNet::forward(const Tensor& rgb, const Tensor& object_probs,
                       ForwardCache* cache) const {
  const int k = cfg_.stages;
  const int unit = 1 << k;
  if (rgb.channels() != cfg_.input_channels) {
    throw DomainError("encoder stage 1: expected " +
                      std::to_string(cfg_.input_channels) +
                      " input channels, got " + rgb.shape_string());
  }
  if (rgb.height() % unit || rgb.width() % unit) {
    throw DomainError("encoder: input " + rgb.shape_string() +
                      " is not divisible by 2^k = " + std::to_string(unit));
  }
  if (cache) *cache = ForwardCache{};

  std::vector<Tensor> pyramid;
  if (cfg_.conditioning != Conditioning::kOff) {
    if (object_probs.channels() != cfg_.num_objects ||
        object_probs.height() != rgb.height() ||
        object_probs.width() != rgb.width()) {
      throw DomainError("embedding: object input " +
                        object_probs.shape_string() + " does not match rgb " +
                        rgb.shape_string() + " with " +
                        std::to_string(cfg_.num_objects) + " objects");
    }
    Tensor padded =
        pad_to_multiple(object_probs, total_stride(cfg_.embedding));
    pyramid = embed_forward(padded, cfg_.embedding, params_, cache);
    if (cache) cache->object_padded = std::move(padded);
  }

  Tensor cur = rgb;
  int in_c = rgb.channels();
  for (int l = 0; l < k; ++l) {
    const ConvView conv = conv_view(params_, enc_name(l),
                                    cfg_.encoder_channels[l], in_c, cfg_.kernel);
    Tensor pre = conv2d_forward(cur, conv, 2);
    Tensor out = relu(pre);
    if (cache) {
      cache->enc_in.push_back(cur);
      cache->enc_pre.push_back(pre);
      cache->enc_out.push_back(out);
    }
    cur = std::move(out);
    in_c = cfg_.encoder_channels[l];
  }

  for (int i = 1; i <= k; ++i) {
    Tensor in = i == 1 ? cur : upsample2(cur);
    const ConvView conv =
        conv_view(params_, dec_name(i), cfg_.decoder_channels[i - 1],
                  decoder_input_channels(cfg_, i), cfg_.kernel);
    Tensor pre = conv2d_forward(in, conv, 1);
    Tensor d = relu(pre);
    Tensor f = concat_condition(d, pyramid, i, cfg_);
    if (cache) {
      cache->dec_in.push_back(std::move(in));
      cache->dec_pre.push_back(std::move(pre));
      cache->dec_out.push_back(std::move(d));
      cache->dec_cat.push_back(f);
    }
    cur = std::move(f);
  }

  Tensor head_in = upsample2(cur);
  const ConvView head = conv_view(params_, "head", cfg_.num_parts,
                                  head_in.channels(), cfg_.head_kernel);
  if (head_in.height() != rgb.height() || head_in.width() != rgb.width()) {
    throw DomainError("head: decoder output " + head_in.shape_string() +
                      " does not match input " + rgb.shape_string());
  }
  Tensor probs = softmax_channels(conv2d_forward(head_in, head, 1));
  if (cache) {
    cache->rgb = rgb;
    cache->head_in = std::move(head_in);
    cache->probs = probs;
  }
  return probs;
}

ToyNet::Gradients ToyNet::backward(const ForwardCache& cache,
                                   const Tensor& grad_probs) const {
  const int k = cfg_.stages;
  Gradients g{params_.zeros_like(), Tensor(), Tensor()};
  const auto accumulate = [&](const std::string& prefix, const ConvGrads& cg) {
    add_into(g.params.get(prefix + ".weight").value, cg.weights);
    add_into(g.params.get(prefix + ".bias").value, cg.bias);
  };

  const Tensor g_logits = softmax_backward(cache.probs, grad_probs);
  const ConvView head = conv_view(params_, "head", cfg_.num_parts,
                                  cache.head_in.channels(), cfg_.head_kernel);
  ConvGrads cg = conv2d_backward(cache.head_in, head, 1, g_logits);
  accumulate("head", cg);
  Tensor g_f = upsample2_backward(cg.input);

  const int levels = static_cast<int>(cache.embed_out.size());
  std::vector<std::optional<Tensor>> g_pyramid(levels);
  Tensor g_enc;
  for (int i = k; i >= 1; --i) {
    const Tensor& d = cache.dec_out[i - 1];
    Tensor g_d;
    if (cfg_.conditions_stage(i)) {
      const int level = cfg_.embedding_level_for_stage(i);
      const Tensor& s = cache.embed_out[level - 1];
      Tensor g_dpart = slice_channels(g_f, 0, d.channels());
      Tensor g_spart = slice_channels(g_f, d.channels(), s.channels());
      g_d = maybe_resize_backward(d, g_dpart);
      Tensor g_s = maybe_resize_backward(s, g_spart);
      auto& slot = g_pyramid[level - 1];
      if (slot) {
        add_into(slot->values(), g_s.values());
      } else {
        slot = std::move(g_s);
      }
    } else {
      g_d = std::move(g_f);
    }
    const Tensor g_pre = relu_backward(cache.dec_pre[i - 1], g_d);
    const ConvView conv =
        conv_view(params_, dec_name(i), cfg_.decoder_channels[i - 1],
                  decoder_input_channels(cfg_, i), cfg_.kernel);
    cg = conv2d_backward(cache.dec_in[i - 1], conv, 1, g_pre);
    accumulate(dec_name(i), cg);
    if (i > 1) {
      g_f = upsample2_backward(cg.input);
    } else {
      g_enc = std::move(cg.input);
    }
  }

  for (int l = k - 1; l >= 0; --l) {
    const Tensor g_pre = relu_backward(cache.enc_pre[l], g_enc);
    const ConvView conv =
        conv_view(params_, enc_name(l), cfg_.encoder_channels[l],
                  cache.enc_in[l].channels(), cfg_.kernel);
    cg = conv2d_backward(cache.enc_in[l], conv, 2, g_pre);
    accumulate(enc_name(l), cg);
    g_enc = std::move(cg.input);
  }
  g.rgb = std::move(g_enc);

  if (levels == 0) return g;
  std::optional<Tensor> carry;
  for (int l = levels - 1; l >= 0; --l) {
    Tensor g_out(cache.embed_out[l].channels(), cache.embed_out[l].height(),
                 cache.embed_out[l].width());
    if (g_pyramid[l]) add_into(g_out.values(), g_pyramid[l]->values());
    if (carry) add_into(g_out.values(), carry->values());
    const Tensor g_pre = relu_backward(cache.embed_pre[l], g_out);
    const ConvView conv = conv_view(
        params_, embed_name(l), cfg_.embedding.channel_sizes[l],
        cache.embed_in[l].channels(), cfg_.embedding.kernel_sizes[l]);
    cg = conv2d_backward(cache.embed_in[l], conv, cfg_.embedding.strides[l],
                         g_pre);
    accumulate(embed_name(l), cg);
    carry = std::move(cg.input);
  }
  // Drop the zero padding.
  g.object_probs = Tensor(cfg_.num_objects, cache.rgb.height(),
                          cache.rgb.width());
  for (int c = 0; c < g.object_probs.channels(); ++c) {
    for (int y = 0; y < g.object_probs.height(); ++y) {
      for (int x = 0; x < g.object_probs.width(); ++x) {
        g.object_probs.at(c, y, x) = carry->at(c, y, x);
      }
    }
  }
  return g;
}

ProbMap toy_forward(const Tensor& rgb, const ProbMap& object_probs,
                    const ToyNetConfig& cfg, const ParamSet& params) {
  const ToyNet net(cfg, params);
  return to_prob_map(net.forward(rgb, to_tensor(object_probs)));
}

// ---------------------------------------------------------------------------
// Training.

double poly_lr(const TrainConfig& cfg, int step) {
  const double frac =
      1.0 - static_cast<double>(step) / static_cast<double>(cfg.steps);
  return cfg.lr * std::pow(std::max(frac, 0.0), cfg.decay_power);
}

namespace {

struct SceneTargets {
  Tensor object_input;
  AdjacencyMatrix gt_graph;
};

std::vector<SceneTargets> prepare(const std::vector<Scene>& scenes,
                                  const ToyNetConfig& net,
                                  const AdjacencyConfig& adjacency) {
  std::vector<std::optional<SceneTargets>> slots(scenes.size());
  parallel_for(scenes.size(), [&](std::size_t s) {
    const Scene& sc = scenes[s];
    if (sc.mapping.num_parts() != net.num_parts ||
        sc.mapping.num_objects() != net.num_objects) {
      throw DomainError("scene " + std::to_string(s) + " has " +
                        std::to_string(sc.mapping.num_parts()) + " parts / " +
                        std::to_string(sc.mapping.num_objects()) +
                        " objects but the network expects " +
                        std::to_string(net.num_parts) + " / " +
                        std::to_string(net.num_objects));
    }
    slots[s].emplace(SceneTargets{
        to_tensor(one_hot(sc.objects, net.num_objects)),
        ground_truth_graph(sc.parts, net.num_parts, adjacency)});
  });
  std::vector<SceneTargets> out;
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

LossReport mean_report(const std::vector<LossReport>& rs) {
  LossReport m;
  for (const auto& r : rs) {
    m.ce += r.ce;
    m.rec += r.rec;
    m.gm += r.gm;
    m.total += r.total;
  }
  const double n = static_cast<double>(rs.size());
  m.ce /= n;
  m.rec /= n;
  m.gm /= n;
  m.total /= n;
  return m;
}

}  // namespace

TrainResult train_toy(const std::vector<Scene>& dataset,
                      const ToyNetConfig& net, const LossWeights& weights,
                      const AdjacencyConfig& adjacency,
                      const TrainConfig& train) {
  if (train.steps < 1) throw DomainError("training needs steps >= 1");
  if (dataset.empty()) throw DomainError("training needs at least one scene");
  if (!(train.lr >= 0.0)) throw DomainError("learning rate must be >= 0");
  weights.validate();
  adjacency.validate();
  const std::vector<SceneTargets> targets = prepare(dataset, net, adjacency);
  const std::size_t n = dataset.size();
  const std::size_t batch =
      train.batch_size > 0 ? std::min<std::size_t>(train.batch_size, n) : n;

  ToyNet model(net, init_params(net, train.seed));
  TrainResult result;
  for (int step = 0; step < train.steps; ++step) {
    std::vector<LossReport> reports(batch);
    std::vector<std::optional<ParamSet>> grads(batch);
    parallel_for(batch, [&](std::size_t b) {
      const std::size_t s = (static_cast<std::size_t>(step) * batch + b) % n;
      const Scene& sc = dataset[s];
      ForwardCache cache;
      const Tensor probs =
          model.forward(sc.rgb, targets[s].object_input, &cache);
      if (!all_finite(probs)) {
        reports[b].total = std::numeric_limits<double>::quiet_NaN();
        return;
      }
      const TotalLoss loss =
          total_loss(to_prob_map(probs), sc.parts, sc.objects, sc.mapping,
                     targets[s].gt_graph, adjacency, weights);
      reports[b] = loss.report;
      if (!std::isfinite(loss.report.total)) return;
      const Tensor g = to_tensor(ProbMap::Unchecked(
          probs.width(), probs.height(), probs.channels(), loss.grad));
      grads[b] = model.backward(cache, g).params;
    });
    const LossReport mean = mean_report(reports);
    if (!std::isfinite(mean.total)) {
      throw NumericError("training diverged: non-finite loss at step " +
                         std::to_string(step));
    }
    result.trace.push_back(mean);

    const double lr = poly_lr(train, step);
    auto& params = model.mutable_params().params();
    const double scale = lr / static_cast<double>(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      const auto& gp = grads[b]->params();
      for (std::size_t i = 0; i < params.size(); ++i) {
        for (std::size_t j = 0; j < params[i].value.size(); ++j) {
          params[i].value[j] -= scale * gp[i].value[j];
        }
      }
    }
  }
  result.params = model.params();
  return result;
}

LossReport evaluate_toy(const std::vector<Scene>& scenes,
                        const ToyNetConfig& net, const ParamSet& params,
                        const LossWeights& weights,
                        const AdjacencyConfig& adjacency) {
  if (scenes.empty()) throw DomainError("evaluation needs at least one scene");
  const std::vector<SceneTargets> targets = prepare(scenes, net, adjacency);
  const ToyNet model(net, params);
  std::vector<LossReport> reports(scenes.size());
  parallel_for(scenes.size(), [&](std::size_t s) {
    const Tensor probs = model.forward(scenes[s].rgb, targets[s].object_input);
    if (!all_finite(probs)) {
      throw NumericError("evaluation: non-finite output on scene " +
                         std::to_string(s));
    }
    reports[s] = total_loss(to_prob_map(probs), scenes[s].parts,
                            scenes[s].objects, scenes[s].mapping,
                            targets[s].gt_graph, adjacency, weights)
                     .report;
  });
  return mean_report(reports);
}

}  // namespace partgraph
