// Copyright 2026 The maskdet Authors. All Rights Reserved.
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

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maskdet/anchors.hpp"
#include "maskdet/boxes.hpp"
#include "maskdet/config.hpp"
#include "maskdet/errors.hpp"
#include "maskdet/kernels.hpp"
#include "maskdet/tensor.hpp"
#include "maskdet/weights.hpp"

// Detector network: a depthwise-separable reference backbone with taps at
// strides 8/16/32, an FPN neck, and one context-attention head per level.
//
// Weight naming (C = fpn_channels, A = anchors_per_cell, r = cbam_reduction):
//   backbone.stage{1..5}.{dw,pw}.{weight,bias}
//   fpn.lateral{0..2}.{weight,bias}     1x1, tap channels -> C
//   fpn.smooth{0..2}.{weight,bias}      3x3, C -> C
//   head{l}.context.branch1.conv0       3x3, C -> C/2
//   head{l}.context.branch2.conv{0,1}   3x3, -> C/4
//   head{l}.context.branch3.conv{0,1,2} 3x3, -> C/4
//   head{l}.cbam.fc{0,1}                shared channel MLP C -> C/r -> C
//   head{l}.cbam.spatial                7x7, 2 -> 1
//   head{l}.loc / head{l}.cls           1x1, C -> 4A / 3A
// Weights are (out, in, kh, kw); biases are (1, out, 1, 1).

namespace maskdet {

inline constexpr std::array<int, 5> kBackboneWidths{8, 16, 32, 64, 128};
inline constexpr int kImageChannels = 3;
inline constexpr int kSpatialKernel = 7;

struct WeightSpec {
  std::string name;
  Shape shape;
};

namespace detail {

inline void add_conv(std::vector<WeightSpec>& specs, const std::string& prefix, int out_c, int in_c, int k) {
  specs.push_back({prefix + ".weight", Shape{out_c, in_c, k, k}});
  specs.push_back({prefix + ".bias", Shape{1, out_c, 1, 1}});
}

}  // namespace detail

/// Every tensor the architecture reads, with its exact shape.
inline std::vector<WeightSpec> weight_manifest(const ModelConfig& config) {
  config.validate();
  const int c = config.fpn_channels;
  const int a = config.anchors_per_cell;
  std::vector<WeightSpec> specs;
  int in_c = kImageChannels;
  for (int s = 0; s < 5; ++s) {
    const std::string stage = "backbone.stage" + std::to_string(s + 1);
    specs.push_back({stage + ".dw.weight", Shape{in_c, 1, 3, 3}});
    specs.push_back({stage + ".dw.bias", Shape{1, in_c, 1, 1}});
    detail::add_conv(specs, stage + ".pw", kBackboneWidths[s], in_c, 1);
    in_c = kBackboneWidths[s];
  }
  for (int l = 0; l < 3; ++l) {
    detail::add_conv(specs, "fpn.lateral" + std::to_string(l), c, kBackboneWidths[2 + l], 1);
    detail::add_conv(specs, "fpn.smooth" + std::to_string(l), c, c, 3);
  }
  for (int l = 0; l < 3; ++l) {
    const std::string head = "head" + std::to_string(l);
    detail::add_conv(specs, head + ".context.branch1.conv0", c / 2, c, 3);
    detail::add_conv(specs, head + ".context.branch2.conv0", c / 4, c, 3);
    detail::add_conv(specs, head + ".context.branch2.conv1", c / 4, c / 4, 3);
    detail::add_conv(specs, head + ".context.branch3.conv0", c / 4, c, 3);
    detail::add_conv(specs, head + ".context.branch3.conv1", c / 4, c / 4, 3);
    detail::add_conv(specs, head + ".context.branch3.conv2", c / 4, c / 4, 3);
    detail::add_conv(specs, head + ".cbam.fc0", c / config.cbam_reduction, c, 1);
    detail::add_conv(specs, head + ".cbam.fc1", c, c / config.cbam_reduction, 1);
    detail::add_conv(specs, head + ".cbam.spatial", 1, 2, kSpatialKernel);
    detail::add_conv(specs, head + ".loc", 4 * a, c, 1);
    detail::add_conv(specs, head + ".cls", kNumClasses * a, c, 1);
  }
  return specs;
}

enum class FanMode { kIn, kOut };

/// (in or out channels) * kh * kw of an (out, in, kh, kw) kernel.
constexpr long long compute_fan(Shape shape, FanMode mode) noexcept {
  return static_cast<long long>(mode == FanMode::kIn ? shape.c : shape.n) * shape.h * shape.w;
}

/// He-normal initialisation: N(0, 2 / fan).
inline Tensor kaiming_init(Shape shape, FanMode mode, std::uint64_t seed) {
  const long long fan = compute_fan(shape, mode);
  if (fan <= 0) throw ConfigError("kaiming_init: zero fan for shape " + shape.str());
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937 rng(seq);
  std::normal_distribution<float> dist(0.0f, static_cast<float>(std::sqrt(2.0 / static_cast<double>(fan))));
  Tensor t(shape);
  for (float& v : t.data()) v = dist(rng);
  return t;
}

/// Kaiming-initialised weights (fan-in) and zero biases for every manifest entry.
inline WeightStore init_weights(const ModelConfig& config, std::uint64_t seed) {
  WeightStore store;
  std::uint64_t index = 0;
  for (const auto& spec : weight_manifest(config)) {
    const bool is_bias = spec.name.ends_with(".bias");
    // splitmix64 step decorrelates per-tensor streams.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * ++index;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    store.insert(spec.name, is_bias ? Tensor(spec.shape) : kaiming_init(spec.shape, FanMode::kIn, z));
  }
  return store;
}

/// Validated, immutable network.
class Model {
 public:
  const ModelConfig& config() const noexcept { return config_; }
  const WeightStore& weights() const noexcept { return weights_; }
  const std::vector<LevelLayout>& layout() const noexcept { return layout_; }

  const Tensor& weight(const std::string& name) const { return weights_.at(name); }

  /// Convolution using the `prefix`.weight / `prefix`.bias pair.
  Tensor conv(const Tensor& input, const std::string& prefix, int stride, int pad, int groups = 1) const {
    return conv2d(input, ConvParams{.kernel = weight(prefix + ".weight"),
                                    .bias = weight(prefix + ".bias").data(),
                                    .stride = {stride, stride},
                                    .padding = {pad, pad},
                                    .groups = groups});
  }

 private:
  Model(ModelConfig config, WeightStore weights) : config_(config), weights_(std::move(weights)) {
    for (int l = 0; l < 3; ++l) {
      const int g = config_.grid_extent(l);
      layout_.push_back(LevelLayout{g, g, config_.anchors_per_cell, config_.strides[l]});
    }
  }
  friend Model build_model(const ModelConfig& config, WeightStore weights);

  ModelConfig config_;
  WeightStore weights_;
  std::vector<LevelLayout> layout_;
};

/// Validates the configuration and every required weight before returning.
inline Model build_model(const ModelConfig& config, WeightStore weights) {
  config.validate();
  if (config.strides != std::array<int, 3>{8, 16, 32}) {
    throw ConfigError("the reference backbone taps strides 8, 16, 32 only");
  }
  for (const auto& spec : weight_manifest(config)) {
    const Tensor& t = weights.at(spec.name);
    if (t.shape() != spec.shape) {
      throw ShapeError("weight '" + spec.name + "' has shape " + t.shape().str() + ", expected " + spec.shape.str());
    }
  }
  return Model(config, std::move(weights));
}

/// Feature maps at strides 8, 16 and 32.
using PyramidFeatures = std::array<Tensor, 3>;

inline PyramidFeatures backbone_forward(const Model& model, const Tensor& image) {
  const int s = model.config().input_size;
  if (image.shape() != Shape{1, kImageChannels, s, s}) {
    throw ShapeError("backbone: expected image shape " + Shape{1, kImageChannels, s, s}.str() + ", got " +
                     image.shape().str());
  }
  PyramidFeatures taps;
  Tensor x = image;
  for (int stage = 1; stage <= 5; ++stage) {
    const std::string prefix = "backbone.stage" + std::to_string(stage);
    x = activate(model.conv(x, prefix + ".dw", 2, 1, x.c()), Activation::kRelu);
    x = activate(model.conv(x, prefix + ".pw", 1, 0), Activation::kRelu);
    if (stage >= 3) taps[stage - 3] = x;
  }
  return taps;
}

/// Lateral 1x1 projections, top-down fusion (nearest 2x upsample, top-left
/// crop, a + coeff * up), then a 3x3 smoothing convolution per level.
inline PyramidFeatures fpn_forward(const Model& model, const PyramidFeatures& features) {
  PyramidFeatures merged;
  for (int l = 2; l >= 0; --l) {
    const Tensor& lat_w = model.weight("fpn.lateral" + std::to_string(l) + ".weight");
    if (features[l].c() != lat_w.c()) {
      throw ShapeError("fpn: level " + std::to_string(l) + " has " + std::to_string(features[l].c()) +
                       " channels, lateral expects " + std::to_string(lat_w.c()));
    }
    Tensor lateral = model.conv(features[l], "fpn.lateral" + std::to_string(l), 1, 0);
    if (l == 2) {
      merged[l] = std::move(lateral);
    } else {
      const Tensor up = crop(upsample_nearest(merged[l + 1], 2), lateral.h(), lateral.w());
      merged[l] = add_scaled(std::move(lateral), up, model.config().fpn_coeff);
    }
  }
  PyramidFeatures out;
  for (int l = 0; l < 3; ++l) out[l] = model.conv(merged[l], "fpn.smooth" + std::to_string(l), 1, 1);
  return out;
}

/// Shared two-layer MLP of the channel gate: (C/r, C, 1, 1) and (C, C/r, 1, 1)
/// matrices with their biases.
struct ChannelMlp {
  const Tensor& fc0_weight;
  const Tensor& fc0_bias;
  const Tensor& fc1_weight;
  const Tensor& fc1_bias;
};

/// Per-(batch, channel) gate sigmoid(MLP(avg) + MLP(max)), shape (n, c, 1, 1).
inline Tensor channel_attention_gate(const Tensor& feature, const ChannelMlp& mlp, int reduction) {
  const int c = feature.c();
  if (reduction < 1 || c % reduction != 0) {
    throw ConfigError("channel_attention: reduction " + std::to_string(reduction) + " does not divide " +
                      std::to_string(c) + " channels");
  }
  if (mlp.fc0_weight.shape() != Shape{c / reduction, c, 1, 1} || mlp.fc1_weight.shape() != Shape{c, c / reduction, 1, 1}) {
    throw ShapeError("channel_attention: MLP weights do not match " + std::to_string(c) + " channels with reduction " +
                     std::to_string(reduction));
  }
  const Tensor avg = global_pool(feature, PoolMode::kAvg);
  const Tensor mx = global_pool(feature, PoolMode::kMax);
  const auto mlp_forward = [&](std::span<const float> v) {
    std::vector<float> hidden = linear(v, mlp.fc0_weight, mlp.fc0_bias.data());
    for (float& h : hidden) h = std::max(h, 0.0f);
    return linear(hidden, mlp.fc1_weight, mlp.fc1_bias.data());
  };
  Tensor gate(Shape{feature.n(), c, 1, 1});
  for (int b = 0; b < feature.n(); ++b) {
    const auto a = mlp_forward(avg.data().subspan(static_cast<std::size_t>(b) * c, c));
    const auto m = mlp_forward(mx.data().subspan(static_cast<std::size_t>(b) * c, c));
    for (int ch = 0; ch < c; ++ch) gate.at(b, ch, 0, 0) = sigmoid(a[ch] + m[ch]);
  }
  return gate;
}

inline Tensor channel_attention(const Tensor& feature, const ChannelMlp& mlp, int reduction) {
  const Tensor gate = channel_attention_gate(feature, mlp, reduction);
  Tensor out = feature;
  for (int b = 0; b < out.n(); ++b) {
    for (int ch = 0; ch < out.c(); ++ch) {
      const float g = gate.at(b, ch, 0, 0);
      for (float& v : out.plane(b, ch)) v *= g;
    }
  }
  return out;
}

/// Per-position gate sigmoid(conv7x7([max_c, mean_c])), shape (n, 1, h, w).
inline Tensor spatial_attention_gate(const Tensor& feature, const Tensor& weight, const Tensor& bias) {
  if (weight.shape() != Shape{1, 2, kSpatialKernel, kSpatialKernel} || bias.size() != 1) {
    throw ShapeError("spatial_attention: expected (1, 2, 7, 7) kernel and scalar bias, got " + weight.shape().str());
  }
  const Shape& s = feature.shape();
  Tensor pooled(Shape{s.n, 2, s.h, s.w});
  for (int b = 0; b < s.n; ++b) {
    for (int y = 0; y < s.h; ++y) {
      for (int x = 0; x < s.w; ++x) {
        float mx = feature.at(b, 0, y, x);
        double sum = 0.0;
        for (int ch = 0; ch < s.c; ++ch) {
          const float v = feature.at(b, ch, y, x);
          mx = std::max(mx, v);
          sum += v;
        }
        pooled.at(b, 0, y, x) = mx;
        pooled.at(b, 1, y, x) = static_cast<float>(sum / s.c);
      }
    }
  }
  const int pad = kSpatialKernel / 2;
  return activate(conv2d(pooled, ConvParams{.kernel = weight, .bias = bias.data(), .padding = {pad, pad}}),
                  Activation::kSigmoid);
}

inline Tensor spatial_attention(const Tensor& feature, const Tensor& weight, const Tensor& bias) {
  const Tensor gate = spatial_attention_gate(feature, weight, bias);
  Tensor out = feature;
  for (int b = 0; b < out.n(); ++b) {
    const auto g = gate.plane(b, 0);
    for (int ch = 0; ch < out.c(); ++ch) {
      auto p = out.plane(b, ch);
      for (std::size_t i = 0; i < p.size(); ++i) p[i] *= g[i];
    }
  }
  return out;
}

/// Inception-style context block: three branches of one, two and three 3x3
/// convolutions (C/2, C/4, C/4 channels), concatenated and rectified.
inline Tensor context_module_forward(const Model& model, const Tensor& feature, int level) {
  const int c = model.config().fpn_channels;
  if (feature.c() != c) {
    throw ShapeError("context module: expected " + std::to_string(c) + " channels, got " + std::to_string(feature.c()));
  }
  const std::string prefix = "head" + std::to_string(level) + ".context.branch";
  const auto branch = [&](int index, int depth) {
    Tensor x = model.conv(feature, prefix + std::to_string(index) + ".conv0", 1, 1);
    for (int d = 1; d < depth; ++d) {
      x = model.conv(activate(std::move(x), Activation::kRelu), prefix + std::to_string(index) + ".conv" + std::to_string(d), 1, 1);
    }
    return x;
  };
  const std::array<Tensor, 3> parts{branch(1, 1), branch(2, 2), branch(3, 3)};
  return activate(concat_channels(parts), Activation::kRelu);
}

/// Context module followed by channel then spatial attention.
inline Tensor context_attention_forward(const Model& model, const Tensor& feature, int level) {
  const std::string head = "head" + std::to_string(level) + ".cbam.";
  const Tensor ctx = context_module_forward(model, feature, level);
  const Tensor ca = channel_attention(ctx,
                                      ChannelMlp{model.weight(head + "fc0.weight"), model.weight(head + "fc0.bias"),
                                                 model.weight(head + "fc1.weight"), model.weight(head + "fc1.bias")},
                                      model.config().cbam_reduction);
  return spatial_attention(ca, model.weight(head + "spatial.weight"), model.weight(head + "spatial.bias"));
}

/// Raw network outputs, one row per anchor in canonical order.
struct Predictions {
  std::size_t count = 0;
  std::vector<float> loc;  // count x 4 offsets
  std::vector<float> cls;  // count x 3 logits

  Offsets loc_row(std::size_t i) const { return {loc[4 * i], loc[4 * i + 1], loc[4 * i + 2], loc[4 * i + 3]}; }
  std::span<const float, kNumClasses> cls_row(std::size_t i) const {
    return std::span<const float, kNumClasses>(cls.data() + kNumClasses * i, kNumClasses);
  }
  friend bool operator==(const Predictions&, const Predictions&) = default;
};

/// Appends head outputs of one level. Channel a*K + k of the (1, A*K, H, W)
/// map becomes column k of row (y * W + x) * A + a.
inline void append_level_rows(const Tensor& head_out, int per_anchor, int anchors_per_cell, std::vector<float>& dst) {
  const int hh = head_out.h();
  const int ww = head_out.w();
  for (int y = 0; y < hh; ++y) {
    for (int x = 0; x < ww; ++x) {
      for (int a = 0; a < anchors_per_cell; ++a) {
        for (int k = 0; k < per_anchor; ++k) dst.push_back(head_out.at(0, a * per_anchor + k, y, x));
      }
    }
  }
}

inline Predictions model_forward(const Model& model, const Tensor& image) {
  const PyramidFeatures pyramid = fpn_forward(model, backbone_forward(model, image));
  const int a = model.config().anchors_per_cell;
  Predictions pred;
  for (int l = 0; l < 3; ++l) {
    const Tensor feat = context_attention_forward(model, pyramid[l], l);
    const std::string head = "head" + std::to_string(l);
    append_level_rows(model.conv(feat, head + ".loc", 1, 0), 4, a, pred.loc);
    append_level_rows(model.conv(feat, head + ".cls", 1, 0), kNumClasses, a, pred.cls);
  }
  pred.count = pred.loc.size() / 4;
  return pred;
}

}  // namespace maskdet
