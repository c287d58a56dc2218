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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "maskdet/errors.hpp"
#include "maskdet/tensor.hpp"

// Forward-only numeric kernels over NCHW float32 tensors. Convolution is
// cross-correlation with zero padding.

namespace maskdet {

/// Convolution parameters. `kernel` has shape (out_c, in_c / groups, kh, kw);
/// `bias` is either empty or holds out_c values.
struct ConvParams {
  const Tensor& kernel;
  std::span<const float> bias{};
  std::array<int, 2> stride{1, 1};   // (y, x)
  std::array<int, 2> padding{0, 0};  // (y, x)
  int groups = 1;
};

/// floor((in + 2 * pad - k) / stride) + 1, or 0 when the window never fits.
constexpr int conv_out_extent(int in, int k, int stride, int pad) noexcept {
  const int span = in + 2 * pad - k;
  return span < 0 ? 0 : span / stride + 1;
}

inline Tensor conv2d(const Tensor& input, const ConvParams& p) {
  const Shape& in = input.shape();
  const Shape& ks = p.kernel.shape();
  const auto [sh, sw] = p.stride;
  const auto [ph, pw] = p.padding;
  if (sh < 1 || sw < 1) throw ConfigError("conv2d: stride must be positive");
  if (ph < 0 || pw < 0) throw ConfigError("conv2d: padding must be non-negative");
  if (p.groups < 1) throw ConfigError("conv2d: groups must be positive");
  if (in.c % p.groups != 0 || ks.n % p.groups != 0) {
    throw ConfigError("conv2d: groups " + std::to_string(p.groups) + " does not divide in_c " +
                      std::to_string(in.c) + " and out_c " + std::to_string(ks.n));
  }
  const int in_per_group = in.c / p.groups;
  const int out_per_group = ks.n / p.groups;
  if (ks.c != in_per_group) {
    throw ShapeError("conv2d: kernel in_c/groups is " + std::to_string(ks.c) + " but input has " +
                     std::to_string(in.c) + " channels over " + std::to_string(p.groups) + " groups");
  }
  if (!p.bias.empty() && p.bias.size() != static_cast<std::size_t>(ks.n)) {
    throw ShapeError("conv2d: bias length " + std::to_string(p.bias.size()) + " does not match out_c " +
                     std::to_string(ks.n));
  }
  const int oh = conv_out_extent(in.h, ks.h, sh, ph);
  const int ow = conv_out_extent(in.w, ks.w, sw, pw);
  if (oh < 1) throw ShapeError("conv2d: height " + std::to_string(in.h) + " too small for kernel height " + std::to_string(ks.h));
  if (ow < 1) throw ShapeError("conv2d: width " + std::to_string(in.w) + " too small for kernel width " + std::to_string(ks.w));

  Tensor out(Shape{in.n, ks.n, oh, ow});
  const auto kdata = p.kernel.data();
  for (int b = 0; b < in.n; ++b) {
    for (int oc = 0; oc < ks.n; ++oc) {
      const int g = oc / out_per_group;
      auto dst = out.plane(b, oc);
      std::fill(dst.begin(), dst.end(), p.bias.empty() ? 0.0f : p.bias[oc]);
      for (int icg = 0; icg < in_per_group; ++icg) {
        const auto src = input.plane(b, g * in_per_group + icg);
        const float* wk = kdata.data() + (static_cast<std::size_t>(oc) * ks.c + icg) * ks.h * ks.w;
        for (int ky = 0; ky < ks.h; ++ky) {
          for (int kx = 0; kx < ks.w; ++kx) {
            const float wv = wk[ky * ks.w + kx];
            if (wv == 0.0f) continue;
            // Output columns whose input column ox*sw - pw + kx lands inside [0, in.w).
            int ox_begin = 0;
            if (kx < pw) ox_begin = (pw - kx + sw - 1) / sw;
            const int last = in.w - 1 + pw - kx;
            if (last < 0) continue;
            const int ox_end = std::min(ow, last / sw + 1);
            if (ox_begin >= ox_end) continue;
            for (int oy = 0; oy < oh; ++oy) {
              const int iy = oy * sh - ph + ky;
              if (iy < 0 || iy >= in.h) continue;
              const float* s = src.data();
              const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(iy) * in.w - pw + kx;
              float* drow = dst.data() + static_cast<std::size_t>(oy) * ow;
              if (sw == 1) {
                for (int ox = ox_begin; ox < ox_end; ++ox) drow[ox] += wv * s[base + ox];
              } else {
                for (int ox = ox_begin; ox < ox_end; ++ox) drow[ox] += wv * s[base + static_cast<std::ptrdiff_t>(ox) * sw];
              }
            }
          }
        }
      }
    }
  }
  return out;
}

enum class PoolMode { kMax, kAvg };

inline Tensor pool2d(const Tensor& input, PoolMode mode, std::array<int, 2> window, std::array<int, 2> stride) {
  const Shape& in = input.shape();
  if (window[0] < 1 || window[1] < 1 || stride[0] < 1 || stride[1] < 1) {
    throw ConfigError("pool2d: window and stride must be positive");
  }
  if (window[0] > in.h || window[1] > in.w) {
    throw ShapeError("pool2d: window " + std::to_string(window[0]) + "x" + std::to_string(window[1]) +
                     " larger than input " + std::to_string(in.h) + "x" + std::to_string(in.w));
  }
  const int oh = conv_out_extent(in.h, window[0], stride[0], 0);
  const int ow = conv_out_extent(in.w, window[1], stride[1], 0);
  Tensor out(Shape{in.n, in.c, oh, ow});
  const double inv_area = 1.0 / (static_cast<double>(window[0]) * window[1]);
  for (int b = 0; b < in.n; ++b) {
    for (int ch = 0; ch < in.c; ++ch) {
      const auto src = input.plane(b, ch);
      auto dst = out.plane(b, ch);
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          double acc = mode == PoolMode::kMax ? -std::numeric_limits<double>::infinity() : 0.0;
          for (int ky = 0; ky < window[0]; ++ky) {
            const float* row = src.data() + static_cast<std::size_t>(oy * stride[0] + ky) * in.w + ox * stride[1];
            for (int kx = 0; kx < window[1]; ++kx) {
              acc = mode == PoolMode::kMax ? std::max(acc, static_cast<double>(row[kx])) : acc + row[kx];
            }
          }
          dst[static_cast<std::size_t>(oy) * ow + ox] =
              static_cast<float>(mode == PoolMode::kMax ? acc : acc * inv_area);
        }
      }
    }
  }
  return out;
}

/// Per-channel reduction over all spatial positions; result is (n, c, 1, 1).
inline Tensor global_pool(const Tensor& input, PoolMode mode) {
  const Shape& in = input.shape();
  if (in.h < 1 || in.w < 1) throw ShapeError("global_pool: empty spatial extent");
  Tensor out(Shape{in.n, in.c, 1, 1});
  for (int b = 0; b < in.n; ++b) {
    for (int ch = 0; ch < in.c; ++ch) {
      const auto src = input.plane(b, ch);
      double acc = mode == PoolMode::kMax ? -std::numeric_limits<double>::infinity() : 0.0;
      for (float v : src) acc = mode == PoolMode::kMax ? std::max(acc, static_cast<double>(v)) : acc + v;
      out.at(b, ch, 0, 0) = static_cast<float>(mode == PoolMode::kMax ? acc : acc / static_cast<double>(src.size()));
    }
  }
  return out;
}

enum class Activation { kRelu, kSigmoid };

inline float sigmoid(float x) noexcept {
  // Split on sign so exp never overflows.
  if (x >= 0.0f) return 1.0f / (1.0f + std::exp(-x));
  const float e = std::exp(x);
  return e / (1.0f + e);
}

inline Tensor activate(Tensor input, Activation kind) {
  for (float& v : input.data()) v = kind == Activation::kRelu ? std::max(v, 0.0f) : sigmoid(v);
  return input;
}

inline Tensor upsample_nearest(const Tensor& input, int factor) {
  if (factor < 1) throw ConfigError("upsample_nearest: factor must be >= 1");
  const Shape& in = input.shape();
  Tensor out(Shape{in.n, in.c, in.h * factor, in.w * factor});
  for (int b = 0; b < in.n; ++b) {
    for (int ch = 0; ch < in.c; ++ch) {
      for (int y = 0; y < out.h(); ++y) {
        for (int x = 0; x < out.w(); ++x) out.at(b, ch, y, x) = input.at(b, ch, y / factor, x / factor);
      }
    }
  }
  return out;
}

/// Top-left spatial crop to (h, w).
inline Tensor crop(const Tensor& input, int h, int w) {
  const Shape& in = input.shape();
  if (h > in.h || w > in.w || h < 0 || w < 0) {
    throw ShapeError("crop: target " + std::to_string(h) + "x" + std::to_string(w) + " exceeds input " +
                     std::to_string(in.h) + "x" + std::to_string(in.w));
  }
  if (h == in.h && w == in.w) return input;
  Tensor out(Shape{in.n, in.c, h, w});
  for (int b = 0; b < in.n; ++b) {
    for (int ch = 0; ch < in.c; ++ch) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) out.at(b, ch, y, x) = input.at(b, ch, y, x);
      }
    }
  }
  return out;
}

/// Elementwise a + coeff * b.
inline Tensor add_scaled(Tensor a, const Tensor& b, float coeff) {
  if (a.shape() != b.shape()) {
    throw ShapeError("add_scaled: shape " + a.shape().str() + " vs " + b.shape().str());
  }
  auto dst = a.data();
  const auto src = b.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += coeff * src[i];
  return a;
}

inline Tensor concat_channels(std::span<const Tensor> inputs) {
  if (inputs.empty()) throw ShapeError("concat_channels: empty input list");
  const Shape& first = inputs.front().shape();
  int channels = 0;
  for (const Tensor& t : inputs) {
    const Shape& s = t.shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w) {
      throw ShapeError("concat_channels: spatial mismatch " + s.str() + " vs " + first.str());
    }
    channels += s.c;
  }
  Tensor out(Shape{first.n, channels, first.h, first.w});
  for (int b = 0; b < first.n; ++b) {
    int base = 0;
    for (const Tensor& t : inputs) {
      for (int ch = 0; ch < t.c(); ++ch) {
        const auto src = t.plane(b, ch);
        std::copy(src.begin(), src.end(), out.plane(b, base + ch).begin());
      }
      base += t.c();
    }
  }
  return out;
}

/// Channels [begin, begin + count).
inline Tensor slice_channels(const Tensor& input, int begin, int count) {
  const Shape& in = input.shape();
  if (begin < 0 || count < 0 || begin + count > in.c) {
    throw ShapeError("slice_channels: range [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                     ") outside " + std::to_string(in.c) + " channels");
  }
  Tensor out(Shape{in.n, count, in.h, in.w});
  for (int b = 0; b < in.n; ++b) {
    for (int ch = 0; ch < count; ++ch) {
      const auto src = input.plane(b, begin + ch);
      std::copy(src.begin(), src.end(), out.plane(b, ch).begin());
    }
  }
  return out;
}

/// Affine map y = W x + b. `weight` stores the k x m matrix output-major,
/// as a (m, k, 1, 1) tensor so it shares the 1x1-convolution layout.
inline std::vector<float> linear(std::span<const float> input, const Tensor& weight, std::span<const float> bias) {
  const Shape& ws = weight.shape();
  if (ws.h != 1 || ws.w != 1) throw ShapeError("linear: weight must have shape (m, k, 1, 1), got " + ws.str());
  if (static_cast<std::size_t>(ws.c) != input.size()) {
    throw ShapeError("linear: input length " + std::to_string(input.size()) + " vs weight in-dim " +
                     std::to_string(ws.c));
  }
  if (bias.size() != static_cast<std::size_t>(ws.n)) {
    throw ShapeError("linear: bias length " + std::to_string(bias.size()) + " vs weight out-dim " +
                     std::to_string(ws.n));
  }
  std::vector<float> out(ws.n);
  const auto wd = weight.data();
  for (int o = 0; o < ws.n; ++o) {
    double acc = bias[o];
    for (int i = 0; i < ws.c; ++i) acc += static_cast<double>(wd[static_cast<std::size_t>(o) * ws.c + i]) * input[i];
    out[o] = static_cast<float>(acc);
  }
  return out;
}

}  // namespace maskdet
