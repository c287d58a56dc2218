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
#include <string>

#include "maskdet/errors.hpp"

namespace maskdet {

/// Axis-aligned box in corner form, pixel units.
struct BoundingBox {
  float x_min = 0.0f;
  float y_min = 0.0f;
  float x_max = 0.0f;
  float y_max = 0.0f;

  float width() const noexcept { return x_max - x_min; }
  float height() const noexcept { return y_max - y_min; }
  float area() const noexcept { return std::max(0.0f, width()) * std::max(0.0f, height()); }
  bool valid() const noexcept {
    return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) && std::isfinite(y_max) &&
           x_min <= x_max && y_min <= y_max;
  }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Default box in center-size form.
struct Anchor {
  float cx = 0.0f;
  float cy = 0.0f;
  float w = 0.0f;
  float h = 0.0f;

  BoundingBox corners() const noexcept { return {cx - 0.5f * w, cy - 0.5f * h, cx + 0.5f * w, cy + 0.5f * h}; }
  friend bool operator==(const Anchor&, const Anchor&) = default;
};

struct Variances {
  float center = 0.1f;
  float size = 0.2f;
};

/// Encoded box offsets. Kept in double so encode/decode round-trips to the
/// float box exactly.
using Offsets = std::array<double, 4>;

inline float iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double iw = std::min<double>(a.x_max, b.x_max) - std::max<double>(a.x_min, b.x_min);
  const double ih = std::min<double>(a.y_max, b.y_max) - std::max<double>(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0f;
  const double inter = iw * ih;
  const double uni = static_cast<double>(a.area()) + static_cast<double>(b.area()) - inter;
  if (uni <= 0.0) return 0.0f;
  return static_cast<float>(std::clamp(inter / uni, 0.0, 1.0));
}

/// Offsets of `gt` relative to `anchor`:
///   ((gcx - cx) / (w v0), (gcy - cy) / (h v0), ln(gw / w) / v1, ln(gh / h) / v1)
inline Offsets encode(const BoundingBox& gt, const Anchor& anchor, Variances v = {}) {
  const double gw = static_cast<double>(gt.x_max) - gt.x_min;
  const double gh = static_cast<double>(gt.y_max) - gt.y_min;
  if (!(gw > 0.0) || !(gh > 0.0)) throw ConfigError("encode: ground-truth box has non-positive extent");
  const double gcx = 0.5 * (static_cast<double>(gt.x_min) + gt.x_max);
  const double gcy = 0.5 * (static_cast<double>(gt.y_min) + gt.y_max);
  return {(gcx - anchor.cx) / (anchor.w * static_cast<double>(v.center)),
          (gcy - anchor.cy) / (anchor.h * static_cast<double>(v.center)), std::log(gw / anchor.w) / v.size,
          std::log(gh / anchor.h) / v.size};
}

/// Inverse of encode, in corner form. A positive `clip_extent` clamps every
/// coordinate to [0, clip_extent].
inline BoundingBox decode(const Offsets& t, const Anchor& anchor, Variances v = {}, float clip_extent = 0.0f) {
  const double cx = anchor.cx + t[0] * v.center * anchor.w;
  const double cy = anchor.cy + t[1] * v.center * anchor.h;
  const double w = anchor.w * std::exp(t[2] * v.size);
  const double h = anchor.h * std::exp(t[3] * v.size);
  BoundingBox box{static_cast<float>(cx - 0.5 * w), static_cast<float>(cy - 0.5 * h),
                  static_cast<float>(cx + 0.5 * w), static_cast<float>(cy + 0.5 * h)};
  if (clip_extent > 0.0f) {
    box.x_min = std::clamp(box.x_min, 0.0f, clip_extent);
    box.y_min = std::clamp(box.y_min, 0.0f, clip_extent);
    box.x_max = std::clamp(box.x_max, 0.0f, clip_extent);
    box.y_max = std::clamp(box.y_max, 0.0f, clip_extent);
  }
  return box;
}

}  // namespace maskdet
