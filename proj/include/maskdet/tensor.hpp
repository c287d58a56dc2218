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
#include <cassert>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maskdet/errors.hpp"

namespace maskdet {

/// Extents of a 4-D tensor in (batch, channels, height, width) order.
struct Shape {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  constexpr std::size_t numel() const noexcept {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(c) * static_cast<std::size_t>(h) *
           static_cast<std::size_t>(w);
  }
  constexpr std::size_t plane() const noexcept {
    return static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
  }
  friend constexpr bool operator==(const Shape&, const Shape&) = default;

  std::string str() const {
    return "(" + std::to_string(n) + ", " + std::to_string(c) + ", " + std::to_string(h) + ", " +
           std::to_string(w) + ")";
  }
};

/// Dense float32 NCHW tensor with contiguous row-major storage.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape, float fill = 0.0f) : shape_(checked(shape)), data_(shape.numel(), fill) {}

  Tensor(Shape shape, std::vector<float> data) : shape_(checked(shape)), data_(std::move(data)) {
    if (data_.size() != shape_.numel()) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                       shape_.str());
    }
  }

  const Shape& shape() const noexcept { return shape_; }
  int n() const noexcept { return shape_.n; }
  int c() const noexcept { return shape_.c; }
  int h() const noexcept { return shape_.h; }
  int w() const noexcept { return shape_.w; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  std::size_t offset(int n, int c, int y, int x) const noexcept {
    assert(n >= 0 && n < shape_.n && c >= 0 && c < shape_.c && y >= 0 && y < shape_.h && x >= 0 && x < shape_.w);
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }
  float& at(int n, int c, int y, int x) noexcept { return data_[offset(n, c, y, x)]; }
  float at(int n, int c, int y, int x) const noexcept { return data_[offset(n, c, y, x)]; }

  /// One (h, w) plane.
  std::span<const float> plane(int n, int c) const noexcept {
    return std::span<const float>(data_).subspan(offset(n, c, 0, 0), shape_.plane());
  }
  std::span<float> plane(int n, int c) noexcept {
    return std::span<float>(data_).subspan(offset(n, c, 0, 0), shape_.plane());
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  static Shape checked(Shape s) {
    if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0) throw ShapeError("negative extent in shape " + s.str());
    return s;
  }

  Shape shape_{};
  std::vector<float> data_;
};

}  // namespace maskdet
