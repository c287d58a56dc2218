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
#include <string>

#include "maskdet/errors.hpp"

namespace maskdet {

inline constexpr int kNumClasses = 3;  // background, face, mask

/// Object categories. Values double as class-logit column indices.
enum class ObjectClass : int { kBackground = 0, kFace = 1, kMask = 2 };

inline const char* class_name(ObjectClass c) {
  switch (c) {
    case ObjectClass::kFace:
      return "face";
    case ObjectClass::kMask:
      return "mask";
    case ObjectClass::kBackground:
      break;
  }
  return "background";
}

/// Geometry and width hyperparameters of the detector.
struct ModelConfig {
  int input_size = 640;
  std::array<int, 3> strides{8, 16, 32};
  int anchors_per_cell = 2;
  int num_classes = kNumClasses;
  int fpn_channels = 64;
  float fpn_coeff = 1.0f;
  int cbam_reduction = 4;

  /// Side length of one feature-map grid at `level`: ceil(input_size / stride).
  int grid_extent(int level) const { return (input_size + strides[level] - 1) / strides[level]; }

  void validate() const {
    if (input_size < 1) throw ConfigError("input_size must be positive");
    for (int i = 0; i < 3; ++i) {
      if (strides[i] < 1) throw ConfigError("strides must be positive");
      if (i > 0 && strides[i] <= strides[i - 1]) throw ConfigError("strides must be strictly increasing");
    }
    if (anchors_per_cell < 1) throw ConfigError("anchors_per_cell must be positive");
    if (num_classes != kNumClasses) throw ConfigError("num_classes must be 3 (background, face, mask)");
    if (fpn_channels < 4 || fpn_channels % 4 != 0) throw ConfigError("fpn_channels must be a positive multiple of 4");
    if (cbam_reduction < 1 || fpn_channels % cbam_reduction != 0) {
      throw ConfigError("cbam_reduction must divide fpn_channels");
    }
  }
};

}  // namespace maskdet
