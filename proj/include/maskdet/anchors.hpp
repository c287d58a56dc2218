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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "maskdet/boxes.hpp"
#include "maskdet/config.hpp"
#include "maskdet/errors.hpp"

namespace maskdet {

/// Grid of one pyramid level.
struct LevelLayout {
  int grid_h = 0;
  int grid_w = 0;
  int anchors_per_cell = 0;
  int stride = 0;

  std::size_t count() const noexcept {
    return static_cast<std::size_t>(grid_h) * static_cast<std::size_t>(grid_w) *
           static_cast<std::size_t>(anchors_per_cell);
  }
  friend bool operator==(const LevelLayout&, const LevelLayout&) = default;
};

/// Default anchors in canonical order: level-major (shallow first), then
/// row-major cells, then anchor index within the cell. Prediction rows use
/// the same order.
struct AnchorSet {
  std::vector<Anchor> anchors;
  std::vector<LevelLayout> levels;

  std::size_t size() const noexcept { return anchors.size(); }

  /// Row index of (level, cell row, cell column, anchor).
  std::size_t index(int level, int row, int col, int a) const {
    std::size_t base = 0;
    for (int l = 0; l < level; ++l) base += levels[l].count();
    const LevelLayout& lv = levels[level];
    return base + (static_cast<std::size_t>(row) * lv.grid_w + col) * lv.anchors_per_cell + a;
  }
};

/// Square anchors centred on every grid cell; anchor a at stride s has side
/// s * 2^(a + 1), i.e. {2s, 4s} for two anchors per cell.
inline AnchorSet generate_anchors(const ModelConfig& config) {
  if (config.input_size < 1) throw ConfigError("generate_anchors: input_size must be positive");
  if (config.anchors_per_cell < 1) throw ConfigError("generate_anchors: anchors_per_cell must be positive");
  AnchorSet set;
  std::size_t total = 0;
  for (int l = 0; l < static_cast<int>(config.strides.size()); ++l) {
    if (config.strides[l] < 1) throw ConfigError("generate_anchors: strides must be positive");
    const int g = config.grid_extent(l);
    set.levels.push_back(LevelLayout{g, g, config.anchors_per_cell, config.strides[l]});
    total += set.levels.back().count();
  }
  set.anchors.reserve(total);
  for (const LevelLayout& lv : set.levels) {
    const float s = static_cast<float>(lv.stride);
    for (int i = 0; i < lv.grid_h; ++i) {
      for (int j = 0; j < lv.grid_w; ++j) {
        for (int a = 0; a < lv.anchors_per_cell; ++a) {
          const float side = s * static_cast<float>(2 << a);
          set.anchors.push_back(Anchor{(static_cast<float>(j) + 0.5f) * s, (static_cast<float>(i) + 0.5f) * s, side, side});
        }
      }
    }
  }
  return set;
}

/// Per-anchor regression targets and class labels.
struct MatchResult {
  std::vector<Offsets> loc_targets;  // meaningful only where labels != 0
  std::vector<int> labels;           // 0 background, 1 face, 2 mask

  std::size_t num_positive() const noexcept {
    std::size_t n = 0;
    for (int l : labels) n += l != 0;
    return n;
  }
};

/// Two-phase assignment. Every ground truth first claims its best anchor
/// (highest IoU, lower index on ties, skipping anchors already claimed by an
/// earlier ground truth); every remaining anchor whose best IoU reaches
/// `pos_thresh` then takes the label of that best ground truth.
inline MatchResult match_targets(const AnchorSet& anchors, std::span<const BoundingBox> gt_boxes,
                                 std::span<const ObjectClass> gt_labels, float pos_thresh = 0.35f,
                                 Variances variances = {}) {
  if (gt_boxes.size() != gt_labels.size()) {
    throw ShapeError("match_targets: " + std::to_string(gt_boxes.size()) + " boxes but " +
                     std::to_string(gt_labels.size()) + " labels");
  }
  for (std::size_t g = 0; g < gt_boxes.size(); ++g) {
    if (!gt_boxes[g].valid() || !(gt_boxes[g].width() > 0.0f) || !(gt_boxes[g].height() > 0.0f)) {
      throw ConfigError("match_targets: ground truth " + std::to_string(g) + " is degenerate");
    }
    if (gt_labels[g] != ObjectClass::kFace && gt_labels[g] != ObjectClass::kMask) {
      throw ConfigError("match_targets: ground truth " + std::to_string(g) + " has a non-object label");
    }
  }

  const std::size_t p = anchors.size();
  MatchResult result;
  result.loc_targets.assign(p, Offsets{0.0f, 0.0f, 0.0f, 0.0f});
  result.labels.assign(p, 0);
  if (gt_boxes.empty()) return result;

  std::vector<BoundingBox> corners(p);
  for (std::size_t i = 0; i < p; ++i) corners[i] = anchors.anchors[i].corners();

  // Best ground truth per anchor.
  std::vector<float> best_iou(p, 0.0f);
  std::vector<int> best_gt(p, -1);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t g = 0; g < gt_boxes.size(); ++g) {
      const float v = iou(corners[i], gt_boxes[g]);
      if (v > best_iou[i]) {
        best_iou[i] = v;
        best_gt[i] = static_cast<int>(g);
      }
    }
  }

  std::vector<int> forced(p, -1);
  for (std::size_t g = 0; g < gt_boxes.size(); ++g) {
    float top = 0.0f;
    std::size_t top_idx = p;
    for (std::size_t i = 0; i < p; ++i) {
      if (forced[i] >= 0) continue;
      const float v = iou(corners[i], gt_boxes[g]);
      if (v > top) {
        top = v;
        top_idx = i;
      }
    }
    if (top_idx < p) forced[top_idx] = static_cast<int>(g);
  }

  for (std::size_t i = 0; i < p; ++i) {
    int g = forced[i];
    if (g < 0 && best_gt[i] >= 0 && best_iou[i] >= pos_thresh) g = best_gt[i];
    if (g < 0) continue;
    result.labels[i] = static_cast<int>(gt_labels[g]);
    result.loc_targets[i] = encode(gt_boxes[g], anchors.anchors[i], variances);
  }
  return result;
}

}  // namespace maskdet
