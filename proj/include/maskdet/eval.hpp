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
#include <cstddef>
#include <span>
#include <vector>

#include "maskdet/boxes.hpp"
#include "maskdet/config.hpp"
#include "maskdet/postproc.hpp"

namespace maskdet {

struct GroundTruth {
  ObjectClass label = ObjectClass::kFace;
  BoundingBox box;
};

struct ClassCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  ClassCounts& operator+=(const ClassCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

/// Counts for face (index 0) and mask (index 1).
struct EvalCounts {
  std::array<ClassCounts, 2> per_class{};

  ClassCounts& operator[](ObjectClass c) { return per_class[static_cast<int>(c) - 1]; }
  const ClassCounts& operator[](ObjectClass c) const { return per_class[static_cast<int>(c) - 1]; }

  EvalCounts& operator+=(const EvalCounts& o) {
    per_class[0] += o.per_class[0];
    per_class[1] += o.per_class[1];
    return *this;
  }
  friend bool operator==(const EvalCounts&, const EvalCounts&) = default;
};

inline constexpr std::array<ObjectClass, 2> kObjectClasses{ObjectClass::kFace, ObjectClass::kMask};

/// Greedy per-class matching for one image. Detections are visited by
/// descending confidence; each claims the unclaimed ground truth of its class
/// with the highest IoU >= iou_thresh (TP) or is a FP. Unclaimed ground
/// truths are FN.
inline EvalCounts match_for_eval(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                                 float iou_thresh = 0.5f) {
  EvalCounts counts;
  for (ObjectClass cls : kObjectClasses) {
    std::vector<const Detection*> ranked;
    for (const Detection& d : dets) {
      if (d.label == cls) ranked.push_back(&d);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const Detection* a, const Detection* b) { return a->confidence > b->confidence; });
    std::vector<const GroundTruth*> truths;
    for (const GroundTruth& g : gts) {
      if (g.label == cls) truths.push_back(&g);
    }
    std::vector<char> claimed(truths.size(), 0);
    ClassCounts& c = counts[cls];
    for (const Detection* d : ranked) {
      float best = -1.0f;
      std::size_t best_idx = truths.size();
      for (std::size_t g = 0; g < truths.size(); ++g) {
        if (claimed[g]) continue;
        const float v = iou(d->box, truths[g]->box);
        if (v >= iou_thresh && v > best) {
          best = v;
          best_idx = g;
        }
      }
      if (best_idx < truths.size()) {
        claimed[best_idx] = 1;
        ++c.tp;
      } else {
        ++c.fp;
      }
    }
    c.fn = static_cast<std::size_t>(std::count(claimed.begin(), claimed.end(), 0));
  }
  return counts;
}

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

/// TP / (TP + FP) and TP / (TP + FN); a zero denominator gives 0.
inline PrecisionRecall precision_recall(const ClassCounts& c) {
  PrecisionRecall pr;
  if (c.tp + c.fp > 0) pr.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) pr.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  return pr;
}

inline std::array<PrecisionRecall, 2> precision_recall(const EvalCounts& counts) {
  return {precision_recall(counts.per_class[0]), precision_recall(counts.per_class[1])};
}

}  // namespace maskdet
