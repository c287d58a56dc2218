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
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "maskdet/anchors.hpp"
#include "maskdet/boxes.hpp"
#include "maskdet/config.hpp"
#include "maskdet/errors.hpp"
#include "maskdet/model.hpp"

namespace maskdet {

struct Detection {
  BoundingBox box;
  ObjectClass label = ObjectClass::kFace;
  float confidence = 0.0f;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Which side of an equal-confidence face/mask overlap is dropped.
enum class OrccTie { kRemoveMask, kRemoveFace };

struct Thresholds {
  float confidence = 0.5f;
  float nms_iou = 0.4f;
  float orcc_iou = 0.5f;
  OrccTie orcc_tie = OrccTie::kRemoveMask;
};

struct ClassCandidates {
  std::vector<Detection> faces;
  std::vector<Detection> masks;
};

/// Softmax over each class row; one decoded face and one decoded mask
/// candidate per anchor, in anchor order.
inline ClassCandidates score_predictions(const Predictions& pred, const AnchorSet& anchors, float clip_extent = 0.0f,
                                         Variances variances = {}) {
  if (pred.count != anchors.size() || pred.loc.size() != 4 * pred.count || pred.cls.size() != kNumClasses * pred.count) {
    throw ShapeError("score_predictions: " + std::to_string(pred.count) + " prediction rows vs " +
                     std::to_string(anchors.size()) + " anchors");
  }
  ClassCandidates out;
  out.faces.reserve(pred.count);
  out.masks.reserve(pred.count);
  for (std::size_t i = 0; i < pred.count; ++i) {
    const auto logits = pred.cls_row(i);
    const double mx = std::max({logits[0], logits[1], logits[2]});
    double e[kNumClasses];
    double sum = 0.0;
    for (int k = 0; k < kNumClasses; ++k) sum += e[k] = std::exp(static_cast<double>(logits[k]) - mx);
    const BoundingBox box = decode(pred.loc_row(i), anchors.anchors[i], variances, clip_extent);
    out.faces.push_back({box, ObjectClass::kFace, static_cast<float>(e[1] / sum)});
    out.masks.push_back({box, ObjectClass::kMask, static_cast<float>(e[2] / sum)});
  }
  return out;
}

/// Keeps candidates with confidence >= threshold, preserving order.
inline std::vector<Detection> filter_confidence(std::vector<Detection> cands, float threshold) {
  std::erase_if(cands, [threshold](const Detection& d) { return !(d.confidence >= threshold); });
  return cands;
}

/// Greedy single-class NMS. Candidates are visited by descending confidence
/// (lower input index first on ties); a candidate survives unless it
/// overlaps an already kept box with IoU > iou_thresh.
inline std::vector<Detection> nms(std::vector<Detection> cands, float iou_thresh) {
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Detection& a, const Detection& b) { return a.confidence > b.confidence; });
  std::vector<char> suppressed(cands.size(), 0);
  std::vector<Detection> kept;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (suppressed[i]) continue;
    kept.push_back(cands[i]);
    for (std::size_t j = i + 1; j < cands.size(); ++j) {
      if (!suppressed[j] && iou(cands[i].box, cands[j].box) > iou_thresh) suppressed[j] = 1;
    }
  }
  return kept;
}

/// Cross-class removal: for each face in order, for each not-yet-removed
/// mask in order, an overlap above `thresh` drops the lower-confidence member.
/// Once a face is dropped its remaining comparisons are skipped.
inline std::pair<std::vector<Detection>, std::vector<Detection>> orcc(const std::vector<Detection>& faces,
                                                                      const std::vector<Detection>& masks, float thresh,
                                                                      OrccTie tie = OrccTie::kRemoveMask) {
  std::vector<char> face_gone(faces.size(), 0);
  std::vector<char> mask_gone(masks.size(), 0);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (std::size_t m = 0; m < masks.size(); ++m) {
      if (mask_gone[m]) continue;
      if (!(iou(faces[f].box, masks[m].box) > thresh)) continue;
      const float cf = faces[f].confidence;
      const float cm = masks[m].confidence;
      const bool drop_face = cf < cm || (cf == cm && tie == OrccTie::kRemoveFace);
      if (drop_face) {
        face_gone[f] = 1;
        break;
      }
      mask_gone[m] = 1;
    }
  }
  std::pair<std::vector<Detection>, std::vector<Detection>> out;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (!face_gone[f]) out.first.push_back(faces[f]);
  }
  for (std::size_t m = 0; m < masks.size(); ++m) {
    if (!mask_gone[m]) out.second.push_back(masks[m]);
  }
  return out;
}

/// Confidence filter, per-class NMS and cross-class removal over scored
/// candidates. Result is sorted by descending confidence, faces before masks
/// on ties.
inline std::vector<Detection> postprocess(ClassCandidates cands, const Thresholds& t) {
  auto faces = nms(filter_confidence(std::move(cands.faces), t.confidence), t.nms_iou);
  auto masks = nms(filter_confidence(std::move(cands.masks), t.confidence), t.nms_iou);
  auto [kept_faces, kept_masks] = orcc(faces, masks, t.orcc_iou, t.orcc_tie);
  std::vector<Detection> out = std::move(kept_faces);
  out.insert(out.end(), kept_masks.begin(), kept_masks.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const Detection& a, const Detection& b) { return a.confidence > b.confidence; });
  return out;
}

inline std::vector<Detection> detect_from_predictions(const Predictions& pred, const AnchorSet& anchors, float clip_extent,
                                                      const Thresholds& t) {
  return postprocess(score_predictions(pred, anchors, clip_extent), t);
}

/// Full inference on a preprocessed (1, 3, s, s) image; boxes are in the
/// s x s input frame.
inline std::vector<Detection> detect(const Model& model, const Tensor& image, const Thresholds& t = {}) {
  const AnchorSet anchors = generate_anchors(model.config());
  return detect_from_predictions(model_forward(model, image), anchors, static_cast<float>(model.config().input_size), t);
}

}  // namespace maskdet
