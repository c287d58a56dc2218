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
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "maskdet/anchors.hpp"
#include "maskdet/config.hpp"
#include "maskdet/errors.hpp"
#include "maskdet/model.hpp"

namespace maskdet {

inline double smooth_l1(double x) noexcept {
  const double ax = std::abs(x);
  return ax < 1.0 ? 0.5 * x * x : ax - 0.5;
}

/// -log softmax(logits)[label], computed with a max shift.
inline double cross_entropy(std::span<const float> logits, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
    throw ConfigError("cross_entropy: label " + std::to_string(label) + " out of range");
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (float v : logits) sum += std::exp(static_cast<double>(v) - mx);
  return std::log(sum) + mx - static_cast<double>(logits[label]);
}

/// Background anchors with the highest confidence loss, at most
/// `ratio` per positive (one when there are no positives). Ties go to the
/// lower index. Returned indices are in ascending order.
inline std::vector<std::size_t> hard_negative_mining(std::span<const double> conf_loss, std::span<const int> labels,
                                                     int ratio = 3) {
  if (conf_loss.size() != labels.size()) throw ShapeError("hard_negative_mining: loss/label length mismatch");
  std::vector<std::size_t> negatives;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 0) {
      negatives.push_back(i);
    } else {
      ++positives;
    }
  }
  const std::size_t want = positives == 0 ? 1 : static_cast<std::size_t>(ratio) * positives;
  const std::size_t keep = std::min(want, negatives.size());
  std::partial_sort(negatives.begin(), negatives.begin() + static_cast<std::ptrdiff_t>(keep), negatives.end(),
                    [&](std::size_t a, std::size_t b) { return conf_loss[a] > conf_loss[b] || (conf_loss[a] == conf_loss[b] && a < b); });
  negatives.resize(keep);
  std::sort(negatives.begin(), negatives.end());
  return negatives;
}

struct LossBreakdown {
  double total = 0.0;
  double conf_pos = 0.0;
  double conf_neg = 0.0;
  double loc = 0.0;
  std::size_t num_pos = 0;
  std::size_t num_neg = 0;
  std::size_t normalizer = 0;
};

struct LossOptions {
  double alpha = 1.0;
  int neg_pos_ratio = 3;
};

/// (conf_neg + conf_pos + alpha * loc) / N with N the number of positive
/// anchors; zero when N = 0.
inline LossBreakdown multibox_loss(const Predictions& pred, const MatchResult& targets, LossOptions opts = {}) {
  const std::size_t p = pred.count;
  if (targets.labels.size() != p || targets.loc_targets.size() != p || pred.loc.size() != 4 * p ||
      pred.cls.size() != kNumClasses * p) {
    throw ShapeError("multibox_loss: " + std::to_string(p) + " prediction rows vs " +
                     std::to_string(targets.labels.size()) + " target rows");
  }
  LossBreakdown out;
  std::vector<double> background_loss(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    const int label = targets.labels[i];
    if (label == 0) {
      background_loss[i] = cross_entropy(pred.cls_row(i), 0);
      continue;
    }
    ++out.num_pos;
    out.conf_pos += cross_entropy(pred.cls_row(i), label);
    const Offsets row = pred.loc_row(i);
    for (int k = 0; k < 4; ++k) {
      out.loc += smooth_l1(row[k] - targets.loc_targets[i][k]);
    }
  }
  const auto mined = hard_negative_mining(background_loss, targets.labels, opts.neg_pos_ratio);
  out.num_neg = mined.size();
  for (std::size_t i : mined) out.conf_neg += background_loss[i];
  out.normalizer = out.num_pos;
  if (out.normalizer > 0) {
    out.total = (out.conf_neg + out.conf_pos + opts.alpha * out.loc) / static_cast<double>(out.normalizer);
  }
  return out;
}

}  // namespace maskdet
