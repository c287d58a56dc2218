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

#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "maskdet/anchors.hpp"
#include "maskdet/boxes.hpp"
#include "maskdet/eval.hpp"
#include "maskdet/kernels.hpp"
#include "maskdet/loss.hpp"
#include "maskdet/postproc.hpp"
#include "maskdet/testing/oracles.hpp"
#include "maskdet/weights.hpp"

// Quick oracle checks bundled into the binary (`maskdet selftest`).

namespace maskdet {

namespace selftest_detail {

inline bool kernels(std::mt19937& rng) {
  std::uniform_int_distribution<int> ext(1, 8), chan(1, 4), ks(1, 3), st(1, 2), pd(0, 1);
  for (int trial = 0; trial < 25; ++trial) {
    const int groups = trial % 3 == 0 ? 0 : 1;  // 0 marks a depthwise trial
    const int cin = chan(rng);
    const int k = ks(rng);
    const int h = std::max(k, ext(rng)), w = std::max(k, ext(rng));
    const int g = groups == 0 ? cin : 1;
    const int cout = groups == 0 ? cin : chan(rng);
    const Tensor x = testing::random_tensor({1, cin, h, w}, rng);
    const Tensor kern = testing::random_tensor({cout, cin / g, k, k}, rng);
    const Tensor bias = testing::random_tensor({1, cout, 1, 1}, rng);
    const int s = st(rng), p = pd(rng);
    const Tensor got = conv2d(x, ConvParams{.kernel = kern, .bias = bias.data(), .stride = {s, s}, .padding = {p, p}, .groups = g});
    if (testing::max_abs_diff(got, testing::naive_conv2d(x, kern, bias.data(), s, s, p, p, g)) > 1e-5f) return false;
    const Tensor pool = pool2d(x, PoolMode::kMax, {1, 1}, {1, 1});
    if (testing::max_abs_diff(pool, testing::naive_pool2d(x, PoolMode::kMax, 1, 1, 1, 1)) > 1e-5f) return false;
    if (testing::max_abs_diff(upsample_nearest(x, 2), testing::naive_upsample(x, 2)) != 0.0f) return false;
  }
  return true;
}

inline bool geometry(std::mt19937& rng) {
  if (std::abs(iou({0, 0, 10, 10}, {5, 0, 15, 10}) - 1.0f / 3.0f) > 1e-6f) return false;
  std::uniform_real_distribution<float> pos(0.0f, 600.0f), side(1.0f, 200.0f);
  for (int i = 0; i < 1000; ++i) {
    const Anchor a{pos(rng), pos(rng), side(rng), side(rng)};
    const float x = pos(rng), y = pos(rng);
    const BoundingBox gt{x, y, x + side(rng), y + side(rng)};
    const BoundingBox back = decode(encode(gt, a), a);
    if (std::abs(back.x_min - gt.x_min) > 1e-5f || std::abs(back.y_max - gt.y_max) > 1e-5f) return false;
  }
  ModelConfig c;
  if (generate_anchors(c).size() != 16800) return false;
  c.input_size = 840;
  return generate_anchors(c).size() == 29126;
}

inline std::vector<Detection> random_dets(std::mt19937& rng, std::size_t n, ObjectClass label) {
  std::uniform_real_distribution<float> conf(0.0f, 1.0f);
  std::vector<Detection> out;
  for (const auto& b : testing::random_boxes(n, rng)) out.push_back({b, label, conf(rng)});
  return out;
}

inline bool suppression(std::mt19937& rng) {
  for (int trial = 0; trial < 100; ++trial) {
    const auto cands = random_dets(rng, 1 + trial % 50, ObjectClass::kFace);
    if (nms(cands, 0.4f) != testing::reference_nms(cands, 0.4f)) return false;
    auto faces = nms(random_dets(rng, trial % 10, ObjectClass::kFace), 0.4f);
    auto masks = nms(random_dets(rng, trial % 7, ObjectClass::kMask), 0.4f);
    if (orcc(faces, masks, 0.5f) != testing::orcc_fixed_point(faces, masks, 0.5f)) return false;
  }
  const Detection face{{0, 0, 10, 10}, ObjectClass::kFace, 0.9f};
  const Detection mask{{1, 1, 11, 11}, ObjectClass::kMask, 0.8f};
  const auto [f, m] = orcc({face}, {mask}, 0.4f);
  return f.size() == 1 && m.empty();
}

inline bool loss() {
  Predictions pred;
  pred.count = 3;
  pred.loc.assign(12, 0.0f);
  pred.cls = {0.0f, 50.0f, 0.0f, 0.0f, 0.0f, 0.0f, 0.0f, 0.0f, 0.0f};
  MatchResult targets;
  targets.loc_targets.assign(3, Offsets{0, 0, 0, 0});
  targets.labels = {1, 0, 0};
  const LossBreakdown l = multibox_loss(pred, targets);
  return std::abs(l.total - 2.0 * std::log(3.0)) < 1e-4 && l.normalizer == 1;
}

inline bool metrics() {
  const std::vector<GroundTruth> gts{{ObjectClass::kFace, {0, 0, 10, 10}}, {ObjectClass::kFace, {20, 20, 30, 30}}};
  const std::vector<Detection> dets{{{0, 0, 10, 10}, ObjectClass::kFace, 0.9f},
                                    {{20, 20, 30, 30}, ObjectClass::kFace, 0.8f},
                                    {{50, 50, 60, 60}, ObjectClass::kFace, 0.7f}};
  const auto pr = precision_recall(match_for_eval(dets, gts));
  return std::abs(pr[0].precision - 2.0 / 3.0) < 1e-9 && std::abs(pr[0].recall - 1.0) < 1e-9;
}

inline bool formats(std::mt19937& rng) {
  WeightStore store;
  store.insert("a", testing::random_tensor({2, 3, 1, 1}, rng));
  store.insert("b", testing::random_tensor({1, 1, 1, 5}, rng));
  const auto bytes = serialize_weights(store);
  if (serialize_weights(deserialize_weights(bytes)) != bytes) return false;
  auto bad = bytes;
  bad[0] = 'X';
  try {
    deserialize_weights(bad);
  } catch (const WeightsFormatError& e) {
    return e.kind() == WeightsFormatError::Kind::kBadMagic;
  }
  return false;
}

}  // namespace selftest_detail

/// Runs every suite, printing one PASS/FAIL line each. True iff all pass.
inline bool run_selftest(std::ostream& os, unsigned seed = 20200501u) {
  std::mt19937 rng(seed);
  const std::vector<std::pair<std::string, std::function<bool()>>> suites{
      {"kernels", [&] { return selftest_detail::kernels(rng); }},
      {"geometry", [&] { return selftest_detail::geometry(rng); }},
      {"nms+orcc", [&] { return selftest_detail::suppression(rng); }},
      {"loss", [] { return selftest_detail::loss(); }},
      {"metrics", [] { return selftest_detail::metrics(); }},
      {"formats", [&] { return selftest_detail::formats(rng); }},
  };
  bool all = true;
  for (const auto& [name, fn] : suites) {
    bool ok = false;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      os << "  exception in " << name << ": " << e.what() << "\n";
    }
    os << (ok ? "PASS " : "FAIL ") << name << "\n";
    all = all && ok;
  }
  return all;
}

}  // namespace maskdet
