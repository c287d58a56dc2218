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

// Acceptance runner: one PASS/FAIL line per criterion.
// usage: acceptance <path-to-maskdet-cli> <work-dir>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "maskdet/maskdet.hpp"
#include "maskdet/testing/oracles.hpp"

namespace fs = std::filesystem;
using namespace maskdet;
using maskdet::testing::max_abs_diff;
using maskdet::testing::random_tensor;

namespace {

// Collects failure notes for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && notes_.size() < 5) notes_.push_back(what);
    failed_ |= !ok;
  }
  bool failed() const { return failed_; }
  std::string summary() const {
    std::string s;
    for (const auto& n : notes_) s += (s.empty() ? "" : "; ") + n;
    return s;
  }

 private:
  bool failed_ = false;
  std::vector<std::string> notes_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Cli {
  std::string exe;
  fs::path work;

  struct Result {
    int code = -1;
    std::string out;
    std::string err;
  };

  Result run(const std::string& args) const {
    const fs::path out = work / "stdout.txt", err = work / "stderr.txt";
    const std::string cmd = "\"" + exe + "\" " + args + " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_text(out);
    r.err = read_text(err);
    return r;
  }
};

void kernel_oracle(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(101);
  std::uniform_int_distribution<int> ext(1, 12), chan(1, 6), ks(1, 5), st(1, 3), pd(0, 2), fac(1, 3);
  int cases = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const bool depthwise = trial % 2 == 1;
    const int cin = chan(rng);
    const int k = ks(rng);
    const int h = std::max(k, ext(rng)), w = std::max(k, ext(rng));
    const int groups = depthwise ? cin : 1;
    const int cout = depthwise ? cin : chan(rng);
    const Tensor x = random_tensor({1 + trial % 2, cin, h, w}, rng);
    const Tensor kern = random_tensor({cout, cin / groups, k, k}, rng);
    const Tensor bias = random_tensor({1, cout, 1, 1}, rng);
    const int sh = st(rng), sw = st(rng), ph = pd(rng), pw = pd(rng);
    const Tensor got = conv2d(x, ConvParams{.kernel = kern, .bias = bias.data(), .stride = {sh, sw}, .padding = {ph, pw}, .groups = groups});
    const float conv_err = max_abs_diff(got, testing::naive_conv2d(x, kern, bias.data(), sh, sw, ph, pw, groups));
    c.expect(conv_err <= 1e-5f, "conv trial " + std::to_string(trial) + " error " + std::to_string(conv_err));

    const int wh = std::min(h, 1 + trial % 3), ww = std::min(w, 1 + trial % 4);
    for (PoolMode mode : {PoolMode::kMax, PoolMode::kAvg}) {
      const float e = max_abs_diff(pool2d(x, mode, {wh, ww}, {sh, sw}), testing::naive_pool2d(x, mode, wh, ww, sh, sw));
      c.expect(e <= 1e-5f, "pool trial " + std::to_string(trial));
    }
    const int f = fac(rng);
    c.expect(max_abs_diff(upsample_nearest(x, f), testing::naive_upsample(x, f)) <= 1e-5f,
             "upsample trial " + std::to_string(trial));
    ++cases;
  }
  c.expect(cases >= 100, "fewer than 100 cases");
  const double secs = seconds_since(t0);
  c.expect(secs < 30.0, "took " + std::to_string(secs) + " s");
}

void geometry(Check& c) {
  c.expect(std::abs(iou({0, 0, 10, 10}, {5, 0, 15, 10}) - 1.0f / 3.0f) <= 1e-6f, "1/3 fixture");
  c.expect(iou({0, 0, 10, 10}, {0, 0, 10, 10}) == 1.0f, "identical boxes");
  c.expect(iou({0, 0, 10, 10}, {20, 20, 30, 30}) == 0.0f, "disjoint boxes");
  c.expect(iou({0, 0, 10, 10}, {10, 0, 20, 10}) == 0.0f, "touching boxes");
  std::mt19937 rng(102);
  for (int i = 0; i < 1000; ++i) {
    const auto b = testing::random_boxes(2, rng, 200.0f);
    const float ab = iou(b[0], b[1]), ba = iou(b[1], b[0]);
    c.expect(ab == ba && ab >= 0.0f && ab <= 1.0f, "iou symmetry/range");
  }
  std::uniform_real_distribution<float> pos(0.0f, 600.0f), side(1.0f, 200.0f);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const float x = pos(rng), y = pos(rng);
    const BoundingBox gt{x, y, x + side(rng), y + side(rng)};
    const Anchor a{pos(rng), pos(rng), side(rng), side(rng)};
    const BoundingBox back = decode(encode(gt, a), a);
    worst = std::max<double>({worst, std::abs(back.x_min - gt.x_min), std::abs(back.y_min - gt.y_min),
                              std::abs(back.x_max - gt.x_max), std::abs(back.y_max - gt.y_max)});
  }
  c.expect(worst <= 1e-5, "round trip error " + std::to_string(worst));
  for (const auto& [size, want] : {std::pair{640, 16800}, std::pair{840, 29126}}) {
    ModelConfig cfg;
    cfg.input_size = size;
    const std::size_t got = generate_anchors(cfg).size();
    c.expect(got == static_cast<std::size_t>(want), "anchors at " + std::to_string(size) + " = " + std::to_string(got));
  }
}

std::vector<Detection> random_dets(std::mt19937& rng, std::size_t n, ObjectClass label, float extent) {
  std::uniform_real_distribution<float> conf(0.0f, 1.0f);
  std::vector<Detection> out;
  for (const auto& b : testing::random_boxes(n, rng, extent)) out.push_back({b, label, conf(rng)});
  return out;
}

void nms_oracle(Check& c) {
  std::mt19937 rng(103);
  std::uniform_int_distribution<int> count(0, 50);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto cands = random_dets(rng, count(rng), trial % 2 ? ObjectClass::kFace : ObjectClass::kMask, 100.0f);
    c.expect(nms(cands, 0.4f) == testing::reference_nms(cands, 0.4f), "set " + std::to_string(trial) + " differs");
  }
}

void orcc_check(Check& c) {
  const auto face = [](BoundingBox b, float s) { return Detection{b, ObjectClass::kFace, s}; };
  const auto mask = [](BoundingBox b, float s) { return Detection{b, ObjectClass::kMask, s}; };
  {
    // IoU 81/119 > 0.4: the lower-confidence mask goes.
    const auto [f, m] = orcc({face({0, 0, 10, 10}, 0.9f)}, {mask({1, 1, 11, 11}, 0.8f)}, 0.4f);
    c.expect(f.size() == 1 && m.empty(), "81/119 fixture");
  }
  {
    const auto [f, m] = orcc({face({0, 0, 10, 10}, 0.9f)}, {mask({50, 50, 60, 60}, 0.95f)}, 0.4f);
    c.expect(f.size() == 1 && m.size() == 1, "disjoint fixture");
  }
  {
    const std::vector<Detection> masks{mask({1, 1, 11, 11}, 0.7f), mask({0, 1, 10, 11}, 0.5f)};
    const auto [f, m] = orcc({face({0, 0, 10, 10}, 0.6f)}, masks, 0.4f);
    c.expect(f.empty() && m == masks, "face-removed-early fixture");
  }
  {
    const auto [f, m] = orcc({face({0, 0, 10, 10}, 0.7f)}, {mask({0, 0, 10, 10}, 0.7f)}, 0.4f);
    c.expect(f.size() == 1 && m.empty(), "tie fixture");
  }
  std::mt19937 rng(104);
  std::uniform_int_distribution<int> count(0, 15);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto faces = nms(random_dets(rng, count(rng), ObjectClass::kFace, 60.0f), 0.4f);
    const auto masks = nms(random_dets(rng, count(rng), ObjectClass::kMask, 60.0f), 0.4f);
    c.expect(orcc(faces, masks, 0.5f) == testing::orcc_fixed_point(faces, masks, 0.5f),
             "set " + std::to_string(trial) + " differs");
  }
}

void loss_check(Check& c) {
  Predictions p;
  p.count = 3;
  p.loc = {0.1f, -0.2f, 0.3f, 0.0f, 0, 0, 0, 0, 0, 0, 0, 0};
  p.cls = {0.0f, 50.0f, 0.0f, 0.0f, 0.0f, 0.0f, 0.0f, 0.0f, 0.0f};
  MatchResult t;
  t.labels = {1, 0, 0};
  t.loc_targets = {Offsets{0.1f, -0.2f, 0.3f, 0.0f}, Offsets{}, Offsets{}};
  const LossBreakdown l = multibox_loss(p, t);
  c.expect(std::abs(l.total - 2.0 * std::log(3.0)) <= 1e-4, "fixture total " + std::to_string(l.total));
  c.expect(l.normalizer == 1, "fixture N");
  t.labels = {0, 0, 0};
  c.expect(multibox_loss(p, t).total == 0.0, "N = 0 total");

  std::mt19937 rng(105);
  std::uniform_real_distribution<double> xd(-4.0, 4.0);
  for (int i = 0; i < 500; ++i) {
    const double x = xd(rng), h = 1e-6;
    if (std::abs(std::abs(x) - 1.0) < 1e-3) continue;
    const double analytic = std::abs(x) < 1.0 ? x : (x > 0 ? 1.0 : -1.0);
    const double numeric = (smooth_l1(x + h) - smooth_l1(x - h)) / (2 * h);
    c.expect(std::abs(numeric - analytic) <= 1e-4, "smooth-L1 derivative at " + std::to_string(x));
  }
  std::uniform_real_distribution<float> zd(-5.0f, 5.0f);
  const float h = 1e-2f;
  for (int trial = 0; trial < 300; ++trial) {
    std::array<float, 3> z{zd(rng), zd(rng), zd(rng)};
    const int label = trial % 3;
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (float v : z) sum += std::exp(v - mx);
    for (int k = 0; k < 3; ++k) {
      const double analytic = std::exp(z[k] - mx) / sum - (k == label ? 1.0 : 0.0);
      auto plus = z, minus = z;
      plus[k] += h;
      minus[k] -= h;
      const double numeric = (cross_entropy(plus, label) - cross_entropy(minus, label)) / (2.0 * h);
      c.expect(std::abs(numeric - analytic) <= 1e-4, "cross-entropy derivative, trial " + std::to_string(trial));
    }
  }
}

void attention_check(Check& c) {
  std::mt19937 rng(106);
  for (int trial = 0; trial < 50; ++trial) {
    // Moderate activations: float32 sigmoid rounds to exactly 1 once its input passes about 17.
    const Tensor f = random_tensor({1, 8, 6, 6}, rng);
    const Tensor w0 = kaiming_init({2, 8, 1, 1}, FanMode::kIn, rng()), b0 = random_tensor({1, 2, 1, 1}, rng);
    const Tensor w1 = kaiming_init({8, 2, 1, 1}, FanMode::kIn, rng()), b1 = random_tensor({1, 8, 1, 1}, rng);
    const Tensor cg = channel_attention_gate(f, ChannelMlp{w0, b0, w1, b1}, 4);
    for (float g : cg.data()) c.expect(g > 0.0f && g < 1.0f, "channel gate outside (0, 1)");
    const Tensor k = kaiming_init({1, 2, 7, 7}, FanMode::kIn, rng()), kb = random_tensor({1, 1, 1, 1}, rng);
    const Tensor sg = spatial_attention_gate(f, k, kb);
    for (float g : sg.data()) c.expect(g > 0.0f && g < 1.0f, "spatial gate outside (0, 1)");

    const Tensor z0({2, 8, 1, 1}), zb0({1, 2, 1, 1}), z1({8, 2, 1, 1}), zb1({1, 8, 1, 1});
    const Tensor ch = channel_attention(f, ChannelMlp{z0, zb0, z1, zb1}, 4);
    const Tensor sp = spatial_attention(f, Tensor({1, 2, 7, 7}), Tensor({1, 1, 1, 1}));
    for (std::size_t i = 0; i < f.size(); ++i) {
      c.expect(ch.data()[i] == 0.5f * f.data()[i], "zero channel gate is not 0.5");
      c.expect(sp.data()[i] == 0.5f * f.data()[i], "zero spatial gate is not 0.5");
    }
  }
  for (int size : {320, 640, 840}) {
    ModelConfig cfg;
    cfg.input_size = size;
    const Model m = build_model(cfg, init_weights(cfg, 3));
    const Predictions p = model_forward(m, random_tensor({1, 3, size, size}, rng, -120.0f, 130.0f));
    const std::size_t anchors = generate_anchors(cfg).size();
    c.expect(p.count == anchors && p.loc.size() == 4 * anchors && p.cls.size() == 3 * anchors,
             "rows at " + std::to_string(size) + " = " + std::to_string(p.count) + " vs " + std::to_string(anchors));
  }
}

void end_to_end(Check& c, const Cli& cli) {
  RgbImage img{320, 240, {}};
  std::mt19937 rng(107);
  std::uniform_int_distribution<int> px(0, 255);
  for (int i = 0; i < img.width * img.height * 3; ++i) img.pixels.push_back(static_cast<std::uint8_t>(px(rng)));
  const fs::path ppm = cli.work / "scene.ppm", weights = cli.work / "seed7.rfmw";
  write_ppm(img, ppm);
  c.expect(cli.run("init-weights --out \"" + weights.string() + "\" --seed 7").code == 0, "init-weights failed");
  std::vector<std::string> outputs;
  for (const char* name : {"run1.json", "run2.json"}) {
    const fs::path out = cli.work / name;
    const auto r = cli.run("detect --weights \"" + weights.string() + "\" --input \"" + ppm.string() + "\" --out \"" +
                           out.string() + "\" --tc 0.34");
    c.expect(r.code == 0, std::string("detect exit ") + std::to_string(r.code) + " " + r.err);
    outputs.push_back(fs::exists(out) ? read_text(out) : std::string());
  }
  c.expect(!outputs[0].empty() && outputs[0] == outputs[1], "detect outputs differ");

  ModelConfig cfg;
  const Model m = build_model(cfg, load_weights(weights));
  const Tensor x = preprocess(img, 640);
  const auto t0 = std::chrono::steady_clock::now();
  const Predictions p = model_forward(m, x);
  const double secs = seconds_since(t0);
  c.expect(p.count == 16800 && secs < 60.0, "640 forward took " + std::to_string(secs) + " s");
}

void evaluator(Check& c) {
  PrecisionRecall pr = precision_recall(ClassCounts{2, 1, 0});
  c.expect(std::abs(pr.precision - 2.0 / 3.0) <= 1e-9 && std::abs(pr.recall - 1.0) <= 1e-9, "TP=2 FP=1 FN=0");
  pr = precision_recall(ClassCounts{0, 0, 3});
  c.expect(pr.precision == 0.0 && pr.recall == 0.0, "TP=0 FP=0");
  pr = precision_recall(ClassCounts{5, 5, 5});
  c.expect(std::abs(pr.precision - 0.5) <= 1e-9 && std::abs(pr.recall - 0.5) <= 1e-9, "TP=FP=FN=5");

  std::mt19937 rng(108);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::uniform_int_distribution<int> count(0, 10);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<GroundTruth> gts;
    std::vector<Detection> dets;
    for (const auto& b : testing::random_boxes(count(rng), rng, 100.0f, 8.0f, 30.0f)) {
      const ObjectClass label = u(rng) < 0.5f ? ObjectClass::kFace : ObjectClass::kMask;
      gts.push_back({label, b});
      if (u(rng) < 0.7f) dets.push_back({{b.x_min + 1, b.y_min, b.x_max + 1, b.y_max}, label, u(rng)});
    }
    for (const auto& b : testing::random_boxes(count(rng) / 2, rng, 100.0f, 8.0f, 30.0f)) {
      dets.push_back({b, u(rng) < 0.5f ? ObjectClass::kFace : ObjectClass::kMask, u(rng)});
    }
    const auto before = precision_recall(match_for_eval(dets, gts));
    const Detection spurious{testing::random_boxes(1, rng, 100.0f, 8.0f, 30.0f)[0],
                             u(rng) < 0.5f ? ObjectClass::kFace : ObjectClass::kMask, u(rng)};
    bool overlaps = false;
    for (const auto& g : gts) overlaps |= g.label == spurious.label && iou(g.box, spurious.box) >= 0.5f;
    if (overlaps) continue;
    dets.push_back(spurious);
    const auto after = precision_recall(match_for_eval(dets, gts));
    for (int k = 0; k < 2; ++k) {
      c.expect(after[k].precision <= before[k].precision && after[k].recall == before[k].recall,
               "spurious detection changed metrics, trial " + std::to_string(trial));
      c.expect(after[k].precision >= 0.0 && after[k].precision <= 1.0 && after[k].recall >= 0.0 && after[k].recall <= 1.0,
               "metric outside [0, 1]");
    }
  }
}

template <class E>
std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const E& e) {
    return e.what();
  } catch (const std::exception& e) {
    return std::string("wrong exception type: ") + e.what();
  }
  return "";
}

void formats(Check& c, const Cli& cli) {
  ModelConfig cfg;
  const WeightStore w = init_weights(cfg, 9);
  const fs::path wpath = cli.work / "round.rfmw";
  save_weights(w, wpath);
  const auto bytes = serialize_weights(w);
  const WeightStore back = load_weights(wpath);
  c.expect(back == w && serialize_weights(back) == bytes, "weights round trip");

  using K = WeightsFormatError::Kind;
  const auto kind = [](const std::vector<std::uint8_t>& b) -> int {
    try {
      deserialize_weights(b);
    } catch (const WeightsFormatError& e) {
      return static_cast<int>(e.kind());
    }
    return -1;
  };
  auto bad = bytes;
  bad[0] = 'X';
  c.expect(kind(bad) == static_cast<int>(K::kBadMagic), "bad magic");
  bad = bytes;
  bad.resize(bad.size() - 3);
  c.expect(kind(bad) == static_cast<int>(K::kTruncated), "truncated blob");
  bad = bytes;
  bad.insert(bad.end(), {0, 0, 0, 0});
  c.expect(kind(bad) == static_cast<int>(K::kLengthMismatch), "length mismatch");
  const auto assemble = [](const std::string& manifest, std::size_t blob) {
    std::vector<std::uint8_t> out{'R', 'F', 'M', 'W'};
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(manifest.size() >> (8 * i)));
    out.insert(out.end(), manifest.begin(), manifest.end());
    out.resize(out.size() + blob, 0);
    return out;
  };
  c.expect(kind(assemble(R"([{"name":"a","shape":[1,1,1,1],"offset":0},{"name":"a","shape":[1,1,1,1],"offset":4}])", 8)) ==
               static_cast<int>(K::kDuplicateName),
           "duplicate name");
  c.expect(kind(assemble(R"([{"name":"a","shape":"oops","offset":0}])", 4)) == static_cast<int>(K::kMalformedManifest),
           "malformed manifest");

  AnnotationSet dets;
  dets.images.push_back(make_detection_record("img", 320, 240, 640,
                                              {{{10.5f, 20.25f, 100.0f, 90.75f}, ObjectClass::kFace, 0.875f},
                                               {{200.0f, 10.0f, 260.0f, 80.0f}, ObjectClass::kMask, 0.61234f},
                                               {{0.0f, 0.0f, 639.0f, 639.0f}, ObjectClass::kFace, 0.5f}}));
  const fs::path dpath = cli.work / "dets.json";
  save_detections(dets, dpath);
  const std::string text = read_text(dpath);
  c.expect(format_annotations(load_detections(dpath)) == text, "detection JSON round trip");

  const std::string hat = error_of<AnnotationError>([] {
    parse_annotations(R"({"images":[{"id":"p1","width":9,"height":9,"objects":[{"class":"hat","box":[0,0,1,1]}]}]})");
  });
  c.expect(hat.find("p1") != std::string::npos && hat.find("hat") != std::string::npos, "unknown class: " + hat);
  const std::string inv = error_of<AnnotationError>([] {
    parse_annotations(R"({"images":[{"id":"p2","width":9,"height":9,"objects":[{"class":"face","box":[5,0,1,1]}]}]})");
  });
  c.expect(inv.find("p2") != std::string::npos, "inverted box: " + inv);
  const std::string miss = error_of<AnnotationError>([] {
    parse_annotations(R"({"images":[{"id":"p3","height":9,"objects":[]}]})");
  });
  c.expect(miss.find("p3") != std::string::npos, "missing field: " + miss);
  c.expect(!error_of<ImageError>([] { decode_ppm({'P', '3', '\n', '1', ' ', '1', '\n', '2', '5', '5', '\n', 0, 0, 0}); }).empty(),
           "unsupported PPM");
  c.expect(!error_of<ImageError>([] { decode_ppm({'P', '6', '\n', '2', ' ', '2', '\n', '2', '5', '5', '\n', 0, 0, 0}); }).empty(),
           "truncated PPM");

  // A corrupted file reaching the CLI fails cleanly.
  write_text("not a weights file", cli.work / "corrupt.rfmw");
  const auto r = cli.run("detect --weights \"" + (cli.work / "corrupt.rfmw").string() + "\" --input \"" +
                         (cli.work / "scene.ppm").string() + "\" --out \"" + (cli.work / "never.json").string() + "\"");
  c.expect(r.code == 1 && !fs::exists(cli.work / "never.json"), "corrupt weights via CLI exit " + std::to_string(r.code));
}

// Not a numbered criterion; checks the CLI examples and exit codes.
void cli_behaviour(Check& c, const Cli& cli) {
  auto r = cli.run("anchors --size 640");
  c.expect(r.code == 0 && r.out.find("16800") != std::string::npos, "anchors --size 640");
  const fs::path gt = cli.work / "gt.json", pred = cli.work / "pred.json";
  write_text(R"({"images": [{"id": "a", "width": 100, "height": 100, "objects": [
    {"class": "face", "box": [0, 0, 20, 20]}, {"class": "face", "box": [50, 50, 80, 80]}]}]})",
             gt);
  write_text(R"({"images": [{"id": "a", "width": 100, "height": 100, "objects": [
    {"class": "face", "box": [0, 0, 20, 20], "confidence": 0.9},
    {"class": "face", "box": [50, 50, 80, 80], "confidence": 0.8},
    {"class": "face", "box": [90, 0, 99, 9], "confidence": 0.7}]}]})",
             pred);
  r = cli.run("eval --pred \"" + pred.string() + "\" --gt \"" + gt.string() + "\"");
  c.expect(r.code == 0 && r.out.find("face precision=0.666667 recall=1.000000") != std::string::npos, "eval output: " + r.out);
  const fs::path missing = cli.work / "no_such_image.ppm";
  r = cli.run("detect --weights \"" + (cli.work / "seed7.rfmw").string() + "\" --input \"" + missing.string() +
              "\" --out \"" + (cli.work / "x.json").string() + "\"");
  c.expect(r.code == 1 && r.err.find(missing.string()) != std::string::npos, "missing input: exit " + std::to_string(r.code));
  r = cli.run("anchors --size");
  c.expect(r.code == 2, "argument error exit " + std::to_string(r.code));
  r = cli.run("selftest");
  c.expect(r.code == 0, "selftest exit " + std::to_string(r.code));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: acceptance <maskdet-cli> <work-dir>\n";
    return 2;
  }
  const Cli cli{argv[1], argv[2]};
  fs::create_directories(cli.work);

  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"kernel oracle suite", kernel_oracle},
      {"geometry suite", geometry},
      {"nms oracle equivalence", nms_oracle},
      {"orcc fixtures and fixed-point oracle", orcc_check},
      {"loss fixture and derivatives", loss_check},
      {"attention and architecture invariants", attention_check},
      {"end-to-end determinism", [&](Check& c) { end_to_end(c, cli); }},
      {"evaluator", evaluator},
      {"formats", [&](Check& c) { formats(c, cli); }},
      {"cli behaviour", [&](Check& c) { cli_behaviour(c, cli); }},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    char timing[32];
    std::snprintf(timing, sizeof timing, "(%.2f s)", seconds_since(t0));
    if (c.failed()) {
      ++failures;
      std::cout << "FAIL " << name << " " << timing << ": " << c.summary() << "\n";
    } else {
      std::cout << "PASS " << name << " " << timing << "\n";
    }
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
  return failures == 0 ? 0 : 1;
}
