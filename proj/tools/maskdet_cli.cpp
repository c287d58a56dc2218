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

// Command-line front end: detect, eval, anchors, init-weights, selftest.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "maskdet/maskdet.hpp"
#include "maskdet/selftest.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> collect_inputs(const fs::path& input) {
  if (!fs::exists(input)) throw maskdet::ImageError("input '" + input.string() + "' does not exist");
  if (!fs::is_directory(input)) return {input};
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(input)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

int run_detect(const std::string& weights_path, const std::string& input, const std::string& out, int size,
               const maskdet::Thresholds& thresholds) {
  maskdet::ModelConfig config;
  config.input_size = size;
  const maskdet::Model model = maskdet::build_model(config, maskdet::load_weights(weights_path));
  maskdet::AnnotationSet result;
  for (const fs::path& file : collect_inputs(input)) {
    const maskdet::RgbImage img = maskdet::read_ppm(file);
    const auto dets = maskdet::detect(model, maskdet::preprocess(img, size), thresholds);
    result.images.push_back(
        maskdet::make_detection_record(file.filename().string(), img.width, img.height, size, dets));
  }
  maskdet::save_detections(result, out);
  return 0;
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

int run_eval(const std::string& pred_path, const std::string& gt_path, float iou_thresh) {
  const maskdet::AnnotationSet preds = maskdet::load_detections(pred_path);
  const maskdet::AnnotationSet gts = maskdet::load_annotations(gt_path);
  maskdet::EvalCounts total;
  for (const auto& img : gts.images) {
    const maskdet::ImageRecord* p = preds.find(img.id);
    const std::vector<maskdet::Detection> dets = p ? p->detections() : std::vector<maskdet::Detection>{};
    const auto truths = img.ground_truths();
    total += maskdet::match_for_eval(dets, truths, iou_thresh);
  }
  // Detections on images without annotations are all false positives.
  for (const auto& img : preds.images) {
    if (gts.find(img.id)) continue;
    const auto dets = img.detections();
    total += maskdet::match_for_eval(dets, {}, iou_thresh);
  }
  const auto pr = maskdet::precision_recall(total);
  nlohmann::ordered_json report;
  report["iou_threshold"] = iou_thresh;
  for (int k = 0; k < 2; ++k) {
    const char* name = maskdet::class_name(maskdet::kObjectClasses[k]);
    std::cout << name << " precision=" << fixed6(pr[k].precision) << " recall=" << fixed6(pr[k].recall) << "\n";
    const auto& c = total.per_class[k];
    report[name] = {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"precision", pr[k].precision}, {"recall", pr[k].recall}};
  }
  std::cout << report.dump(2) << "\n";
  return 0;
}

int run_anchors(int size, const std::vector<int>& strides) {
  if (strides.size() != 3) throw maskdet::ConfigError("--strides takes exactly three values");
  maskdet::ModelConfig config;
  config.input_size = size;
  std::copy(strides.begin(), strides.end(), config.strides.begin());
  config.validate();
  const maskdet::AnchorSet set = maskdet::generate_anchors(config);
  std::cout << "anchors " << set.size() << "\n";
  for (std::size_t l = 0; l < set.levels.size(); ++l) {
    const auto& lv = set.levels[l];
    std::cout << "level " << l << " stride " << lv.stride << " grid " << lv.grid_h << "x" << lv.grid_w
              << " per_cell " << lv.anchors_per_cell << " count " << lv.count() << "\n";
  }
  return 0;
}

int run_init_weights(const std::string& out, std::uint64_t seed) {
  maskdet::save_weights(maskdet::init_weights(maskdet::ModelConfig{}, seed), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maskdet: single-shot face / mask detector"};
  app.require_subcommand(1);

  std::string weights, input, out, pred, gt;
  int size = 640;
  maskdet::Thresholds thresholds;
  float eval_iou = 0.5f;
  std::vector<int> strides{8, 16, 32};
  std::uint64_t seed = 0;

  auto* detect = app.add_subcommand("detect", "Run the detector on a PPM image or a directory of them");
  detect->add_option("--weights", weights, "RFMW weights file")->required();
  detect->add_option("--input", input, "PPM image or directory")->required();
  detect->add_option("--out", out, "Output detections JSON")->required();
  detect->add_option("--size", size, "Square network input size")->check(CLI::PositiveNumber);
  detect->add_option("--tc", thresholds.confidence, "Confidence threshold")->check(CLI::Range(0.0, 1.0));
  detect->add_option("--nms", thresholds.nms_iou, "NMS IoU threshold")->check(CLI::Range(0.0, 1.0));
  detect->add_option("--orcc", thresholds.orcc_iou, "Cross-class removal IoU threshold")->check(CLI::Range(0.0, 1.0));

  auto* eval = app.add_subcommand("eval", "Per-class precision and recall");
  eval->add_option("--pred", pred, "Detections JSON")->required();
  eval->add_option("--gt", gt, "Annotations JSON")->required();
  eval->add_option("--iou", eval_iou, "Match IoU threshold")->check(CLI::Range(0.0, 1.0));

  auto* anchors = app.add_subcommand("anchors", "Print the default anchor layout");
  anchors->add_option("--size", size, "Square input size")->required()->check(CLI::PositiveNumber);
  anchors->add_option("--strides", strides, "Three strides, comma separated")->delimiter(',')->expected(3);

  auto* init = app.add_subcommand("init-weights", "Write Kaiming-initialised weights for the reference model");
  init->add_option("--out", out, "Output RFMW file")->required();
  init->add_option("--seed", seed, "RNG seed")->required();

  auto* selftest = app.add_subcommand("selftest", "Run the embedded oracle checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*detect) return run_detect(weights, input, out, size, thresholds);
    if (*eval) return run_eval(pred, gt, eval_iou);
    if (*anchors) return run_anchors(size, strides);
    if (*init) return run_init_weights(out, seed);
    if (*selftest) return maskdet::run_selftest(std::cout) ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
