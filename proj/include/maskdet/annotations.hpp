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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "maskdet/boxes.hpp"
#include "maskdet/config.hpp"
#include "maskdet/errors.hpp"
#include "maskdet/eval.hpp"
#include "maskdet/postproc.hpp"

// Annotation / detection interchange:
//   {"images": [{"id": str, "width": int, "height": int,
//                "objects": [{"class": "face"|"mask",
//                             "box": [x_min, y_min, x_max, y_max],
//                             "confidence": num}]}]}
// "confidence" is present for detections only.

namespace maskdet {

struct ObjectRecord {
  ObjectClass label = ObjectClass::kFace;
  std::array<double, 4> box{};
  std::optional<double> confidence;

  BoundingBox bbox() const {
    return {static_cast<float>(box[0]), static_cast<float>(box[1]), static_cast<float>(box[2]), static_cast<float>(box[3])};
  }
  friend bool operator==(const ObjectRecord&, const ObjectRecord&) = default;
};

struct ImageRecord {
  std::string id;
  int width = 0;
  int height = 0;
  std::vector<ObjectRecord> objects;

  std::vector<GroundTruth> ground_truths() const {
    std::vector<GroundTruth> out;
    for (const auto& o : objects) out.push_back({o.label, o.bbox()});
    return out;
  }
  std::vector<Detection> detections() const {
    std::vector<Detection> out;
    for (const auto& o : objects) out.push_back({o.bbox(), o.label, static_cast<float>(o.confidence.value_or(0.0))});
    return out;
  }
  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

/// Ground-truth annotations or detections, per image.
struct AnnotationSet {
  std::vector<ImageRecord> images;

  const ImageRecord* find(const std::string& id) const {
    for (const auto& img : images) {
      if (img.id == id) return &img;
    }
    return nullptr;
  }
  friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

inline ObjectClass parse_class(const std::string& name, const std::string& image_id) {
  if (name == "face") return ObjectClass::kFace;
  if (name == "mask") return ObjectClass::kMask;
  throw AnnotationError("image '" + image_id + "': unknown class '" + name + "'");
}

/// Parses and validates. Boxes are clipped to the image extent and inverted
/// boxes are rejected. Ground truths must also have positive area. With
/// `require_confidence` (detections) every object must carry a confidence in
/// [0, 1].
inline AnnotationSet parse_annotations(const std::string& text, bool require_confidence = false) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw AnnotationError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("images") || !doc["images"].is_array()) {
    throw AnnotationError("missing field 'images'");
  }
  AnnotationSet set;
  std::size_t index = 0;
  for (const auto& jimg : doc["images"]) {
    const std::string fallback = "#" + std::to_string(index++);
    if (!jimg.is_object()) throw AnnotationError("image '" + fallback + "': not an object");
    const std::string id = jimg.contains("id") && jimg["id"].is_string() ? jimg["id"].get<std::string>() : fallback;
    const auto require = [&](const nlohmann::json& obj, const char* key) -> const nlohmann::json& {
      if (!obj.contains(key)) throw AnnotationError("image '" + id + "': missing field '" + key + "'");
      return obj[key];
    };
    if (!require(jimg, "id").is_string()) throw AnnotationError("image '" + id + "': field 'id' must be a string");
    ImageRecord rec;
    rec.id = id;
    const auto& jw = require(jimg, "width");
    const auto& jh = require(jimg, "height");
    if (!jw.is_number_integer() || !jh.is_number_integer() || jw.get<long long>() < 1 || jh.get<long long>() < 1) {
      throw AnnotationError("image '" + id + "': width and height must be positive integers");
    }
    rec.width = jw.get<int>();
    rec.height = jh.get<int>();
    const auto& jobjs = require(jimg, "objects");
    if (!jobjs.is_array()) throw AnnotationError("image '" + id + "': field 'objects' must be an array");
    for (const auto& jo : jobjs) {
      if (!jo.is_object()) throw AnnotationError("image '" + id + "': object is not a JSON object");
      const auto& jc = require(jo, "class");
      if (!jc.is_string()) throw AnnotationError("image '" + id + "': field 'class' must be a string");
      ObjectRecord o;
      o.label = parse_class(jc.get<std::string>(), id);
      const auto& jb = require(jo, "box");
      if (!jb.is_array() || jb.size() != 4) throw AnnotationError("image '" + id + "': field 'box' must hold 4 numbers");
      for (int k = 0; k < 4; ++k) {
        if (!jb[k].is_number()) throw AnnotationError("image '" + id + "': field 'box' must hold 4 numbers");
        o.box[k] = jb[k].get<double>();
      }
      if (o.box[0] > o.box[2] || o.box[1] > o.box[3]) throw AnnotationError("image '" + id + "': inverted box");
      o.box[0] = std::clamp(o.box[0], 0.0, static_cast<double>(rec.width));
      o.box[2] = std::clamp(o.box[2], 0.0, static_cast<double>(rec.width));
      o.box[1] = std::clamp(o.box[1], 0.0, static_cast<double>(rec.height));
      o.box[3] = std::clamp(o.box[3], 0.0, static_cast<double>(rec.height));
      if (!require_confidence && (!(o.box[2] > o.box[0]) || !(o.box[3] > o.box[1]))) {
        throw AnnotationError("image '" + id + "': degenerate box");
      }
      if (jo.contains("confidence")) {
        if (!jo["confidence"].is_number()) throw AnnotationError("image '" + id + "': field 'confidence' must be a number");
        o.confidence = jo["confidence"].get<double>();
        if (*o.confidence < 0.0 || *o.confidence > 1.0) {
          throw AnnotationError("image '" + id + "': confidence outside [0, 1]");
        }
      } else if (require_confidence) {
        throw AnnotationError("image '" + id + "': missing field 'confidence'");
      }
      rec.objects.push_back(o);
    }
    set.images.push_back(std::move(rec));
  }
  return set;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AnnotationError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline AnnotationSet load_annotations(const std::filesystem::path& path) { return parse_annotations(read_text(path)); }

inline AnnotationSet load_detections(const std::filesystem::path& path) {
  return parse_annotations(read_text(path), /*require_confidence=*/true);
}

/// Canonical text: fixed key order, two-space indentation, one object per
/// line, numbers with six decimals.
inline std::string format_annotations(const AnnotationSet& set) {
  const auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v == 0.0 ? 0.0 : v);  // no "-0.000000"
    return std::string(buf);
  };
  std::string out = "{\n  \"images\": [";
  for (std::size_t i = 0; i < set.images.size(); ++i) {
    const ImageRecord& img = set.images[i];
    out += i == 0 ? "\n" : ",\n";
    out += "    {\n      \"id\": " + nlohmann::json(img.id).dump() + ",\n";
    out += "      \"width\": " + std::to_string(img.width) + ",\n";
    out += "      \"height\": " + std::to_string(img.height) + ",\n";
    out += "      \"objects\": [";
    for (std::size_t k = 0; k < img.objects.size(); ++k) {
      const ObjectRecord& o = img.objects[k];
      out += k == 0 ? "\n" : ",\n";
      out += std::string("        {\"class\": \"") + class_name(o.label) + "\", \"box\": [" + num(o.box[0]) + ", " +
             num(o.box[1]) + ", " + num(o.box[2]) + ", " + num(o.box[3]) + "]";
      if (o.confidence) out += ", \"confidence\": " + num(*o.confidence);
      out += "}";
    }
    out += img.objects.empty() ? "]\n" : "\n      ]\n";
    out += "    }";
  }
  out += set.images.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

inline void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw AnnotationError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw AnnotationError("write failed for '" + path.string() + "'");
}

inline void save_detections(const AnnotationSet& dets, const std::filesystem::path& path) {
  write_text(format_annotations(dets), path);
}

/// Record for one image's detections, with boxes mapped from the square
/// network input frame back to the original width x height.
inline ImageRecord make_detection_record(const std::string& id, int width, int height, int input_size,
                                         const std::vector<Detection>& dets) {
  ImageRecord rec{id, width, height, {}};
  const double sx = static_cast<double>(width) / input_size;
  const double sy = static_cast<double>(height) / input_size;
  for (const Detection& d : dets) {
    rec.objects.push_back(ObjectRecord{d.label,
                                       {d.box.x_min * sx, d.box.y_min * sy, d.box.x_max * sx, d.box.y_max * sy},
                                       static_cast<double>(d.confidence)});
  }
  return rec;
}

}  // namespace maskdet
