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

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "maskdet/errors.hpp"
#include "maskdet/tensor.hpp"

// RFMW weights container:
//   bytes 0..3   magic "RFMW"
//   bytes 4..7   manifest length L, little-endian uint32
//   next L bytes UTF-8 JSON array of {"name", "shape": [n, c, h, w], "offset"}
//   remainder    raw little-endian float32 blobs; "offset" is relative to
//                the start of this region and blobs are packed in manifest order

namespace maskdet {

static_assert(std::endian::native == std::endian::little, "RFMW I/O assumes a little-endian host");

/// Named tensors, ordered by name.
class WeightStore {
 public:
  using Map = std::map<std::string, Tensor>;

  /// Throws on duplicates.
  void insert(const std::string& name, Tensor t) {
    if (!tensors_.emplace(name, std::move(t)).second) {
      throw WeightsFormatError(WeightsFormatError::Kind::kDuplicateName, "duplicate weight name '" + name + "'");
    }
  }
  void insert_or_assign(const std::string& name, Tensor t) { tensors_.insert_or_assign(name, std::move(t)); }
  bool erase(const std::string& name) { return tensors_.erase(name) > 0; }

  bool contains(const std::string& name) const { return tensors_.contains(name); }
  const Tensor& at(const std::string& name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw MissingWeightError(name);
    return it->second;
  }
  Tensor& mutable_at(const std::string& name) {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw MissingWeightError(name);
    return it->second;
  }

  std::size_t size() const noexcept { return tensors_.size(); }
  Map::const_iterator begin() const noexcept { return tensors_.begin(); }
  Map::const_iterator end() const noexcept { return tensors_.end(); }

  friend bool operator==(const WeightStore&, const WeightStore&) = default;

 private:
  Map tensors_;
};

inline std::vector<std::uint8_t> serialize_weights(const WeightStore& store) {
  nlohmann::ordered_json manifest = nlohmann::ordered_json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : store) {
    const Shape& s = t.shape();
    manifest.push_back({{"name", name}, {"shape", {s.n, s.c, s.h, s.w}}, {"offset", offset}});
    offset += t.size() * sizeof(float);
  }
  const std::string text = manifest.dump();
  std::vector<std::uint8_t> bytes;
  bytes.reserve(8 + text.size() + offset);
  bytes.insert(bytes.end(), {'R', 'F', 'M', 'W'});
  const auto len = static_cast<std::uint32_t>(text.size());
  for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>((len >> (8 * i)) & 0xffu));
  bytes.insert(bytes.end(), text.begin(), text.end());
  for (const auto& [name, t] : store) {
    const auto d = t.data();
    const auto* raw = reinterpret_cast<const std::uint8_t*>(d.data());
    bytes.insert(bytes.end(), raw, raw + d.size_bytes());
  }
  return bytes;
}

inline WeightStore deserialize_weights(const std::vector<std::uint8_t>& bytes) {
  using Kind = WeightsFormatError::Kind;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "RFMW", 4) != 0) {
    throw WeightsFormatError(Kind::kBadMagic, "bad magic: expected \"RFMW\"");
  }
  if (bytes.size() < 8) throw WeightsFormatError(Kind::kTruncated, "truncated header");
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(bytes[4 + i]) << (8 * i);
  if (bytes.size() - 8 < len) throw WeightsFormatError(Kind::kTruncated, "truncated manifest");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + len);
  } catch (const nlohmann::json::exception& e) {
    throw WeightsFormatError(Kind::kMalformedManifest, std::string("malformed manifest: ") + e.what());
  }
  if (!manifest.is_array()) throw WeightsFormatError(Kind::kMalformedManifest, "malformed manifest: not an array");

  const std::size_t blob_begin = 8 + static_cast<std::size_t>(len);
  const std::size_t blob_size = bytes.size() - blob_begin;
  WeightStore store;
  std::uint64_t expected_offset = 0;
  for (const auto& entry : manifest) {
    if (!entry.is_object() || !entry.contains("name") || !entry["name"].is_string() || !entry.contains("shape") ||
        !entry["shape"].is_array() || entry["shape"].size() != 4 || !entry.contains("offset") ||
        !entry["offset"].is_number_unsigned()) {
      throw WeightsFormatError(Kind::kMalformedManifest, "malformed manifest entry: " + entry.dump());
    }
    const std::string name = entry["name"].get<std::string>();
    Shape shape;
    int dims[4];
    for (int i = 0; i < 4; ++i) {
      const auto& d = entry["shape"][i];
      if (!d.is_number_unsigned() || d.get<std::uint64_t>() > 1u << 30) {
        throw WeightsFormatError(Kind::kMalformedManifest, "malformed shape for '" + name + "'");
      }
      dims[i] = d.get<int>();
    }
    shape = Shape{dims[0], dims[1], dims[2], dims[3]};
    const std::uint64_t offset = entry["offset"].get<std::uint64_t>();
    if (offset != expected_offset) {
      throw WeightsFormatError(Kind::kLengthMismatch, "blob for '" + name + "' starts at " + std::to_string(offset) +
                                                          ", expected " + std::to_string(expected_offset));
    }
    const std::uint64_t nbytes = shape.numel() * sizeof(float);
    if (offset + nbytes > blob_size) {
      throw WeightsFormatError(Kind::kTruncated, "truncated blob for '" + name + "'");
    }
    std::vector<float> data(shape.numel());
    if (nbytes > 0) std::memcpy(data.data(), bytes.data() + blob_begin + offset, nbytes);
    if (store.contains(name)) {
      throw WeightsFormatError(Kind::kDuplicateName, "duplicate weight name '" + name + "'");
    }
    store.insert(name, Tensor(shape, std::move(data)));
    expected_offset = offset + nbytes;
  }
  if (expected_offset != blob_size) {
    throw WeightsFormatError(Kind::kLengthMismatch, "blob region holds " + std::to_string(blob_size) +
                                                        " bytes but manifest shapes account for " +
                                                        std::to_string(expected_offset));
  }
  return store;
}

inline void save_weights(const WeightStore& store, const std::filesystem::path& path) {
  const auto bytes = serialize_weights(store);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WeightsFormatError(WeightsFormatError::Kind::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw WeightsFormatError(WeightsFormatError::Kind::kIo, "write failed for '" + path.string() + "'");
}

inline WeightStore load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WeightsFormatError(WeightsFormatError::Kind::kIo, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_weights(bytes);
}

}  // namespace maskdet
