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
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "maskdet/errors.hpp"
#include "maskdet/tensor.hpp"

namespace maskdet {

/// 8-bit interleaved RGB pixels.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3
};

/// Per-channel means subtracted during preprocessing, in B, G, R order.
struct ChannelMeans {
  float b = 104.0f;
  float g = 117.0f;
  float r = 123.0f;
};

inline RgbImage decode_ppm(const std::vector<std::uint8_t>& bytes, const std::string& origin = "<memory>") {
  std::size_t pos = 0;
  const auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  const auto read_int = [&](const char* what) {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
      throw ImageError(origin + ": malformed PPM header (" + what + ")");
    }
    long long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > (1 << 24)) throw ImageError(origin + ": PPM " + what + " too large");
    }
    return static_cast<int>(v);
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw ImageError(origin + ": unsupported image format (expected binary PPM 'P6')");
  }
  pos = 2;
  RgbImage img;
  img.width = read_int("width");
  img.height = read_int("height");
  const int maxval = read_int("maxval");
  if (img.width < 1 || img.height < 1) throw ImageError(origin + ": PPM has empty extent");
  if (maxval < 1 || maxval > 255) throw ImageError(origin + ": unsupported PPM maxval " + std::to_string(maxval) + " (8-bit only)");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw ImageError(origin + ": malformed PPM header");
  ++pos;
  const std::size_t need = static_cast<std::size_t>(img.width) * img.height * 3;
  if (bytes.size() - pos < need) {
    throw ImageError(origin + ": truncated pixel data (" + std::to_string(bytes.size() - pos) + " of " +
                     std::to_string(need) + " bytes)");
  }
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return img;
}

inline RgbImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageError("cannot open image '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_ppm(bytes, path.string());
}

inline void write_ppm(const RgbImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageError("cannot open '" + path.string() + "' for writing");
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

/// Nearest-neighbour resize to size x size, BGR planes, mean subtracted.
inline Tensor preprocess(const RgbImage& img, int size, ChannelMeans means = {}) {
  if (size < 1) throw ConfigError("preprocess: target size must be positive");
  Tensor out(Shape{1, 3, size, size});
  const std::array<float, 3> mean_bgr{means.b, means.g, means.r};
  for (int y = 0; y < size; ++y) {
    const int sy = static_cast<int>(static_cast<long long>(y) * img.height / size);
    for (int x = 0; x < size; ++x) {
      const int sx = static_cast<int>(static_cast<long long>(x) * img.width / size);
      const std::uint8_t* px = img.pixels.data() + (static_cast<std::size_t>(sy) * img.width + sx) * 3;
      for (int ch = 0; ch < 3; ++ch) out.at(0, ch, y, x) = static_cast<float>(px[2 - ch]) - mean_bgr[ch];
    }
  }
  return out;
}

inline Tensor load_image(const std::filesystem::path& path, int size, ChannelMeans means = {}) {
  return preprocess(read_ppm(path), size, means);
}

}  // namespace maskdet
