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

#include <stdexcept>
#include <string>

namespace maskdet {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor extents or matrix dimensions disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid ModelConfig or operation parameter.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A weight required by the architecture is absent from the store.
class MissingWeightError : public Error {
 public:
  explicit MissingWeightError(const std::string& name)
      : Error("missing weight '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Failures while decoding or validating an RFMW weights container.
class WeightsFormatError : public Error {
 public:
  enum class Kind { kBadMagic, kTruncated, kDuplicateName, kMalformedManifest, kLengthMismatch, kIo };

  WeightsFormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Unsupported or truncated image file.
class ImageError : public Error {
 public:
  using Error::Error;
};

/// Malformed annotation or detection JSON.
class AnnotationError : public Error {
 public:
  using Error::Error;
};

}  // namespace maskdet
