// msam/error.hpp

// Copyright 2026  The msam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef MSAM_ERROR_HPP_
#define MSAM_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace msam {

/// Base class of every error raised by the library. `kind()` is a short
/// stable tag that the CLI maps onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string &what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string &kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// Signal/kernel/stride combination that admits no valid window.
struct GeometryError : Error {
  explicit GeometryError(const std::string &w) : Error("invalid-geometry", w) {}
};

struct IndexError : Error {
  explicit IndexError(const std::string &w) : Error("index", w) {}
};

/// Gradient or parameter tensors whose shapes do not line up.
struct ShapeError : Error {
  explicit ShapeError(const std::string &w) : Error("shape", w) {}
};

/// Unsupported or corrupt file content (WAV header, checkpoint, manifest).
struct FormatError : Error {
  explicit FormatError(const std::string &w) : Error("format", w) {}
};

struct IoError : Error {
  explicit IoError(const std::string &w) : Error("io", w) {}
};

/// Bad user-supplied configuration; the message names the offending field.
struct ValidationError : Error {
  explicit ValidationError(const std::string &w) : Error("validation", w) {}
};

/// Statistics that cannot be normalised (zero variance and similar).
struct DegenerateInputError : Error {
  explicit DegenerateInputError(const std::string &w)
      : Error("degenerate-input", w) {}
};

/// Non-finite loss or parameters during training.
struct NumericalError : Error {
  explicit NumericalError(const std::string &w) : Error("numerical", w) {}
};

}  // namespace msam

#endif  // MSAM_ERROR_HPP_
