// Copyright 2026 The E-Motion Authors
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

#ifndef EMOTION_CORE_ERROR_HPP_
#define EMOTION_CORE_ERROR_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace emotion {

// Every failure raised by the library derives from Error and carries a
// machine-readable class name. The CLI prints the class and maps it to an
// exit code.
class Error : public std::runtime_error {
 public:
  Error(std::string_view kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  std::string_view kind() const noexcept { return kind_; }

 private:
  std::string_view kind_;
};

// Invalid argument values (thresholds, bounds, counts).
struct ParameterError : Error {
  explicit ParameterError(const std::string& w) : Error("parameter", w) {}
};

// A time or index outside its admissible interval.
struct RangeError : Error {
  explicit RangeError(const std::string& w) : Error("range", w) {}
};

// Shape mismatches and malformed in-memory data.
struct DataError : Error {
  explicit DataError(const std::string& w) : Error("data", w) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& w) : Error("numerical", w) {}
};

// Operation invoked in the wrong object state (e.g. backward before forward).
struct StateError : Error {
  explicit StateError(const std::string& w) : Error("state", w) {}
};

// Trajectory recorded under a reference policy that is no longer current.
struct StalenessError : Error {
  explicit StalenessError(const std::string& w) : Error("staleness", w) {}
};

struct TimeoutError : Error {
  explicit TimeoutError(const std::string& w) : Error("timeout", w) {}
};

// Malformed file contents; names the byte offset where decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& w, std::uint64_t offset)
      : Error("format", w + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

// Configuration value rejected; names the offending field.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& field, const std::string& w)
      : Error("validation", field + ": " + w), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace emotion

#endif  // EMOTION_CORE_ERROR_HPP_
