// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace vafx {

enum class ErrorKind {
  kDimension,
  kNumeric,
  kInput,
  kFormat,
  kState,
  kStability,
  kCompatibility,
  kUsage,
};

const char* to_string(ErrorKind kind);

// Base for every error raised by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& w) : Error(ErrorKind::kDimension, w) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& w) : Error(ErrorKind::kNumeric, w) {}
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& w) : Error(ErrorKind::kInput, w) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& w) : Error(ErrorKind::kFormat, w) {}
};

class StateError : public Error {
 public:
  explicit StateError(const std::string& w) : Error(ErrorKind::kState, w) {}
};

class StabilityError : public Error {
 public:
  explicit StabilityError(const std::string& w) : Error(ErrorKind::kStability, w) {}
};

class CompatibilityError : public Error {
 public:
  explicit CompatibilityError(const std::string& w)
      : Error(ErrorKind::kCompatibility, w) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& w) : Error(ErrorKind::kUsage, w) {}
};

}  // namespace vafx
