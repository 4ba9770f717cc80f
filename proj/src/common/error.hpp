// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace armview {

enum class ErrorCode {
  kInvalidArgument = 1,
  kShapeMismatch,
  kNotFound,
  kNumeric,
  kIo,
  kSingular,
  kState,
};

/// Base for every error raised by the core library. The C API maps `code()`
/// onto its integer status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline Error invalid_argument(const std::string& what) {
  return Error(ErrorCode::kInvalidArgument, what);
}
inline Error shape_error(const std::string& what) {
  return Error(ErrorCode::kShapeMismatch, what);
}
inline Error numeric_error(const std::string& what) {
  return Error(ErrorCode::kNumeric, what);
}
inline Error io_error(const std::string& what) {
  return Error(ErrorCode::kIo, what);
}
inline Error not_found(const std::string& what) {
  return Error(ErrorCode::kNotFound, what);
}
inline Error state_error(const std::string& what) {
  return Error(ErrorCode::kState, what);
}

}  // namespace armview
