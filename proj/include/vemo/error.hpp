// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vemo {

/// Bad argument or violated precondition supplied by the caller (ranges,
/// lengths, shapes, configuration values).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Telemetry that fails ingestion checks. Carries the 1-based data row when
/// the failure can be pinned to one.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what, std::size_t row = 0)
      : std::runtime_error(row == 0 ? what : what + " (row " + std::to_string(row) + ")"),
        row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Binary artifact that cannot be decoded: wrong magic, truncated payload,
/// inconsistent shapes.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two artifacts that must agree (checkpoint vs dataset, config vs
/// checkpoint) do not.
class MismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values during optimization.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vemo
