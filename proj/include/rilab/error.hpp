// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rilab {

// Shape/argument contract violated by the caller (channel mismatch, even kernel, ...).
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed file content. `offset` is a byte offset or a layer index depending on
// the producer; -1 when not applicable.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long long offset = -1)
      : std::runtime_error(what), offset_(offset) {}
  long long offset() const noexcept { return offset_; }

 private:
  long long offset_;
};

// Calibration does not cover the model (missing layer, empty representative set).
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An operation was given an input it is defined to reject (e.g. a clipped model
// handed to the outlier analysis).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Non-finite value during training.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, std::ptrdiff_t layer)
      : std::runtime_error(what), layer_(layer) {}
  std::ptrdiff_t layer() const noexcept { return layer_; }

 private:
  std::ptrdiff_t layer_;
};

}  // namespace rilab
