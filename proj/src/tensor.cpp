// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#include "rilab/tensor.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "rilab/error.hpp"

namespace rilab {

namespace {

std::size_t checked_volume(int h, int w, int c) {
  if (h <= 0 || w <= 0 || c <= 0) {
    throw StructuralError("tensor dimensions must be positive, got " + std::to_string(h) + "x" +
                          std::to_string(w) + "x" + std::to_string(c));
  }
  return static_cast<std::size_t>(h) * w * c;
}

}  // namespace

Tensor::Tensor(int height, int width, int channels, float fill)
    : height_(height), width_(width), channels_(channels),
      data_(checked_volume(height, width, channels), fill) {}

Tensor::Tensor(int height, int width, int channels, std::vector<float> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (data_.size() != checked_volume(height, width, channels)) {
    throw StructuralError("tensor data length " + std::to_string(data_.size()) +
                          " does not match shape volume");
  }
}

float Tensor::min_value() const {
  if (data_.empty()) throw StructuralError("min_value of empty tensor");
  return *std::min_element(data_.begin(), data_.end());
}

float Tensor::max_value() const {
  if (data_.empty()) throw StructuralError("max_value of empty tensor");
  return *std::max_element(data_.begin(), data_.end());
}

}  // namespace rilab
