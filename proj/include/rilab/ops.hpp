// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "rilab/tensor.hpp"

namespace rilab {

// Convolution parameters. Weights are laid out (kh, kw, in_channels / groups,
// out_channels); output channel `oc` belongs to group oc / (out_channels / groups)
// and reads input channels [g * in/groups, (g + 1) * in/groups).
struct ConvWeights {
  int kernel_h = 1;
  int kernel_w = 1;
  int in_channels = 1;
  int out_channels = 1;
  int groups = 1;
  std::vector<float> weights;
  std::vector<float> bias;

  int in_per_group() const noexcept { return in_channels / groups; }
  int out_per_group() const noexcept { return out_channels / groups; }
  std::size_t weight_count() const noexcept {
    return static_cast<std::size_t>(kernel_h) * kernel_w * in_per_group() * out_channels;
  }
  std::size_t weight_index(int ky, int kx, int ic_in_group, int oc) const noexcept {
    return ((static_cast<std::size_t>(ky) * kernel_w + kx) * in_per_group() + ic_in_group) *
               out_channels + oc;
  }

  // Throws StructuralError on even kernels, bad group split or wrong buffer lengths.
  void validate() const;

  friend bool operator==(const ConvWeights&, const ConvWeights&) = default;
};

enum class Padding { Zero, Reflect };

// Maps a possibly out-of-range coordinate into [0, n) by half-sample symmetric
// reflection (... c b a | a b c ... c | c b a ...). Used by every reflect
// boundary in the library.
int reflect_index(int i, int n) noexcept;

// SAME convolution, stride 1. Sums are accumulated in double and narrowed once.
Tensor conv2d(const Tensor& input, const ConvWeights& w, Padding padding = Padding::Zero);

struct ConvGrad {
  std::vector<double> weights;
  std::vector<double> bias;
};

// Backward of conv2d with respect to its input.
Tensor conv2d_grad_input(const Tensor& grad_out, const ConvWeights& w, int in_height, int in_width,
                         Padding padding = Padding::Zero);
// Backward of conv2d with respect to weights and bias; accumulates into `grad`
// (which is resized on first use).
void conv2d_grad_weights(const Tensor& input, const Tensor& grad_out, const ConvWeights& w,
                         ConvGrad& grad, Padding padding = Padding::Zero);

Tensor relu(const Tensor& t);
Tensor clipped_relu(const Tensor& t, float lo = 0.0f, float hi = 255.0f);

// grad * 1[input > 0]
Tensor relu_grad(const Tensor& input, const Tensor& grad);
// grad * 1[lo < input < hi]; the subgradient is taken as zero at and beyond the bounds.
Tensor clipped_relu_grad(const Tensor& input, const Tensor& grad, float lo, float hi);

// DCR pixel shuffle:
//   out(y * b + i, x * b + j, c) = in(y, x, (i * b + j) * C_out + c),  C_out = C_in / b^2.
Tensor depth_to_space(const Tensor& t, int block);
// Exact inverse of depth_to_space (and therefore its backward).
Tensor space_to_depth(const Tensor& t, int block);

Tensor add(const Tensor& a, const Tensor& b);

// Anchor for pixel-shuffle models: channel k of the output holds input channel
// k mod C, for k in [0, C * factor^2). After depth_to_space(., factor) this is
// nearest-neighbour upsampling of the input.
Tensor nearest_upsample_replicate(const Tensor& t, int factor);

}  // namespace rilab
