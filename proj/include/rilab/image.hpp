// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rilab/tensor.hpp"

namespace rilab {

// Netpbm I/O. P6 (RGB) and P5 (grayscale) with maxval 255 are supported; P5
// loads as three identical channels. Saving writes P6 for 3-channel tensors and
// P5 for 1-channel tensors, rounding to nearest and clamping to [0, 255].
Tensor decode_pnm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pnm(const Tensor& t);
Tensor load_image(const std::filesystem::path& path);
void save_image(const Tensor& t, const std::filesystem::path& path);

// BT.601 luma, full range: 0.299 R + 0.587 G + 0.114 B.
inline double luma(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }
// h x w x 1 luma plane of an RGB tensor (or a copy of a 1-channel tensor).
Tensor luma_plane(const Tensor& rgb);

// Round half away from zero and clamp to [0, 255]; what an 8-bit sink stores.
Tensor round_clamp_u8(const Tensor& t);

// Crops bottom/right so both spatial sizes are multiples of `multiple`.
Tensor modcrop(const Tensor& t, int multiple);
Tensor crop(const Tensor& t, int y0, int x0, int h, int w);
Tensor flip_horizontal(const Tensor& t);

struct Rational {
  int num = 1;
  int den = 1;
};

// Separable bicubic resampling with the Keys kernel (a = -0.5).
//
//   out size   = ceil(in * num / den) per axis
//   centre     u(o) = (o + 0.5) * in / out - 0.5
//   upscaling  w_j = k(u - j),          j = floor(u) - 1 .. floor(u) + 2
//   downscale  w_j = k((u - j) * s),    |u - j| < 2 / s, s = out / in   (antialiased)
//   weights are normalised to sum 1; out-of-range j uses reflect_index().
// Sums are formed in double, horizontally first.
Tensor bicubic_resize(const Tensor& t, Rational factor);

// Keys cubic convolution kernel, a = -0.5.
double cubic_kernel(double x);

}  // namespace rilab
