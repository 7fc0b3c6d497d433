// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

// Hand-built models and images with known behaviour.
#pragma once

#include <cmath>
#include <string>

#include "rilab/model.hpp"
#include "rilab/tensor.hpp"

namespace rilab::fixture {

// x1 model made of a single 1x1 identity conv.
inline ModelGraph identity_model() {
  ConvWeights w;
  w.in_channels = w.out_channels = 3;
  w.weights.assign(9, 0.0f);
  w.bias.assign(3, 0.0f);
  for (int c = 0; c < 3; ++c) w.weights[static_cast<std::size_t>(c) * 3 + c] = 1.0f;
  ModelGraph m;
  m.name = "identity";
  m.scale = 1;
  m.layers.push_back(LayerSpec::make_conv(w));
  m.validate();
  return m;
}

// x3 model: every sub-pixel is the unsharp-masked input, x + k * (8x - sum of 8 neighbours).
// Flat and linear regions pass through; hard edges overshoot by up to 8k times the step.
inline ModelGraph sharpening_model(float k, bool clipped = false) {
  ConvWeights w;
  w.kernel_h = w.kernel_w = 3;
  w.in_channels = 3;
  w.out_channels = 27;
  w.weights.assign(w.weight_count(), 0.0f);
  w.bias.assign(27, 0.0f);
  for (int oc = 0; oc < 27; ++oc) {
    const int c = oc % 3;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        w.weights[w.weight_index(ky, kx, c, oc)] = (ky == 1 && kx == 1) ? 1.0f + 8.0f * k : -k;
      }
    }
  }
  ModelGraph m;
  m.name = "sharpen";
  m.scale = 3;
  m.clipped = clipped;
  m.layers.push_back(LayerSpec::make_conv(w));
  m.layers.push_back(LayerSpec::make_depth_to_space(3));
  if (clipped) m.layers.push_back(LayerSpec::make_clipped_relu());
  m.validate();
  return m;
}

// Smooth radial bump in [0, peak] that is exactly 0 on a border ring of `ring` pixels,
// so zero padding adds no edge.
inline Tensor bump(int h, int w, double peak, double cy = 0.5, double cx = 0.5, int ring = 2) {
  Tensor t(h, w, 3, 0.0f);
  for (int y = ring; y < h - ring; ++y) {
    for (int x = ring; x < w - ring; ++x) {
      const double dy = (y + 0.5) / h - cy, dx = (x + 0.5) / w - cx;
      const double v = peak * std::exp(-(dy * dy + dx * dx) / 0.08);
      const double fade = std::min({1.0, (y - ring + 1) / 6.0, (x - ring + 1) / 6.0,
                                    (h - ring - y) / 6.0, (w - ring - x) / 6.0});
      for (int c = 0; c < 3; ++c) t.at(y, x, c) = static_cast<float>(std::round(v * fade));
    }
  }
  return t;
}

// `t` with a black/white checker of `cell`-pixel squares pasted into [y0, y0+size) x [x0, x0+size).
inline Tensor with_checker(Tensor t, int y0, int x0, int size, int cell) {
  for (int y = y0; y < y0 + size; ++y) {
    for (int x = x0; x < x0 + size; ++x) {
      const float v = ((y - y0) / cell + (x - x0) / cell) % 2 ? 255.0f : 0.0f;
      for (int c = 0; c < 3; ++c) t.at(y, x, c) = v;
    }
  }
  return t;
}

inline Tensor ramp(int h, int w) {
  Tensor t(h, w, 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) t.at(y, x, c) = static_cast<float>(255.0 * x / (w - 1));
    }
  }
  return t;
}

}  // namespace rilab::fixture
