// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#include "rilab/ops.hpp"

#include <algorithm>
#include <string>

#include "rilab/error.hpp"

namespace rilab {

void ConvWeights::validate() const {
  if (kernel_h <= 0 || kernel_w <= 0 || kernel_h % 2 == 0 || kernel_w % 2 == 0) {
    throw StructuralError("conv kernel must have odd positive dimensions, got " +
                          std::to_string(kernel_h) + "x" + std::to_string(kernel_w));
  }
  if (in_channels <= 0 || out_channels <= 0 || groups <= 0 || in_channels % groups != 0 ||
      out_channels % groups != 0) {
    throw StructuralError("conv channels " + std::to_string(in_channels) + "->" +
                          std::to_string(out_channels) + " not divisible into " +
                          std::to_string(groups) + " groups");
  }
  if (weights.size() != weight_count()) {
    throw StructuralError("conv weights length " + std::to_string(weights.size()) + ", expected " +
                          std::to_string(weight_count()));
  }
  if (bias.size() != static_cast<std::size_t>(out_channels)) {
    throw StructuralError("conv bias length " + std::to_string(bias.size()) + ", expected " +
                          std::to_string(out_channels));
  }
}

int reflect_index(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

namespace {

// Source coordinate for output position `o` and kernel tap `k`, or -1 when the
// tap falls into zero padding.
inline int source_coord(int o, int k, int half, int n, Padding padding) noexcept {
  const int s = o + k - half;
  if (s >= 0 && s < n) return s;
  if (padding == Padding::Zero) return -1;
  return reflect_index(s, n);
}

void check_conv_input(const Tensor& input, const ConvWeights& w) {
  w.validate();
  if (input.channels() != w.in_channels) {
    throw StructuralError("conv2d input has " + std::to_string(input.channels()) +
                          " channels, weights expect " + std::to_string(w.in_channels));
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const ConvWeights& w, Padding padding) {
  check_conv_input(input, w);
  const int h = input.height();
  const int wd = input.width();
  const int oc_total = w.out_channels;
  const int ipg = w.in_per_group();
  const int opg = w.out_per_group();
  const int hy = w.kernel_h / 2;
  const int hx = w.kernel_w / 2;

  Tensor out(h, wd, oc_total);
  std::vector<double> acc(oc_total);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < wd; ++x) {
      for (int oc = 0; oc < oc_total; ++oc) acc[oc] = w.bias[oc];
      for (int ky = 0; ky < w.kernel_h; ++ky) {
        const int sy = source_coord(y, ky, hy, h, padding);
        if (sy < 0) continue;
        for (int kx = 0; kx < w.kernel_w; ++kx) {
          const int sx = source_coord(x, kx, hx, wd, padding);
          if (sx < 0) continue;
          const float* src = input.pixel(sy, sx);
          const float* tap = w.weights.data() + w.weight_index(ky, kx, 0, 0);
          for (int g = 0; g < w.groups; ++g) {
            double* a = acc.data() + g * opg;
            for (int icl = 0; icl < ipg; ++icl) {
              const double v = src[g * ipg + icl];
              const float* row = tap + static_cast<std::size_t>(icl) * oc_total + g * opg;
              for (int o = 0; o < opg; ++o) a[o] += v * row[o];
            }
          }
        }
      }
      float* dst = out.pixel(y, x);
      for (int oc = 0; oc < oc_total; ++oc) dst[oc] = static_cast<float>(acc[oc]);
    }
  }
  return out;
}

Tensor conv2d_grad_input(const Tensor& grad_out, const ConvWeights& w, int in_height,
                         int in_width, Padding padding) {
  w.validate();
  if (grad_out.channels() != w.out_channels || grad_out.height() != in_height ||
      grad_out.width() != in_width) {
    throw StructuralError("conv2d_grad_input: gradient shape does not match the convolution");
  }
  const int oc_total = w.out_channels;
  const int ipg = w.in_per_group();
  const int opg = w.out_per_group();
  const int hy = w.kernel_h / 2;
  const int hx = w.kernel_w / 2;
  const int ic_total = w.in_channels;

  std::vector<double> acc(static_cast<std::size_t>(in_height) * in_width * ic_total, 0.0);
  for (int y = 0; y < in_height; ++y) {
    for (int x = 0; x < in_width; ++x) {
      const float* go = grad_out.pixel(y, x);
      for (int ky = 0; ky < w.kernel_h; ++ky) {
        const int sy = source_coord(y, ky, hy, in_height, padding);
        if (sy < 0) continue;
        for (int kx = 0; kx < w.kernel_w; ++kx) {
          const int sx = source_coord(x, kx, hx, in_width, padding);
          if (sx < 0) continue;
          double* dst = acc.data() + (static_cast<std::size_t>(sy) * in_width + sx) * ic_total;
          const float* tap = w.weights.data() + w.weight_index(ky, kx, 0, 0);
          for (int g = 0; g < w.groups; ++g) {
            const float* gog = go + g * opg;
            for (int icl = 0; icl < ipg; ++icl) {
              const float* row = tap + static_cast<std::size_t>(icl) * oc_total + g * opg;
              double s = 0.0;
              for (int o = 0; o < opg; ++o) s += static_cast<double>(gog[o]) * row[o];
              dst[g * ipg + icl] += s;
            }
          }
        }
      }
    }
  }
  Tensor grad_in(in_height, in_width, ic_total);
  auto out = grad_in.values();
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<float>(acc[i]);
  return grad_in;
}

void conv2d_grad_weights(const Tensor& input, const Tensor& grad_out, const ConvWeights& w,
                         ConvGrad& grad, Padding padding) {
  check_conv_input(input, w);
  if (grad_out.channels() != w.out_channels || !(grad_out.height() == input.height()) ||
      grad_out.width() != input.width()) {
    throw StructuralError("conv2d_grad_weights: gradient shape does not match the convolution");
  }
  if (grad.weights.size() != w.weight_count()) grad.weights.assign(w.weight_count(), 0.0);
  if (grad.bias.size() != static_cast<std::size_t>(w.out_channels)) {
    grad.bias.assign(w.out_channels, 0.0);
  }
  const int h = input.height();
  const int wd = input.width();
  const int oc_total = w.out_channels;
  const int ipg = w.in_per_group();
  const int opg = w.out_per_group();
  const int hy = w.kernel_h / 2;
  const int hx = w.kernel_w / 2;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < wd; ++x) {
      const float* go = grad_out.pixel(y, x);
      for (int oc = 0; oc < oc_total; ++oc) grad.bias[oc] += go[oc];
      for (int ky = 0; ky < w.kernel_h; ++ky) {
        const int sy = source_coord(y, ky, hy, h, padding);
        if (sy < 0) continue;
        for (int kx = 0; kx < w.kernel_w; ++kx) {
          const int sx = source_coord(x, kx, hx, wd, padding);
          if (sx < 0) continue;
          const float* src = input.pixel(sy, sx);
          double* tap = grad.weights.data() + w.weight_index(ky, kx, 0, 0);
          for (int g = 0; g < w.groups; ++g) {
            const float* gog = go + g * opg;
            for (int icl = 0; icl < ipg; ++icl) {
              const double v = src[g * ipg + icl];
              double* row = tap + static_cast<std::size_t>(icl) * oc_total + g * opg;
              for (int o = 0; o < opg; ++o) row[o] += v * gog[o];
            }
          }
        }
      }
    }
  }
}

Tensor relu(const Tensor& t) {
  Tensor out = t;
  for (float& v : out.values()) v = std::max(v, 0.0f);
  return out;
}

Tensor clipped_relu(const Tensor& t, float lo, float hi) {
  if (!(lo < hi)) {
    throw StructuralError("clipped_relu requires lo < hi, got [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
  }
  Tensor out = t;
  for (float& v : out.values()) v = std::clamp(v, lo, hi);
  return out;
}

Tensor relu_grad(const Tensor& input, const Tensor& grad) {
  if (!input.same_shape(grad)) throw StructuralError("relu_grad: shape mismatch");
  Tensor out = grad;
  auto in = input.values();
  auto g = out.values();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(in[i] > 0.0f)) g[i] = 0.0f;
  }
  return out;
}

Tensor clipped_relu_grad(const Tensor& input, const Tensor& grad, float lo, float hi) {
  if (!input.same_shape(grad)) throw StructuralError("clipped_relu_grad: shape mismatch");
  Tensor out = grad;
  auto in = input.values();
  auto g = out.values();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(in[i] > lo && in[i] < hi)) g[i] = 0.0f;
  }
  return out;
}

Tensor depth_to_space(const Tensor& t, int block) {
  if (block <= 0) throw StructuralError("depth_to_space block must be positive");
  const int bb = block * block;
  if (t.channels() % bb != 0) {
    throw StructuralError("depth_to_space: " + std::to_string(t.channels()) +
                          " channels not divisible by block^2 = " + std::to_string(bb));
  }
  const int c_out = t.channels() / bb;
  Tensor out(t.height() * block, t.width() * block, c_out);
  for (int y = 0; y < t.height(); ++y) {
    for (int x = 0; x < t.width(); ++x) {
      const float* src = t.pixel(y, x);
      for (int i = 0; i < block; ++i) {
        for (int j = 0; j < block; ++j) {
          float* dst = out.pixel(y * block + i, x * block + j);
          const float* s = src + (i * block + j) * c_out;
          std::copy(s, s + c_out, dst);
        }
      }
    }
  }
  return out;
}

Tensor space_to_depth(const Tensor& t, int block) {
  if (block <= 0) throw StructuralError("space_to_depth block must be positive");
  if (t.height() % block != 0 || t.width() % block != 0) {
    throw StructuralError("space_to_depth: spatial size not divisible by block");
  }
  const int c_in = t.channels();
  Tensor out(t.height() / block, t.width() / block, c_in * block * block);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      float* dst = out.pixel(y, x);
      for (int i = 0; i < block; ++i) {
        for (int j = 0; j < block; ++j) {
          const float* s = t.pixel(y * block + i, x * block + j);
          std::copy(s, s + c_in, dst + (i * block + j) * c_in);
        }
      }
    }
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw StructuralError("add: shape mismatch " + std::to_string(a.height()) + "x" +
                          std::to_string(a.width()) + "x" + std::to_string(a.channels()) +
                          " vs " + std::to_string(b.height()) + "x" + std::to_string(b.width()) +
                          "x" + std::to_string(b.channels()));
  }
  Tensor out = a;
  auto o = out.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
  return out;
}

Tensor nearest_upsample_replicate(const Tensor& t, int factor) {
  if (factor <= 0) throw StructuralError("nearest_upsample_replicate factor must be positive");
  const int c = t.channels();
  const int reps = factor * factor;
  Tensor out(t.height(), t.width(), c * reps);
  for (int y = 0; y < t.height(); ++y) {
    for (int x = 0; x < t.width(); ++x) {
      const float* src = t.pixel(y, x);
      float* dst = out.pixel(y, x);
      for (int r = 0; r < reps; ++r) std::copy(src, src + c, dst + r * c);
    }
  }
  return out;
}

}  // namespace rilab
