// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

// Central finite differences against the analytic trainer gradients.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rilab/model.hpp"
#include "rilab/train.hpp"

namespace rilab::oracle {

// Double-precision HWC image so the differences are not swamped by float rounding.
struct DImage {
  int h = 0, w = 0, c = 0;
  std::vector<double> v;
  double& at(int y, int x, int ch) { return v[(static_cast<std::size_t>(y) * w + x) * c + ch]; }
  double at(int y, int x, int ch) const { return v[(static_cast<std::size_t>(y) * w + x) * c + ch]; }
};

inline DImage to_double(const Tensor& t) {
  DImage d{t.height(), t.width(), t.channels(), {}};
  d.v.assign(t.values().begin(), t.values().end());
  return d;
}

// Reference forward in double with zero SAME padding. `regions` receives, for
// every ReLU/ClippedReLU input, 0 below the lower kink, 1 between, 2 at or above the upper one.
inline DImage forward_double(const ModelGraph& m, const Tensor& input,
                             std::vector<std::uint8_t>* regions = nullptr) {
  const DImage in = to_double(input);
  DImage x = in;
  for (const auto& l : m.layers) {
    switch (l.kind) {
      case LayerKind::Conv: {
        const auto& cw = l.conv;
        const int cin_g = cw.in_per_group(), cout_g = cw.out_per_group();
        const int ph = cw.kernel_h / 2, pw = cw.kernel_w / 2;
        DImage y{x.h, x.w, cw.out_channels, std::vector<double>(std::size_t(x.h) * x.w * cw.out_channels)};
        for (int yy = 0; yy < x.h; ++yy) {
          for (int xx = 0; xx < x.w; ++xx) {
            for (int oc = 0; oc < cw.out_channels; ++oc) {
              const int g = oc / cout_g;
              double acc = cw.bias[oc];
              for (int ky = 0; ky < cw.kernel_h; ++ky) {
                for (int kx = 0; kx < cw.kernel_w; ++kx) {
                  const int sy = yy + ky - ph, sx = xx + kx - pw;
                  if (sy < 0 || sy >= x.h || sx < 0 || sx >= x.w) continue;
                  for (int i = 0; i < cin_g; ++i) {
                    acc += double(cw.weights[cw.weight_index(ky, kx, i, oc)]) * x.at(sy, sx, g * cin_g + i);
                  }
                }
              }
              y.at(yy, xx, oc) = acc + (l.residual ? x.at(yy, xx, oc) : 0.0);
            }
          }
        }
        x = std::move(y);
        break;
      }
      case LayerKind::ReLU:
      case LayerKind::ClippedReLU: {
        const double lo = l.kind == LayerKind::ReLU ? 0.0 : l.clip_lo;
        const double hi = l.kind == LayerKind::ReLU ? HUGE_VAL : l.clip_hi;
        for (double& v : x.v) {
          if (regions) regions->push_back(static_cast<std::uint8_t>(v >= hi ? 2 : v > lo ? 1 : 0));
          v = std::clamp(v, lo, hi);
        }
        break;
      }
      case LayerKind::DepthToSpace: {
        const int b = l.block, cout = x.c / (b * b);
        DImage y{x.h * b, x.w * b, cout, std::vector<double>(x.v.size())};
        for (int oy = 0; oy < y.h; ++oy) {
          for (int ox = 0; ox < y.w; ++ox) {
            for (int ch = 0; ch < cout; ++ch) {
              y.at(oy, ox, ch) = x.at(oy / b, ox / b, ((oy % b) * b + ox % b) * cout + ch);
            }
          }
        }
        x = std::move(y);
        break;
      }
      case LayerKind::AddAnchor:
        for (int yy = 0; yy < x.h; ++yy) {
          for (int xx = 0; xx < x.w; ++xx) {
            for (int ch = 0; ch < x.c; ++ch) x.at(yy, xx, ch) += in.at(yy, xx, ch % in.c);
          }
        }
        break;
    }
  }
  return x;
}

inline double loss_of(const ModelGraph& m, const std::vector<PatchPair>& batch, LossKind kind) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& p : batch) {
    const DImage out = forward_double(m, p.lr);
    const auto target = p.hr.values();
    for (std::size_t i = 0; i < out.v.size(); ++i) {
      const double d = out.v[i] - target[i];
      sum += kind == LossKind::L1 ? std::abs(d) : d * d;
    }
    count += out.v.size();
  }
  return sum / static_cast<double>(count);
}

// A perturbation that changes any region code crosses a kink.
inline std::vector<std::uint8_t> kink_pattern(const ModelGraph& m, const std::vector<PatchPair>& batch) {
  std::vector<std::uint8_t> pattern;
  for (const auto& p : batch) forward_double(m, p.lr, &pattern);
  return pattern;
}

struct LayerCheck {
  std::size_t layer = 0;
  int checked = 0;
  int skipped = 0;  // parameters whose perturbation crossed a kink
  double rel_error = 0.0;
};

// For each Conv layer: `per_layer` evenly spaced weights plus every bias.
// rel_error = ||fd - analytic|| / max(||fd||, ||analytic||) over the checked entries.
inline std::vector<LayerCheck> check_gradients(const ModelGraph& m, const std::vector<PatchPair>& batch,
                                               LossKind kind, int per_layer, double step) {
  LayerGradients grads;
  compute_gradients(m, batch, kind, grads);
  const auto base_pattern = kink_pattern(m, batch);
  std::vector<LayerCheck> out;
  for (std::size_t li = 0; li < m.layers.size(); ++li) {
    if (m.layers[li].kind != LayerKind::Conv) continue;
    LayerCheck lc;
    lc.layer = li;
    double diff2 = 0.0, fd2 = 0.0, an2 = 0.0;
    auto probe = [&](bool bias, std::size_t idx, double analytic) {
      ModelGraph plus = m, minus = m;
      auto& wp = bias ? plus.layers[li].conv.bias[idx] : plus.layers[li].conv.weights[idx];
      auto& wm = bias ? minus.layers[li].conv.bias[idx] : minus.layers[li].conv.weights[idx];
      const double h = step * std::max(1.0, std::abs(double(wp)));
      wp = static_cast<float>(wp + h);
      wm = static_cast<float>(wm - h);
      if (kink_pattern(plus, batch) != base_pattern || kink_pattern(minus, batch) != base_pattern) {
        ++lc.skipped;
        return;
      }
      const double fd = (loss_of(plus, batch, kind) - loss_of(minus, batch, kind)) / (double(wp) - double(wm));
      diff2 += (fd - analytic) * (fd - analytic);
      fd2 += fd * fd;
      an2 += analytic * analytic;
      ++lc.checked;
    };
    const auto& w = m.layers[li].conv;
    const std::size_t stride = std::max<std::size_t>(1, w.weights.size() / per_layer);
    for (std::size_t i = 0; i < w.weights.size(); i += stride) probe(false, i, grads[li].weights[i]);
    for (std::size_t i = 0; i < w.bias.size(); ++i) probe(true, i, grads[li].bias[i]);
    lc.rel_error = std::sqrt(diff2) / std::max({std::sqrt(fd2), std::sqrt(an2), 1e-30});
    out.push_back(lc);
  }
  return out;
}

}  // namespace rilab::oracle
