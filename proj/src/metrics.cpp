// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#include "rilab/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "rilab/error.hpp"
#include "rilab/image.hpp"

namespace rilab {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) throw StructuralError(std::string(what) + ": shape mismatch");
}

}  // namespace

double psnr_y(const Tensor& a, const Tensor& b, int shave) {
  require_same_shape(a, b, "psnr_y");
  if (shave < 0 || 2 * shave >= a.height() || 2 * shave >= a.width()) {
    throw StructuralError("psnr_y: border shave " + std::to_string(shave) +
                          " leaves no pixels");
  }
  const Tensor ya = luma_plane(a);
  const Tensor yb = luma_plane(b);
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = shave; y < a.height() - shave; ++y) {
    for (int x = shave; x < a.width() - shave; ++x) {
      const double d = static_cast<double>(ya.at(y, x, 0)) - yb.at(y, x, 0);
      sum += d * d;
      ++n;
    }
  }
  const double mse = sum / static_cast<double>(n);
  if (mse == 0.0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(255.0 * 255.0 / mse));
}

double ssim(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "ssim");
  const Tensor ya = luma_plane(a);
  const Tensor yb = luma_plane(b);
  const int h = a.height();
  const int w = a.width();
  const int wh = std::min(8, h);
  const int ww = std::min(8, w);
  constexpr double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  const double count = static_cast<double>(wh) * ww;
  double total = 0.0;
  std::size_t windows = 0;
  for (int y0 = 0; y0 + wh <= h; ++y0) {
    for (int x0 = 0; x0 + ww <= w; ++x0) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (int y = y0; y < y0 + wh; ++y) {
        for (int x = x0; x < x0 + ww; ++x) {
          const double va = ya.at(y, x, 0);
          const double vb = yb.at(y, x, 0);
          sa += va;
          sb += vb;
          saa += va * va;
          sbb += vb * vb;
          sab += va * vb;
        }
      }
      const double ma = sa / count;
      const double mb = sb / count;
      const double va = saa / count - ma * ma;
      const double vb = sbb / count - mb * mb;
      const double cov = sab / count - ma * mb;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++windows;
    }
  }
  return total / static_cast<double>(windows);
}

Upscaler bicubic_upscaler(int scale) {
  return [scale](const Tensor& lr) { return bicubic_resize(lr, Rational{scale, 1}); };
}

namespace {

std::vector<ImageScore> score_all(const Upscaler& upscale, const Corpus& testset, int scale) {
  std::vector<ImageScore> rows;
  for (const auto& item : testset.images) {
    const Tensor hr = modcrop(item.image, scale);
    const Tensor lr = bicubic_resize(hr, Rational{1, scale});
    const Tensor sr = round_clamp_u8(upscale(lr));
    if (!sr.same_shape(hr)) {
      throw StructuralError("upscaler produced a " + std::to_string(sr.height()) + "x" +
                            std::to_string(sr.width()) + " image for '" + item.id + "'");
    }
    const int h = hr.height() - 2 * scale;
    const int w = hr.width() - 2 * scale;
    ImageScore s;
    s.id = item.id;
    s.psnr = psnr_y(sr, hr, scale);
    s.ssim = ssim(crop(sr, scale, scale, h, w), crop(hr, scale, scale, h, w));
    rows.push_back(std::move(s));
  }
  return rows;
}

void mean_of(const std::vector<ImageScore>& rows, double& psnr, double& ssim_mean) {
  double p = 0.0, s = 0.0;
  for (const auto& r : rows) {
    p += r.psnr;
    s += r.ssim;
  }
  psnr = p / static_cast<double>(rows.size());
  ssim_mean = s / static_cast<double>(rows.size());
}

}  // namespace

EvalResult eval_upscaler(const Upscaler& upscale, const Corpus& testset, int scale,
                         bool with_baseline) {
  if (testset.images.empty()) throw StructuralError("evaluation test set is empty");
  EvalResult r;
  r.testset = testset.name;
  r.images = score_all(upscale, testset, scale);
  mean_of(r.images, r.mean_psnr, r.mean_ssim);
  if (with_baseline) {
    r.baseline = score_all(bicubic_upscaler(scale), testset, scale);
    mean_of(*r.baseline, r.baseline_mean_psnr, r.baseline_mean_ssim);
  }
  return r;
}

EvalResult eval_model(const ModelGraph& m, const Corpus& testset, bool with_baseline) {
  auto r = eval_upscaler([&](const Tensor& lr) { return forward(m, lr); }, testset, m.scale,
                         with_baseline);
  r.model_id = m.name;
  return r;
}

EvalResult eval_model(const QuantizedModel& qm, const Corpus& testset, bool with_baseline) {
  auto r = eval_upscaler([&](const Tensor& lr) { return int8_forward(qm, lr); }, testset,
                         qm.source.scale, with_baseline);
  r.model_id = qm.source.name + "-int8";
  return r;
}

}  // namespace rilab
