// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rilab/corpus.hpp"
#include "rilab/model.hpp"
#include "rilab/quant.hpp"
#include "rilab/tensor.hpp"

namespace rilab {

// Returned by psnr_y for identical inputs.
inline constexpr double kPsnrCapDb = 99.0;

// PSNR on BT.601 luma after cropping `shave` pixels from every border:
// 10 log10(255^2 / MSE), capped at kPsnrCapDb.
double psnr_y(const Tensor& a, const Tensor& b, int shave = 3);

// Mean single-scale SSIM on luma over all 8x8 windows (stride 1, uniform
// weights, population statistics), C1 = (0.01 * 255)^2, C2 = (0.03 * 255)^2.
// Inputs smaller than 8 pixels use one window covering the whole image.
double ssim(const Tensor& a, const Tensor& b);

struct ImageScore {
  std::string id;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct EvalResult {
  std::string testset;
  std::string model_id;
  std::string ri_id;
  std::vector<ImageScore> images;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  std::optional<std::vector<ImageScore>> baseline;  // bicubic rows when requested
  double baseline_mean_psnr = 0.0;
  double baseline_mean_ssim = 0.0;
};

using Upscaler = std::function<Tensor(const Tensor& lr)>;

// For each test image: HR = modcrop(image, scale), LR = bicubic 1/scale of HR,
// SR = round_clamp_u8(upscale(LR)); PSNR (shave = scale) and SSIM on the
// shaved crops against HR.
EvalResult eval_upscaler(const Upscaler& upscale, const Corpus& testset, int scale,
                         bool with_baseline = false);
EvalResult eval_model(const ModelGraph& m, const Corpus& testset, bool with_baseline = false);
EvalResult eval_model(const QuantizedModel& qm, const Corpus& testset, bool with_baseline = false);

// Bicubic x`scale` upscaler, the classical baseline.
Upscaler bicubic_upscaler(int scale);

}  // namespace rilab
