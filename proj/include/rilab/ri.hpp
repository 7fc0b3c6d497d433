// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "rilab/model.hpp"
#include "rilab/tensor.hpp"

namespace rilab {

// Selection and augmentation knobs for representative images.
struct Thresholds {
  double minmax_diff_max = 5.0;  // output min/max distance from 0 / 255
  double deviation_max = 5.0;    // change of the min-max span, output vs input
  int outlier_count_max = 25;
  double shift_max = 10.0;       // endpoint movement, output vs input
  int iter_max = 10;             // LIBB / LIPB iteration cap
  bool strict_zero = false;      // require zero outliers regardless of outlier_count_max

  int effective_outlier_max() const { return strict_zero ? 0 : outlier_count_max; }
};

enum class Verdict { Good, Bad };
std::string_view to_string(Verdict v);

// FP32 response statistics of one candidate representative image.
//   outlier:     an output pixel with any channel > 255 or < 0
//   minmax_gap = max(|out_min - 0|, |out_max - 255|)
//   shift      = max(|out_min - in_min|, |out_max - in_max|)
//   deviation  = |(out_max - out_min) - (in_max - in_min)|
struct RIReport {
  int outlier_count = 0;
  int mask_height = 0;
  int mask_width = 0;
  std::vector<std::uint8_t> outlier_mask;  // mask_height x mask_width, row-major
  double out_min = 0.0;
  double out_max = 0.0;
  double in_min = 0.0;
  double in_max = 0.0;
  double minmax_gap = 0.0;
  double deviation = 0.0;
  double shift = 0.0;
  Verdict verdict = Verdict::Bad;
};

// Good iff all four predicates hold: outlier_count <= effective_outlier_max(),
// minmax_gap <= minmax_diff_max, deviation <= deviation_max, shift <= shift_max.
Verdict classify(const RIReport& r, const Thresholds& thr);

// Throws ContractError for a clipped model.
RIReport outlier_stats(const ModelGraph& m, const Tensor& img, const Thresholds& thr = {});

// BT.601 luma replicated into three channels (not rounded).
Tensor to_grayscale_ri(const Tensor& img);

// One pass of the 3x3 mean filter over every pixel and channel, reflect
// boundary (reflect_index).
Tensor global_blur(const Tensor& img);

enum class AugMethod { None, GB, LIBB, LIPB };
std::string_view to_string(AugMethod m);

struct AugmentationResult {
  AugMethod method = AugMethod::None;
  Tensor image;
  int outlier_count = 0;    // ON of `image`
  int on_before = 0;        // ON of the image handed in
  int iterations_used = 0;
  int pixels_modified = 0;  // LR sites inside the union of blurred regions
  std::vector<std::uint8_t> region_mask;  // image height x width, 1 where blurred
};

// GB: blur the whole image once when ON != 0.
AugmentationResult global_blur_augment(const ModelGraph& m, const Tensor& img,
                                       const Thresholds& thr = {});

// LIBB: while ON != 0 and fewer than thr.iter_max iterations, blur the LR box
// [min_r / s, max_r / s] x [min_c / s, max_c / s] spanned by the HR outliers
// (floor division by the model scale s). The box is recomputed each iteration;
// every blurred pixel reads the pre-iteration image.
AugmentationResult local_iterative_box_blur(const ModelGraph& m, const Tensor& img,
                                            const Thresholds& thr = {});

// LIPB: as LIBB but only the distinct LR points (r / s, c / s) of HR outliers
// are replaced by their 3x3 mean.
AugmentationResult local_iterative_point_blur(const ModelGraph& m, const Tensor& img,
                                              const Thresholds& thr = {});

struct CfqpOutcome {
  RIReport report;                            // on the grayscale RI
  AugmentationResult chosen;
  std::vector<AugmentationResult> candidates;  // GB, LIBB, LIPB when the RI was bad
};

// Grayscale RI; pass-through when classified good, otherwise the GB / LIBB / LIPB
// candidate with the fewest outliers (ties: fewer modified pixels, then
// LIPB < LIBB < GB).
CfqpOutcome cfqp_detailed(const ModelGraph& m, const Tensor& img, const Thresholds& thr = {});
AugmentationResult cfqp(const ModelGraph& m, const Tensor& img, const Thresholds& thr = {});

}  // namespace rilab
