// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#include "rilab/ri.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>
#include <utility>

#include "rilab/error.hpp"
#include "rilab/image.hpp"
#include "rilab/ops.hpp"

namespace rilab {

std::string_view to_string(Verdict v) { return v == Verdict::Good ? "good" : "bad"; }

std::string_view to_string(AugMethod m) {
  switch (m) {
    case AugMethod::None: return "none";
    case AugMethod::GB: return "GB";
    case AugMethod::LIBB: return "LIBB";
    case AugMethod::LIPB: return "LIPB";
  }
  return "?";
}

Verdict classify(const RIReport& r, const Thresholds& thr) {
  const bool ok = r.outlier_count <= thr.effective_outlier_max() &&
                  r.minmax_gap <= thr.minmax_diff_max && r.deviation <= thr.deviation_max &&
                  r.shift <= thr.shift_max;
  return ok ? Verdict::Good : Verdict::Bad;
}

RIReport outlier_stats(const ModelGraph& m, const Tensor& img, const Thresholds& thr) {
  if (m.clipped) {
    throw ContractError("outlier analysis needs a no-clip model; '" + m.name +
                        "' ends with a clipped activation and cannot produce outliers");
  }
  const Tensor out = forward(m, img);
  RIReport r;
  r.mask_height = out.height();
  r.mask_width = out.width();
  r.outlier_mask.assign(static_cast<std::size_t>(out.height()) * out.width(), 0);
  const int c = out.channels();
  auto v = out.values();
  for (std::size_t p = 0; p < r.outlier_mask.size(); ++p) {
    bool outlier = false;
    for (int k = 0; k < c; ++k) {
      const float x = v[p * c + k];
      if (x > 255.0f || x < 0.0f) outlier = true;
    }
    if (outlier) {
      r.outlier_mask[p] = 1;
      ++r.outlier_count;
    }
  }
  r.out_min = out.min_value();
  r.out_max = out.max_value();
  r.in_min = img.min_value();
  r.in_max = img.max_value();
  r.minmax_gap = std::max(std::abs(r.out_min), std::abs(r.out_max - 255.0));
  r.shift = std::max(std::abs(r.out_min - r.in_min), std::abs(r.out_max - r.in_max));
  r.deviation = std::abs((r.out_max - r.out_min) - (r.in_max - r.in_min));
  r.verdict = classify(r, thr);
  return r;
}

Tensor to_grayscale_ri(const Tensor& img) {
  if (img.channels() != 3) throw StructuralError("to_grayscale_ri expects an RGB image");
  Tensor out(img.height(), img.width(), 3);
  auto in = img.values();
  auto o = out.values();
  for (std::size_t p = 0; p < in.size() / 3; ++p) {
    const auto y = static_cast<float>(luma(in[3 * p], in[3 * p + 1], in[3 * p + 2]));
    o[3 * p] = o[3 * p + 1] = o[3 * p + 2] = y;
  }
  return out;
}

namespace {

// 3x3 mean at (y, x) for every channel, read from `src`, written to `dst`.
void blur_site(const Tensor& src, Tensor& dst, int y, int x) {
  const int h = src.height();
  const int w = src.width();
  const int c = src.channels();
  for (int k = 0; k < c; ++k) {
    double sum = 0.0;
    for (int dy = -1; dy <= 1; ++dy) {
      const int sy = reflect_index(y + dy, h);
      for (int dx = -1; dx <= 1; ++dx) sum += src.at(sy, reflect_index(x + dx, w), k);
    }
    dst.at(y, x, k) = static_cast<float>(sum / 9.0);
  }
}

int count_set(const std::vector<std::uint8_t>& mask) {
  return static_cast<int>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

template <class SelectSites>
AugmentationResult iterate_local(const ModelGraph& m, const Tensor& img, const Thresholds& thr,
                                 AugMethod method, SelectSites select) {
  AugmentationResult res;
  res.method = method;
  res.image = img;
  res.region_mask.assign(static_cast<std::size_t>(img.height()) * img.width(), 0);
  RIReport rep = outlier_stats(m, img, thr);
  res.on_before = rep.outlier_count;
  while (rep.outlier_count != 0 && res.iterations_used < thr.iter_max) {
    const auto sites = select(rep, m.scale, img.height(), img.width());
    const Tensor src = res.image;
    for (const auto& [y, x] : sites) {
      blur_site(src, res.image, y, x);
      res.region_mask[static_cast<std::size_t>(y) * img.width() + x] = 1;
    }
    ++res.iterations_used;
    rep = outlier_stats(m, res.image, thr);
  }
  res.outlier_count = rep.outlier_count;
  res.pixels_modified = count_set(res.region_mask);
  return res;
}

std::vector<std::pair<int, int>> box_sites(const RIReport& rep, int scale, int h, int w) {
  int r0 = rep.mask_height, r1 = -1, c0 = rep.mask_width, c1 = -1;
  for (int r = 0; r < rep.mask_height; ++r) {
    for (int c = 0; c < rep.mask_width; ++c) {
      if (!rep.outlier_mask[static_cast<std::size_t>(r) * rep.mask_width + c]) continue;
      r0 = std::min(r0, r);
      r1 = std::max(r1, r);
      c0 = std::min(c0, c);
      c1 = std::max(c1, c);
    }
  }
  std::vector<std::pair<int, int>> sites;
  if (r1 < 0) return sites;
  const int y0 = r0 / scale, y1 = std::min(h - 1, r1 / scale);
  const int x0 = c0 / scale, x1 = std::min(w - 1, c1 / scale);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) sites.emplace_back(y, x);
  }
  return sites;
}

std::vector<std::pair<int, int>> point_sites(const RIReport& rep, int scale, int h, int w) {
  std::set<std::pair<int, int>> unique;
  for (int r = 0; r < rep.mask_height; ++r) {
    for (int c = 0; c < rep.mask_width; ++c) {
      if (rep.outlier_mask[static_cast<std::size_t>(r) * rep.mask_width + c]) {
        unique.emplace(std::min(h - 1, r / scale), std::min(w - 1, c / scale));
      }
    }
  }
  return {unique.begin(), unique.end()};
}

}  // namespace

Tensor global_blur(const Tensor& img) {
  Tensor out(img.height(), img.width(), img.channels());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) blur_site(img, out, y, x);
  }
  return out;
}

AugmentationResult global_blur_augment(const ModelGraph& m, const Tensor& img,
                                       const Thresholds& thr) {
  AugmentationResult res;
  res.method = AugMethod::GB;
  res.image = img;
  res.region_mask.assign(static_cast<std::size_t>(img.height()) * img.width(), 0);
  const RIReport before = outlier_stats(m, img, thr);
  res.on_before = res.outlier_count = before.outlier_count;
  if (before.outlier_count != 0) {
    res.image = global_blur(img);
    res.iterations_used = 1;
    std::fill(res.region_mask.begin(), res.region_mask.end(), std::uint8_t{1});
    res.pixels_modified = count_set(res.region_mask);
    res.outlier_count = outlier_stats(m, res.image, thr).outlier_count;
  }
  return res;
}

AugmentationResult local_iterative_box_blur(const ModelGraph& m, const Tensor& img,
                                            const Thresholds& thr) {
  return iterate_local(m, img, thr, AugMethod::LIBB, box_sites);
}

AugmentationResult local_iterative_point_blur(const ModelGraph& m, const Tensor& img,
                                              const Thresholds& thr) {
  return iterate_local(m, img, thr, AugMethod::LIPB, point_sites);
}

namespace {

int method_rank(AugMethod m) {
  switch (m) {
    case AugMethod::LIPB: return 0;
    case AugMethod::LIBB: return 1;
    case AugMethod::GB: return 2;
    case AugMethod::None: return 3;
  }
  return 4;
}

}  // namespace

CfqpOutcome cfqp_detailed(const ModelGraph& m, const Tensor& img, const Thresholds& thr) {
  CfqpOutcome out;
  const Tensor ri = to_grayscale_ri(img);
  out.report = outlier_stats(m, ri, thr);
  if (out.report.verdict == Verdict::Good) {
    out.chosen.method = AugMethod::None;
    out.chosen.image = ri;
    out.chosen.outlier_count = out.chosen.on_before = out.report.outlier_count;
    out.chosen.region_mask.assign(static_cast<std::size_t>(ri.height()) * ri.width(), 0);
    return out;
  }
  out.candidates.push_back(global_blur_augment(m, ri, thr));
  out.candidates.push_back(local_iterative_box_blur(m, ri, thr));
  out.candidates.push_back(local_iterative_point_blur(m, ri, thr));
  const auto best = std::min_element(
      out.candidates.begin(), out.candidates.end(),
      [](const AugmentationResult& a, const AugmentationResult& b) {
        return std::tuple(a.outlier_count, a.pixels_modified, method_rank(a.method)) <
               std::tuple(b.outlier_count, b.pixels_modified, method_rank(b.method));
      });
  out.chosen = *best;
  return out;
}

AugmentationResult cfqp(const ModelGraph& m, const Tensor& img, const Thresholds& thr) {
  return cfqp_detailed(m, img, thr).chosen;
}

}  // namespace rilab
