// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <set>
#include <tuple>
#include <utility>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rilab/corpus.hpp"
#include "rilab/error.hpp"
#include "rilab/ri.hpp"

using namespace rilab;

namespace {

// Statistics recomputed from the FP32 output with plain loops.
RIReport reference_stats(const ModelGraph& m, const Tensor& img) {
  const Tensor out = forward(m, img);
  RIReport r;
  r.mask_height = out.height();
  r.mask_width = out.width();
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      bool bad = false;
      for (int c = 0; c < out.channels(); ++c) bad |= out.at(y, x, c) > 255.0f || out.at(y, x, c) < 0.0f;
      r.outlier_count += bad;
    }
  }
  r.out_min = out.min_value();
  r.out_max = out.max_value();
  r.in_min = img.min_value();
  r.in_max = img.max_value();
  return r;
}

bool is_good(const RIReport& r, const Thresholds& t) {
  const double gap = std::max(std::abs(r.out_min), std::abs(r.out_max - 255.0));
  const double shift = std::max(std::abs(r.out_min - r.in_min), std::abs(r.out_max - r.in_max));
  const double dev = std::abs((r.out_max - r.out_min) - (r.in_max - r.in_min));
  const int on_max = t.strict_zero ? 0 : t.outlier_count_max;
  return r.outlier_count <= on_max && gap <= t.minmax_diff_max && dev <= t.deviation_max &&
         shift <= t.shift_max;
}

// Mild sharpening: smooth content stays in range, 0/255 edges overshoot.
ModelGraph sharpen() { return fixture::sharpening_model(0.1f); }

// Smooth RI spanning [4, 250]. The pedestal keeps the foot of the bump off 0,
// where any convex step would undershoot.
Tensor smooth_ri(int n = 48) {
  Tensor t = fixture::bump(n, n, 246.0);
  for (float& v : t.values()) v += 4.0f;
  return t;
}

// The smooth RI with a hard-edged checker in the upper-left corner.
Tensor checkered(int n = 36) { return fixture::with_checker(smooth_ri(n), 3, 3, 8, 2); }

std::set<std::pair<int, int>> hr_outlier_sites(const RIReport& r, int s) {
  std::set<std::pair<int, int>> sites;
  for (int y = 0; y < r.mask_height; ++y) {
    for (int x = 0; x < r.mask_width; ++x) {
      if (r.outlier_mask[static_cast<std::size_t>(y) * r.mask_width + x]) sites.emplace(y / s, x / s);
    }
  }
  return sites;
}

void check_outside_unchanged(const AugmentationResult& a, const Tensor& before) {
  REQUIRE(a.region_mask.size() == static_cast<std::size_t>(before.height()) * before.width());
  int inside = 0;
  for (int y = 0; y < before.height(); ++y) {
    for (int x = 0; x < before.width(); ++x) {
      if (a.region_mask[static_cast<std::size_t>(y) * before.width() + x]) {
        ++inside;
        continue;
      }
      for (int c = 0; c < 3; ++c) CHECK(a.image.at(y, x, c) == before.at(y, x, c));
    }
  }
  CHECK(inside == a.pixels_modified);
}

}  // namespace

TEST_CASE("outlier statistics match a direct recount of the FP32 output") {
  const auto images = synth_corpus(21, 6, 30);
  const Thresholds thr;
  for (const auto& m : {fixture::sharpening_model(0.5f), build_model(Arch::AbpnTiny, false, 2),
                        build_model(Arch::EspcnTiny, false, 3)}) {
    for (const auto& ci : images.images) {
      const RIReport r = outlier_stats(m, ci.image, thr);
      const RIReport ref = reference_stats(m, ci.image);
      CHECK(r.outlier_count == ref.outlier_count);
      CHECK(r.mask_height == 90);
      CHECK(r.mask_width == 90);
      CHECK(std::count(r.outlier_mask.begin(), r.outlier_mask.end(), 1) == r.outlier_count);
      CHECK(r.out_min == doctest::Approx(ref.out_min));
      CHECK(r.out_max == doctest::Approx(ref.out_max));
      CHECK(r.in_min == ref.in_min);
      CHECK(r.in_max == ref.in_max);
      // The verdict is exactly the conjunction of the four predicates.
      CHECK((r.verdict == Verdict::Good) == is_good(ref, thr));
      CHECK(classify(r, thr) == r.verdict);
    }
  }
}

TEST_CASE("hard edges produce outliers, smooth full-range content does not") {
  const ModelGraph m = sharpen();
  const RIReport smooth = outlier_stats(m, smooth_ri());
  MESSAGE("smooth bump: ON " << smooth.outlier_count << ", gap " << smooth.minmax_gap << ", shift "
                             << smooth.shift << ", deviation " << smooth.deviation);
  CHECK(smooth.outlier_count == 0);
  CHECK(smooth.verdict == Verdict::Good);
  const RIReport edges = outlier_stats(m, checkered());
  CHECK(edges.outlier_count > 0);
  CHECK(edges.verdict == Verdict::Bad);
}

TEST_CASE("verdict thresholds are inclusive and strict zero overrides the count") {
  RIReport r;
  r.outlier_count = 25;
  r.minmax_gap = 5.0;
  r.deviation = 5.0;
  r.shift = 10.0;
  Thresholds thr;
  CHECK(classify(r, thr) == Verdict::Good);
  thr.strict_zero = true;
  CHECK(classify(r, thr) == Verdict::Bad);
  r.outlier_count = 0;
  CHECK(classify(r, thr) == Verdict::Good);
  thr.strict_zero = false;
  for (auto bump : {&RIReport::minmax_gap, &RIReport::deviation, &RIReport::shift}) {
    RIReport worse = r;
    worse.*bump += 1e-6;
    CHECK(classify(worse, thr) == Verdict::Bad);
  }
  r.outlier_count = 26;
  CHECK(classify(r, thr) == Verdict::Bad);
}

TEST_CASE("clipped models are rejected by the outlier analysis") {
  const ModelGraph m = fixture::sharpening_model(0.5f, true);
  CHECK_THROWS_AS(outlier_stats(m, checkered()), ContractError);
  CHECK_THROWS_AS(cfqp(m, checkered()), ContractError);
  CHECK_THROWS_AS(global_blur_augment(m, checkered()), ContractError);
}

TEST_CASE("global blur matches the box-filter oracle") {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor t = oracle::random_tensor(rng, 1 + rng.below_int(9), 1 + rng.below_int(9), 3, 0, 255);
    CHECK(oracle::max_abs_diff(global_blur(t), oracle::box_blur3(t)) <= 1e-4);
  }
}

TEST_CASE("grayscale RI is BT.601 luma in every channel") {
  const Tensor img = synth_corpus(3, 1, 16).images[0].image;
  const Tensor g = to_grayscale_ri(img);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      const double luma = 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) + 0.114 * img.at(y, x, 2);
      for (int c = 0; c < 3; ++c) CHECK(g.at(y, x, c) == doctest::Approx(luma).epsilon(1e-6));
    }
  }
}

TEST_CASE("GB leaves an outlier-free image alone and blurs everything otherwise") {
  const ModelGraph m = sharpen();
  const Tensor clean = smooth_ri();
  const auto a = global_blur_augment(m, clean);
  CHECK(a.image == clean);
  CHECK(a.pixels_modified == 0);
  CHECK(a.iterations_used == 0);
  const Tensor dirty = checkered();
  const auto b = global_blur_augment(m, dirty);
  CHECK(b.on_before > 0);
  CHECK(b.iterations_used == 1);
  CHECK(b.pixels_modified == dirty.height() * dirty.width());
  CHECK(b.image == global_blur(dirty));
  CHECK(b.outlier_count == outlier_stats(m, b.image).outlier_count);
}

TEST_CASE("LIBB and LIPB only touch pixels inside their regions") {
  const ModelGraph m = sharpen();
  const Tensor img = checkered();
  for (int iters : {1, 3, 10}) {
    Thresholds thr;
    thr.iter_max = iters;
    for (const auto& a : {local_iterative_box_blur(m, img, thr), local_iterative_point_blur(m, img, thr)}) {
      INFO(to_string(a.method) << " iter_max " << iters);
      check_outside_unchanged(a, img);
      CHECK(a.iterations_used >= 1);
      CHECK(a.iterations_used <= iters);
      CHECK(a.on_before == outlier_stats(m, img).outlier_count);
      CHECK(a.outlier_count == outlier_stats(m, a.image).outlier_count);
      if (a.iterations_used < iters) CHECK(a.outlier_count == 0);
    }
  }
}

TEST_CASE("one LIPB step blurs exactly the LR points under HR outliers") {
  const ModelGraph m = sharpen();
  const Tensor img = checkered();
  const RIReport r = outlier_stats(m, img);
  Thresholds thr;
  thr.iter_max = 1;
  const auto sites = hr_outlier_sites(r, 3);
  const auto a = local_iterative_point_blur(m, img, thr);
  CHECK(a.pixels_modified == static_cast<int>(sites.size()));
  const Tensor blurred = global_blur(img);
  for (const auto& [y, x] : sites) {
    CHECK(a.region_mask[static_cast<std::size_t>(y) * img.width() + x] == 1);
    for (int c = 0; c < 3; ++c) CHECK(a.image.at(y, x, c) == blurred.at(y, x, c));
  }

  // LIBB covers the bounding box of the same sites.
  const auto b = local_iterative_box_blur(m, img, thr);
  int y0 = 1 << 30, y1 = -1, x0 = 1 << 30, x1 = -1;
  for (const auto& [y, x] : sites) {
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
  }
  CHECK(b.pixels_modified == (y1 - y0 + 1) * (x1 - x0 + 1));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) CHECK(b.image.at(y, x, 1) == blurred.at(y, x, 1));
  }
}

TEST_CASE("CFQP passes good RIs through and otherwise picks the lexicographic best candidate") {
  const ModelGraph m = sharpen();
  const Tensor good = smooth_ri();
  const auto pass = cfqp_detailed(m, good);
  CHECK(pass.report.verdict == Verdict::Good);
  CHECK(pass.chosen.method == AugMethod::None);
  CHECK(pass.chosen.image == to_grayscale_ri(good));
  CHECK(pass.candidates.empty());

  const auto images = synth_corpus(30, 8, 24);
  int bad_seen = 0;
  for (const auto& ci : images.images) {
    const auto out = cfqp_detailed(m, ci.image);
    const RIReport ref = outlier_stats(m, to_grayscale_ri(ci.image));
    CHECK(out.report.outlier_count == ref.outlier_count);
    CHECK(out.report.verdict == ref.verdict);
    if (out.report.verdict == Verdict::Good) continue;
    ++bad_seen;
    REQUIRE(out.candidates.size() == 3);
    auto key = [](const AugmentationResult& a) {
      const int rank = a.method == AugMethod::LIPB ? 0 : a.method == AugMethod::LIBB ? 1 : 2;
      return std::tuple(a.outlier_count, a.pixels_modified, rank);
    };
    for (const auto& c : out.candidates) CHECK(key(out.chosen) <= key(c));
    CHECK(out.chosen.outlier_count <= out.report.outlier_count);
    CHECK(cfqp(m, ci.image).image == out.chosen.image);
  }
  CHECK(bad_seen > 0);
}

TEST_CASE("CFQP prefers the point blur when every method clears the outliers") {
  // A single hard dot: each method removes it, LIPB touches the fewest pixels.
  const ModelGraph m = sharpen();
  Tensor img = smooth_ri();
  for (int c = 0; c < 3; ++c) img.at(24, 24, c) = 0.0f;
  const auto out = cfqp_detailed(m, img);
  REQUIRE(out.report.verdict == Verdict::Bad);
  for (const auto& c : out.candidates) MESSAGE(to_string(c.method) << " ON " << c.outlier_count
                                                                  << " modified " << c.pixels_modified);
  CHECK(out.chosen.method == AugMethod::LIPB);
}
