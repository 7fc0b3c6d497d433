// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rilab/corpus.hpp"
#include "rilab/metrics.hpp"
#include "rilab/model.hpp"
#include "rilab/quant.hpp"
#include "rilab/ri.hpp"

namespace rilab {

// One quantization of a model with one representative image.
struct ExperimentRecord {
  std::string model;
  bool clipped = false;
  std::string ri_id;
  AugMethod method = AugMethod::None;
  int on_before = 0;
  int on_after = 0;
  double psnr_mean = 0.0;
  double ssim_mean = 0.0;
  double ms_per_inference = 0.0;
  // Not part of the CSV: used for ordering and analysis.
  Verdict verdict = Verdict::Bad;
  double raw_psnr_mean = 0.0;
  std::size_t corpus_index = 0;
};

enum class SweepMode { Raw, Cfqp };
std::string_view to_string(SweepMode mode);
SweepMode sweep_mode_from_string(std::string_view s);

struct SweepOptions {
  SweepMode mode = SweepMode::Raw;
  Thresholds thresholds;
  int jobs = 1;
};

// Quantizes `m` with a single RI and evaluates the INT8 model on `testset`.
EvalResult evaluate_with_ri(const ModelGraph& m, const Tensor& ri, const Corpus& testset,
                            double* ms_per_inference = nullptr);

// One record per candidate. Raw mode calibrates with the grayscale RI as is;
// cfqp mode with the CFQP output. Rows come back sorted by raw-mode mean PSNR
// (ascending), ties in corpus order; cfqp mode evaluates the raw RI too for
// that ordering. Work is spread over `jobs` threads, results are independent
// of the thread count.
std::vector<ExperimentRecord> run_sweep(const ModelGraph& m, const Corpus& candidates,
                                        const Corpus& testset, const SweepOptions& opt);

inline constexpr std::string_view kSweepCsvHeader =
    "model,clipped,ri_id,method,on_before,on_after,psnr_mean,ssim_mean,ms_per_inference";
inline constexpr int kSchemaVersion = 1;

std::string sweep_csv(const std::vector<ExperimentRecord>& rows);

struct BenchVariant {
  std::string name;
  std::vector<double> samples_ms;
  double mean_ms = 0.0;
  double min_ms = 0.0;
  std::size_t elementwise_ops = 0;
};

struct BenchResult {
  int height = 0;
  int width = 0;
  int repeats = 0;
  BenchVariant clipped;
  BenchVariant noclip;
};

// Quantizes the clipped and no-clip variants of `m` (same weights), both
// calibrated on one synthetic image of the bench size, then times `repeats`
// int8 forwards of each, alternating variants after a short warm-up.
BenchResult bench_clip_variants(const ModelGraph& m, int height, int width, int repeats,
                                std::uint64_t seed = 1);

}  // namespace rilab
