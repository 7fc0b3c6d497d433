// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#include "rilab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "rilab/error.hpp"
#include "rilab/image.hpp"

namespace rilab {

std::string_view to_string(SweepMode mode) { return mode == SweepMode::Raw ? "raw" : "cfqp"; }

SweepMode sweep_mode_from_string(std::string_view s) {
  if (s == "raw") return SweepMode::Raw;
  if (s == "cfqp") return SweepMode::Cfqp;
  throw StructuralError("sweep mode must be 'raw' or 'cfqp', got '" + std::string(s) + "'");
}

EvalResult evaluate_with_ri(const ModelGraph& m, const Tensor& ri, const Corpus& testset,
                            double* ms_per_inference) {
  const Tensor rd[] = {ri};
  const QuantizedModel qm = quantize_model(m, calibrate(m, rd));
  using clock = std::chrono::steady_clock;
  clock::duration spent{};
  int calls = 0;
  auto result = eval_upscaler(
      [&](const Tensor& lr) {
        const auto t0 = clock::now();
        Tensor out = int8_forward(qm, lr);
        spent += clock::now() - t0;
        ++calls;
        return out;
      },
      testset, m.scale);
  result.model_id = m.name + "-int8";
  if (ms_per_inference) {
    *ms_per_inference = std::chrono::duration<double, std::milli>(spent).count() / calls;
  }
  return result;
}

namespace {

ExperimentRecord sweep_one(const ModelGraph& m, const CorpusImage& item, const Corpus& testset,
                           const SweepOptions& opt) {
  ExperimentRecord rec;
  rec.model = m.name;
  rec.clipped = m.clipped;
  rec.ri_id = item.id;

  const Tensor raw_ri = to_grayscale_ri(item.image);
  double raw_ms = 0.0;
  const auto raw_eval = evaluate_with_ri(m, raw_ri, testset, &raw_ms);
  rec.raw_psnr_mean = raw_eval.mean_psnr;

  if (opt.mode == SweepMode::Raw) {
    const auto report = outlier_stats(m, raw_ri, opt.thresholds);
    rec.verdict = report.verdict;
    rec.method = AugMethod::None;
    rec.on_before = rec.on_after = report.outlier_count;
    rec.psnr_mean = raw_eval.mean_psnr;
    rec.ssim_mean = raw_eval.mean_ssim;
    rec.ms_per_inference = raw_ms;
    return rec;
  }
  const auto outcome = cfqp_detailed(m, item.image, opt.thresholds);
  rec.verdict = outcome.report.verdict;
  rec.method = outcome.chosen.method;
  rec.on_before = outcome.report.outlier_count;
  rec.on_after = outcome.chosen.outlier_count;
  if (outcome.chosen.method == AugMethod::None) {
    rec.psnr_mean = raw_eval.mean_psnr;
    rec.ssim_mean = raw_eval.mean_ssim;
    rec.ms_per_inference = raw_ms;
  } else {
    const auto e = evaluate_with_ri(m, outcome.chosen.image, testset, &rec.ms_per_inference);
    rec.psnr_mean = e.mean_psnr;
    rec.ssim_mean = e.mean_ssim;
  }
  return rec;
}

}  // namespace

std::vector<ExperimentRecord> run_sweep(const ModelGraph& m, const Corpus& candidates,
                                        const Corpus& testset, const SweepOptions& opt) {
  if (candidates.images.empty()) throw StructuralError("sweep: candidate corpus is empty");
  if (testset.images.empty()) throw StructuralError("sweep: test set is empty");
  if (m.clipped && opt.mode == SweepMode::Cfqp) {
    throw ContractError("cfqp sweep needs a no-clip model");
  }
  std::vector<ExperimentRecord> rows(candidates.images.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      try {
        rows[i] = sweep_one(m, candidates.images[i], testset, opt);
        rows[i].corpus_index = i;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(rows.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.raw_psnr_mean < b.raw_psnr_mean;
  });
  return rows;
}

std::string sweep_csv(const std::vector<ExperimentRecord>& rows) {
  std::string out(kSweepCsvHeader);
  out += '\n';
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%s,%s,%d,%d,%.6f,%.6f,%.4f\n", r.model.c_str(),
                  r.clipped ? 1 : 0, r.ri_id.c_str(), std::string(to_string(r.method)).c_str(),
                  r.on_before, r.on_after, r.psnr_mean, r.ssim_mean, r.ms_per_inference);
    out += buf;
  }
  return out;
}

BenchResult bench_clip_variants(const ModelGraph& m, int height, int width, int repeats,
                                std::uint64_t seed) {
  if (height <= 0 || width <= 0 || repeats <= 0) {
    throw StructuralError("bench: size and repeats must be positive");
  }
  const ModelGraph clipped = with_clip(m, true);
  const ModelGraph noclip = with_clip(m, false);
  const int side = std::max({height, width, 8});
  const Tensor input = crop(synth_corpus(seed, 1, side).images[0].image, 0, 0, height, width);
  const Tensor rd[] = {input};
  const QuantizedModel qc = quantize_model(clipped, calibrate(clipped, rd));
  const QuantizedModel qn = quantize_model(noclip, calibrate(noclip, rd));

  BenchResult r;
  r.height = height;
  r.width = width;
  r.repeats = repeats;
  r.clipped.name = "clipped";
  r.noclip.name = "noclip";
  r.clipped.elementwise_ops = elementwise_op_count(qc, height, width);
  r.noclip.elementwise_ops = elementwise_op_count(qn, height, width);

  using clock = std::chrono::steady_clock;
  auto time_one = [&](const QuantizedModel& qm) {
    const auto t0 = clock::now();
    const Tensor out = int8_forward(qm, input);
    const auto t1 = clock::now();
    if (out.empty()) throw std::logic_error("empty bench output");
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
  };
  const int warmup = std::max(1, std::min(repeats / 10, 5));
  for (int i = 0; i < warmup; ++i) {
    time_one(qc);
    time_one(qn);
  }
  for (int i = 0; i < repeats; ++i) {
    // alternate which variant goes first so drift hits both equally
    if (i % 2 == 0) {
      r.clipped.samples_ms.push_back(time_one(qc));
      r.noclip.samples_ms.push_back(time_one(qn));
    } else {
      r.noclip.samples_ms.push_back(time_one(qn));
      r.clipped.samples_ms.push_back(time_one(qc));
    }
  }
  for (auto* v : {&r.clipped, &r.noclip}) {
    v->mean_ms = std::accumulate(v->samples_ms.begin(), v->samples_ms.end(), 0.0) / repeats;
    v->min_ms = *std::min_element(v->samples_ms.begin(), v->samples_ms.end());
  }
  return r;
}

}  // namespace rilab
