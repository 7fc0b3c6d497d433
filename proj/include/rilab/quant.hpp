// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rilab/model.hpp"
#include "rilab/tensor.hpp"

namespace rilab {

// Affine map x ~ scale * (q - zero_point), q in [qmin, qmax].
struct QuantParams {
  double scale = 1.0;
  int zero_point = 0;
  int qmin = 0;
  int qmax = 255;

  long long quantize(double x) const;  // round half away from zero, then clamp
  double dequantize(long long q) const { return scale * static_cast<double>(q - zero_point); }
  double lowest() const { return dequantize(qmin); }
  double highest() const { return dequantize(qmax); }

  friend bool operator==(const QuantParams&, const QuantParams&) = default;
};

enum class QuantKind {
  Activation,     // uint8, asymmetric, range widened to contain 0
  WeightChannel,  // int8 in [-127, 127], symmetric, zero_point 0
};

// Activation: [lo, hi] = [min(min, 0), max(max, 0)], scale = (hi - lo) / 255,
//             zero_point = clamp(round(-lo / scale), 0, 255).
// Weight:     scale = max(|min|, |max|) / 127, zero_point = 0.
// A zero-width range at 0 yields scale 1. Throws StructuralError if min > max.
QuantParams derive_qparams(double min, double max, QuantKind kind);

// scale * (clamp(round(x / scale + zero_point), qmin, qmax) - zero_point)
double fake_quant(double x, const QuantParams& qp);
Tensor fake_quant(const Tensor& t, const QuantParams& qp);

struct Range {
  double min = 0.0;
  double max = 0.0;
  friend bool operator==(const Range&, const Range&) = default;
};

// Running min/max of every recorded tensor (see forward_trace) over a
// representative dataset. Ranges are stored as observed; zero-widening happens
// in derive_qparams.
struct CalibrationRecord {
  std::string model;
  std::vector<std::string> names;
  std::vector<Range> ranges;
  std::size_t images = 0;

  // Elementwise min/max union with a record of the same model.
  void merge(const CalibrationRecord& other);

  friend bool operator==(const CalibrationRecord&, const CalibrationRecord&) = default;
};

CalibrationRecord calibrate(const ModelGraph& m, std::span<const Tensor> rd);
CalibrationRecord merge(CalibrationRecord a, const CalibrationRecord& b);

struct QuantizedConv {
  std::size_t layer = 0;
  std::vector<QuantParams> weight_params;  // one per output channel
  std::vector<std::int8_t> weights;        // same layout as ConvWeights::weights
  std::vector<std::int32_t> bias;          // at scale input_scale * weight_scale[oc]
  ConvWeights effective;                   // dequantized weights and bias used for execution
};

struct QuantizedModel {
  ModelGraph source;
  std::vector<QuantParams> activations;  // one per recorded tensor
  std::vector<QuantizedConv> convs;      // one per Conv layer, in layer order

  const QuantizedConv& conv_for_layer(std::size_t layer) const;
};

// Per-output-channel symmetric int8 weights, per-tensor uint8 activations,
// int32 bias. Throws CalibrationError naming the first uncovered tensor.
QuantizedModel quantize_model(const ModelGraph& m, const CalibrationRecord& cal);

// Fake-quantized execution: the input and every layer output pass through
// fake_quant with their activation params; convs run with the dequantized
// weights and bias. Returns the last activation before image emission.
Tensor int8_forward_raw(const QuantizedModel& qm, const Tensor& img);
// int8_forward_raw rounded and clamped to [0, 255].
Tensor int8_forward(const QuantizedModel& qm, const Tensor& img);

// Elementwise work of one int8_forward on an h x w input: every requantization
// (one per recorded tensor element) plus every ReLU / clip / add element.
std::size_t elementwise_op_count(const QuantizedModel& qm, int height, int width);

// Manifest JSON at `manifest_path` plus "<stem>.int8.bin" (weights, int8) and
// "<stem>.int32.bin" (bias, little-endian int32) beside it.
void save_quantized(const QuantizedModel& qm, const std::filesystem::path& manifest_path);
QuantizedModel load_quantized(const std::filesystem::path& manifest_path);

void save_calibration(const CalibrationRecord& cal, const std::filesystem::path& path);
// Throws ParseError (byte offset for malformed JSON).
CalibrationRecord load_calibration(const std::filesystem::path& path);

}  // namespace rilab
