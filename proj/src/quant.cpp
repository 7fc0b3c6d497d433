// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#include "rilab/quant.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "model_json.hpp"
#include "rilab/error.hpp"
#include "rilab/fileio.hpp"
#include "rilab/image.hpp"
#include "rilab/ops.hpp"

namespace rilab {

long long QuantParams::quantize(double x) const {
  const double q = std::round(x / scale + zero_point);
  return static_cast<long long>(std::clamp(q, static_cast<double>(qmin), static_cast<double>(qmax)));
}

QuantParams derive_qparams(double min, double max, QuantKind kind) {
  if (!(min <= max)) {
    throw StructuralError("derive_qparams: min " + std::to_string(min) + " > max " +
                          std::to_string(max));
  }
  QuantParams qp;
  if (kind == QuantKind::WeightChannel) {
    qp.qmin = -127;
    qp.qmax = 127;
    qp.zero_point = 0;
    const double amax = std::max(std::abs(min), std::abs(max));
    qp.scale = amax > 0.0 ? amax / 127.0 : 1.0;
    return qp;
  }
  qp.qmin = 0;
  qp.qmax = 255;
  const double lo = std::min(min, 0.0);
  const double hi = std::max(max, 0.0);
  if (hi == lo) {
    qp.scale = 1.0;
    qp.zero_point = 0;
    return qp;
  }
  qp.scale = (hi - lo) / 255.0;
  qp.zero_point = static_cast<int>(std::clamp(std::round(-lo / qp.scale), 0.0, 255.0));
  return qp;
}

double fake_quant(double x, const QuantParams& qp) { return qp.dequantize(qp.quantize(x)); }

Tensor fake_quant(const Tensor& t, const QuantParams& qp) {
  Tensor out = t;
  const double inv = 1.0 / qp.scale;
  const double lo = qp.qmin;
  const double hi = qp.qmax;
  for (float& v : out.values()) {
    const double q = std::clamp(std::round(v * inv + qp.zero_point), lo, hi);
    v = static_cast<float>(qp.scale * (q - qp.zero_point));
  }
  return out;
}

void CalibrationRecord::merge(const CalibrationRecord& other) {
  if (names != other.names) {
    throw CalibrationError("cannot merge calibration records of different graphs");
  }
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    ranges[i].min = std::min(ranges[i].min, other.ranges[i].min);
    ranges[i].max = std::max(ranges[i].max, other.ranges[i].max);
  }
  images += other.images;
}

CalibrationRecord merge(CalibrationRecord a, const CalibrationRecord& b) {
  a.merge(b);
  return a;
}

CalibrationRecord calibrate(const ModelGraph& m, std::span<const Tensor> rd) {
  if (rd.empty()) throw CalibrationError("calibrate: representative dataset is empty");
  CalibrationRecord rec;
  rec.model = m.name;
  for (std::size_t i = 0; i < m.tensor_count(); ++i) rec.names.push_back(tensor_name(m, i));
  rec.ranges.assign(m.tensor_count(), Range{std::numeric_limits<double>::infinity(),
                                            -std::numeric_limits<double>::infinity()});
  for (const auto& img : rd) {
    const auto trace = forward_trace(m, img);
    for (std::size_t i = 0; i < trace.size(); ++i) {
      rec.ranges[i].min = std::min<double>(rec.ranges[i].min, trace[i].min_value());
      rec.ranges[i].max = std::max<double>(rec.ranges[i].max, trace[i].max_value());
    }
    ++rec.images;
  }
  return rec;
}

const QuantizedConv& QuantizedModel::conv_for_layer(std::size_t layer) const {
  for (const auto& c : convs) {
    if (c.layer == layer) return c;
  }
  throw StructuralError("no quantized conv for layer " + std::to_string(layer));
}

namespace {

void build_effective(QuantizedConv& qc, const ConvWeights& shape, double input_scale) {
  qc.effective = shape;
  const int oc_total = shape.out_channels;
  for (std::size_t i = 0; i < qc.weights.size(); ++i) {
    const int oc = static_cast<int>(i % oc_total);
    qc.effective.weights[i] = static_cast<float>(qc.weights[i] * qc.weight_params[oc].scale);
  }
  for (int oc = 0; oc < oc_total; ++oc) {
    qc.effective.bias[oc] =
        static_cast<float>(static_cast<double>(qc.bias[oc]) * input_scale * qc.weight_params[oc].scale);
  }
}

}  // namespace

QuantizedModel quantize_model(const ModelGraph& m, const CalibrationRecord& cal) {
  m.validate();
  for (std::size_t i = 0; i < m.tensor_count(); ++i) {
    const auto name = tensor_name(m, i);
    if (i >= cal.names.size() || cal.names[i] != name) {
      throw CalibrationError("calibration record does not cover tensor '" + name + "' of " +
                             m.name);
    }
    if (!(cal.ranges[i].min <= cal.ranges[i].max)) {
      throw CalibrationError("calibration range for '" + name + "' is empty");
    }
  }
  if (cal.names.size() != m.tensor_count()) {
    throw CalibrationError("calibration record has " + std::to_string(cal.names.size()) +
                           " tensors, model has " + std::to_string(m.tensor_count()));
  }

  QuantizedModel qm;
  qm.source = m;
  for (const auto& r : cal.ranges) {
    qm.activations.push_back(derive_qparams(r.min, r.max, QuantKind::Activation));
  }
  for (std::size_t li = 0; li < m.layers.size(); ++li) {
    const auto& l = m.layers[li];
    if (l.kind != LayerKind::Conv) continue;
    const auto& w = l.conv;
    QuantizedConv qc;
    qc.layer = li;
    const int oc_total = w.out_channels;
    std::vector<double> amax(oc_total, 0.0);
    for (std::size_t i = 0; i < w.weights.size(); ++i) {
      auto& a = amax[i % oc_total];
      a = std::max(a, std::abs(static_cast<double>(w.weights[i])));
    }
    for (int oc = 0; oc < oc_total; ++oc) {
      qc.weight_params.push_back(derive_qparams(-amax[oc], amax[oc], QuantKind::WeightChannel));
    }
    qc.weights.resize(w.weights.size());
    for (std::size_t i = 0; i < w.weights.size(); ++i) {
      qc.weights[i] = static_cast<std::int8_t>(qc.weight_params[i % oc_total].quantize(w.weights[i]));
    }
    const double s_in = qm.activations[li].scale;
    for (int oc = 0; oc < oc_total; ++oc) {
      const double q = std::round(w.bias[oc] / (s_in * qc.weight_params[oc].scale));
      const double lim = std::numeric_limits<std::int32_t>::max();
      qc.bias.push_back(static_cast<std::int32_t>(std::clamp(q, -lim, lim)));
    }
    build_effective(qc, w, s_in);
    qm.convs.push_back(std::move(qc));
  }
  return qm;
}

Tensor int8_forward_raw(const QuantizedModel& qm, const Tensor& img) {
  const auto& m = qm.source;
  if (img.channels() != 3) throw StructuralError("int8_forward: input must have 3 channels");
  const Tensor input = fake_quant(img, qm.activations[0]);
  Tensor x = input;
  std::size_t conv_index = 0;
  for (std::size_t li = 0; li < m.layers.size(); ++li) {
    const auto& l = m.layers[li];
    Tensor y;
    switch (l.kind) {
      case LayerKind::Conv: {
        const auto& qc = qm.convs.at(conv_index++);
        y = conv2d(x, qc.effective, Padding::Zero);
        if (l.residual) y = add(y, x);
        break;
      }
      case LayerKind::ReLU: y = relu(x); break;
      case LayerKind::ClippedReLU: y = clipped_relu(x, l.clip_lo, l.clip_hi); break;
      case LayerKind::DepthToSpace: y = depth_to_space(x, l.block); break;
      case LayerKind::AddAnchor: y = add(x, nearest_upsample_replicate(input, l.block)); break;
    }
    x = fake_quant(y, qm.activations[li + 1]);
  }
  return x;
}

Tensor int8_forward(const QuantizedModel& qm, const Tensor& img) {
  return round_clamp_u8(int8_forward_raw(qm, img));
}

std::size_t elementwise_op_count(const QuantizedModel& qm, int height, int width) {
  std::size_t pixels = static_cast<std::size_t>(height) * width;
  int channels = 3;
  std::size_t ops = pixels * channels;  // input requantization
  for (const auto& l : qm.source.layers) {
    switch (l.kind) {
      case LayerKind::Conv:
        channels = l.conv.out_channels;
        if (l.residual) ops += pixels * channels;
        break;
      case LayerKind::ReLU:
      case LayerKind::ClippedReLU:
      case LayerKind::AddAnchor:
        ops += pixels * channels;
        break;
      case LayerKind::DepthToSpace:
        pixels *= static_cast<std::size_t>(l.block) * l.block;
        channels /= l.block * l.block;
        break;
    }
    ops += pixels * channels;  // output requantization
  }
  return ops;
}

namespace {

nlohmann::json qparams_json(const QuantParams& qp) {
  return {{"scale", qp.scale}, {"zero_point", qp.zero_point}, {"qmin", qp.qmin}, {"qmax", qp.qmax}};
}

QuantParams qparams_from(const nlohmann::json& j) {
  QuantParams qp;
  qp.scale = j.at("scale").get<double>();
  qp.zero_point = j.at("zero_point").get<int>();
  qp.qmin = j.at("qmin").get<int>();
  qp.qmax = j.at("qmax").get<int>();
  if (!(qp.scale > 0.0) || qp.qmin > qp.zero_point || qp.zero_point > qp.qmax) {
    throw ParseError("invalid quantization parameters");
  }
  return qp;
}

std::filesystem::path sibling(const std::filesystem::path& manifest, const char* suffix) {
  auto p = manifest;
  p.replace_extension();
  p += suffix;
  return p;
}

}  // namespace

void save_quantized(const QuantizedModel& qm, const std::filesystem::path& manifest_path) {
  nlohmann::json j = detail::graph_header_to_json(qm.source);
  j["format"] = "rilab.qmodel";
  j["schema_version"] = 1;
  auto acts = nlohmann::json::array();
  for (std::size_t i = 0; i < qm.activations.size(); ++i) {
    auto e = qparams_json(qm.activations[i]);
    e["tensor"] = tensor_name(qm.source, i);
    acts.push_back(std::move(e));
  }
  j["activations"] = std::move(acts);

  std::vector<std::uint8_t> wblob;
  std::vector<std::uint8_t> bblob;
  auto convs = nlohmann::json::array();
  for (const auto& qc : qm.convs) {
    nlohmann::json e;
    e["layer"] = qc.layer;
    auto wp = nlohmann::json::array();
    for (const auto& p : qc.weight_params) wp.push_back(qparams_json(p));
    e["weight_params"] = std::move(wp);
    e["weights_offset"] = wblob.size();
    e["weights_count"] = qc.weights.size();
    for (auto v : qc.weights) wblob.push_back(static_cast<std::uint8_t>(v));
    e["bias_offset"] = bblob.size();
    e["bias_count"] = qc.bias.size();
    for (auto v : qc.bias) {
      const auto u = std::bit_cast<std::uint32_t>(v);
      for (int b = 0; b < 4; ++b) bblob.push_back(static_cast<std::uint8_t>(u >> (8 * b)));
    }
    convs.push_back(std::move(e));
  }
  j["convs"] = std::move(convs);
  const auto wpath = sibling(manifest_path, ".int8.bin");
  const auto bpath = sibling(manifest_path, ".int32.bin");
  j["weights_blob"] = wpath.filename().string();
  j["weights_blob_bytes"] = wblob.size();
  j["bias_blob"] = bpath.filename().string();
  j["bias_blob_bytes"] = bblob.size();
  j["byte_order"] = "little";
  write_file_atomic(wpath, wblob);
  write_file_atomic(bpath, bblob);
  write_file_atomic(manifest_path, j.dump(2) + "\n");
}

QuantizedModel load_quantized(const std::filesystem::path& manifest_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_text(manifest_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("malformed quantized manifest '" + manifest_path.string() + "': " + e.what(),
                     static_cast<long long>(e.byte));
  }
  if (j.value("format", "") != "rilab.qmodel") {
    throw ParseError("'" + manifest_path.string() + "' is not a rilab.qmodel manifest");
  }
  QuantizedModel qm;
  qm.source = detail::graph_from_json(j);
  try {
    for (const auto& e : j.at("activations")) qm.activations.push_back(qparams_from(e));
    if (qm.activations.size() != qm.source.tensor_count()) {
      throw ParseError("quantized manifest lists " + std::to_string(qm.activations.size()) +
                       " activation params for " + std::to_string(qm.source.tensor_count()) +
                       " tensors");
    }
    auto load_blob = [&](const char* name_key, const char* bytes_key) {
      const auto path = manifest_path.parent_path() / j.at(name_key).get<std::string>();
      if (!std::filesystem::exists(path)) {
        throw ParseError("quantized manifest references missing blob '" + path.string() + "'");
      }
      auto bytes = read_file_bytes(path);
      const auto want = j.at(bytes_key).get<std::size_t>();
      if (bytes.size() != want) {
        throw ParseError("blob '" + path.string() + "' holds " + std::to_string(bytes.size()) +
                         " bytes, expected " + std::to_string(want));
      }
      return bytes;
    };
    const auto wblob = load_blob("weights_blob", "weights_blob_bytes");
    const auto bblob = load_blob("bias_blob", "bias_blob_bytes");
    for (const auto& e : j.at("convs")) {
      QuantizedConv qc;
      qc.layer = e.at("layer").get<std::size_t>();
      if (qc.layer >= qm.source.layers.size() ||
          qm.source.layers[qc.layer].kind != LayerKind::Conv) {
        throw ParseError("quantized conv entry points at non-conv layer " +
                             std::to_string(qc.layer),
                         static_cast<long long>(qc.layer));
      }
      const auto& shape = qm.source.layers[qc.layer].conv;
      for (const auto& p : e.at("weight_params")) qc.weight_params.push_back(qparams_from(p));
      const auto woff = e.at("weights_offset").get<std::size_t>();
      const auto wcount = e.at("weights_count").get<std::size_t>();
      const auto boff = e.at("bias_offset").get<std::size_t>();
      const auto bcount = e.at("bias_count").get<std::size_t>();
      if (wcount != shape.weight_count() || bcount != static_cast<std::size_t>(shape.out_channels) ||
          qc.weight_params.size() != bcount || woff + wcount > wblob.size() ||
          boff + 4 * bcount > bblob.size()) {
        throw ParseError("quantized conv for layer " + std::to_string(qc.layer) +
                             " has inconsistent sizes",
                         static_cast<long long>(qc.layer));
      }
      for (std::size_t i = 0; i < wcount; ++i) {
        qc.weights.push_back(static_cast<std::int8_t>(wblob[woff + i]));
      }
      for (std::size_t i = 0; i < bcount; ++i) {
        std::uint32_t u = 0;
        for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(bblob[boff + 4 * i + b]) << (8 * b);
        qc.bias.push_back(std::bit_cast<std::int32_t>(u));
      }
      build_effective(qc, shape, qm.activations[qc.layer].scale);
      qm.convs.push_back(std::move(qc));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("quantized manifest: ") + e.what());
  }
  // Source weights are not stored; keep the dequantized ones so the graph is usable.
  for (const auto& qc : qm.convs) qm.source.layers[qc.layer].conv = qc.effective;
  return qm;
}

void save_calibration(const CalibrationRecord& cal, const std::filesystem::path& path) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["model"] = cal.model;
  j["images"] = cal.images;
  auto entries = nlohmann::json::array();
  for (std::size_t i = 0; i < cal.names.size(); ++i) {
    entries.push_back({{"tensor", cal.names[i]}, {"min", cal.ranges[i].min}, {"max", cal.ranges[i].max}});
  }
  j["ranges"] = std::move(entries);
  write_file_atomic(path, j.dump(2) + "\n");
}

CalibrationRecord load_calibration(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("malformed calibration record '" + path.string() + "': " + e.what(),
                     static_cast<long long>(e.byte));
  }
  CalibrationRecord cal;
  try {
    cal.model = j.at("model").get<std::string>();
    cal.images = j.at("images").get<std::size_t>();
    for (const auto& e : j.at("ranges")) {
      cal.names.push_back(e.at("tensor").get<std::string>());
      cal.ranges.push_back({e.at("min").get<double>(), e.at("max").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("calibration record '" + path.string() + "': " + e.what());
  }
  return cal;
}

}  // namespace rilab
