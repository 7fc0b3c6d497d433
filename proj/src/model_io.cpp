// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#include <string>

#include "model_json.hpp"
#include "rilab/error.hpp"
#include "rilab/fileio.hpp"
#include "rilab/model.hpp"

namespace rilab {

namespace detail {

nlohmann::json graph_header_to_json(const ModelGraph& m) {
  nlohmann::json j;
  j["name"] = m.name;
  j["scale"] = m.scale;
  j["seed"] = m.seed;
  j["clipped"] = m.clipped;
  auto layers = nlohmann::json::array();
  for (const auto& l : m.layers) {
    nlohmann::json e;
    e["kind"] = std::string(to_string(l.kind));
    switch (l.kind) {
      case LayerKind::Conv:
        e["kernel_h"] = l.conv.kernel_h;
        e["kernel_w"] = l.conv.kernel_w;
        e["in_channels"] = l.conv.in_channels;
        e["out_channels"] = l.conv.out_channels;
        e["groups"] = l.conv.groups;
        e["residual"] = l.residual;
        break;
      case LayerKind::ClippedReLU:
        e["lo"] = l.clip_lo;
        e["hi"] = l.clip_hi;
        break;
      case LayerKind::DepthToSpace:
      case LayerKind::AddAnchor:
        e["block"] = l.block;
        break;
      case LayerKind::ReLU:
        break;
    }
    layers.push_back(std::move(e));
  }
  j["layers"] = std::move(layers);
  return j;
}

ModelGraph graph_from_json(const nlohmann::json& j) {
  ModelGraph m;
  try {
    m.name = j.at("name").get<std::string>();
    m.scale = j.at("scale").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.clipped = j.at("clipped").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model manifest header: ") + e.what());
  }
  const auto& layers = j.at("layers");
  if (!layers.is_array()) throw ParseError("model manifest: 'layers' is not an array");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& e = layers[i];
    const auto idx = static_cast<long long>(i);
    try {
      LayerSpec l;
      try {
        l.kind = layer_kind_from_string(e.at("kind").get<std::string>());
      } catch (const ParseError& pe) {
        throw ParseError("layer " + std::to_string(i) + ": " + pe.what(), idx);
      }
      switch (l.kind) {
        case LayerKind::Conv: {
          ConvWeights w;
          w.kernel_h = e.at("kernel_h").get<int>();
          w.kernel_w = e.at("kernel_w").get<int>();
          w.in_channels = e.at("in_channels").get<int>();
          w.out_channels = e.at("out_channels").get<int>();
          w.groups = e.value("groups", 1);
          if (w.kernel_h <= 0 || w.kernel_w <= 0 || w.in_channels <= 0 || w.out_channels <= 0 ||
              w.groups <= 0 || w.in_channels % w.groups != 0 || w.out_channels % w.groups != 0) {
            throw ParseError("layer " + std::to_string(i) + ": invalid conv shape", idx);
          }
          w.weights.assign(w.weight_count(), 0.0f);
          w.bias.assign(w.out_channels, 0.0f);
          l.conv = std::move(w);
          l.residual = e.value("residual", false);
          break;
        }
        case LayerKind::ClippedReLU:
          l.clip_lo = e.at("lo").get<float>();
          l.clip_hi = e.at("hi").get<float>();
          break;
        case LayerKind::DepthToSpace:
        case LayerKind::AddAnchor:
          l.block = e.at("block").get<int>();
          break;
        case LayerKind::ReLU:
          break;
      }
      m.layers.push_back(std::move(l));
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError("layer " + std::to_string(i) + ": " + ex.what(), idx);
    }
  }
  try {
    m.validate();
  } catch (const StructuralError& e) {
    throw ParseError(std::string("model manifest describes an invalid graph: ") + e.what());
  }
  return m;
}

}  // namespace detail

namespace {

std::filesystem::path blob_path_for(const std::filesystem::path& manifest) {
  auto p = manifest;
  p.replace_extension(".bin");
  return p;
}

}  // namespace

void save_model(const ModelGraph& m, const std::filesystem::path& manifest_path) {
  m.validate();
  const auto blob_path = blob_path_for(manifest_path);
  std::vector<std::uint8_t> blob;
  nlohmann::json j = detail::graph_header_to_json(m);
  j["format"] = "rilab.model";
  j["schema_version"] = 1;
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const auto& l = m.layers[i];
    if (l.kind != LayerKind::Conv) continue;
    auto& e = j["layers"][i];
    e["weights_offset"] = blob.size();
    e["weights_count"] = l.conv.weights.size();
    append_f32_le(blob, l.conv.weights);
    e["bias_offset"] = blob.size();
    e["bias_count"] = l.conv.bias.size();
    append_f32_le(blob, l.conv.bias);
  }
  j["blob"] = blob_path.filename().string();
  j["blob_bytes"] = blob.size();
  j["dtype"] = "float32";
  j["byte_order"] = "little";
  write_file_atomic(blob_path, blob);
  write_file_atomic(manifest_path, j.dump(2) + "\n");
}

ModelGraph load_model(const std::filesystem::path& manifest_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_text(manifest_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("malformed model manifest '" + manifest_path.string() + "': " + e.what(),
                     static_cast<long long>(e.byte));
  }
  if (j.value("format", "") != "rilab.model") {
    throw ParseError("'" + manifest_path.string() + "' is not a rilab.model manifest");
  }
  ModelGraph m = detail::graph_from_json(j);

  std::string blob_name;
  std::size_t expected = 0;
  try {
    blob_name = j.at("blob").get<std::string>();
    expected = j.at("blob_bytes").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model manifest: ") + e.what());
  }
  const auto blob_path = manifest_path.parent_path() / blob_name;
  if (!std::filesystem::exists(blob_path)) {
    throw ParseError("model manifest references missing blob '" + blob_path.string() + "'");
  }
  const auto blob = read_file_bytes(blob_path);
  if (blob.size() != expected) {
    throw ParseError("weight blob '" + blob_path.string() + "' holds " +
                     std::to_string(blob.size()) + " bytes, expected " +
                     std::to_string(expected));
  }
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    auto& l = m.layers[i];
    if (l.kind != LayerKind::Conv) continue;
    const auto& e = j["layers"][i];
    const auto idx = static_cast<long long>(i);
    auto read_span = [&](const char* off_key, const char* count_key, std::size_t want) {
      std::size_t off = 0, count = 0;
      try {
        off = e.at(off_key).get<std::size_t>();
        count = e.at(count_key).get<std::size_t>();
      } catch (const nlohmann::json::exception& ex) {
        throw ParseError("layer " + std::to_string(i) + ": " + ex.what(), idx);
      }
      if (count != want) {
        throw ParseError("layer " + std::to_string(i) + ": " + count_key + " is " +
                             std::to_string(count) + ", shape implies " + std::to_string(want),
                         idx);
      }
      if (off + 4 * count > blob.size()) {
        throw ParseError("layer " + std::to_string(i) + ": blob range [" + std::to_string(off) +
                             ", " + std::to_string(off + 4 * count) + ") exceeds " +
                             std::to_string(blob.size()) + " bytes",
                         idx);
      }
      return read_f32_le(std::span(blob).subspan(off, 4 * count));
    };
    l.conv.weights = read_span("weights_offset", "weights_count", l.conv.weight_count());
    l.conv.bias = read_span("bias_offset", "bias_count", static_cast<std::size_t>(l.conv.out_channels));
  }
  return m;
}

}  // namespace rilab
