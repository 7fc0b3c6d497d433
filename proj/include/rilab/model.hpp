// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rilab/ops.hpp"
#include "rilab/tensor.hpp"

namespace rilab {

enum class LayerKind { Conv, ReLU, ClippedReLU, DepthToSpace, AddAnchor };

std::string_view to_string(LayerKind kind);
LayerKind layer_kind_from_string(std::string_view name);

struct LayerSpec {
  LayerKind kind = LayerKind::ReLU;
  ConvWeights conv;       // Conv
  bool residual = false;  // Conv: output = conv(x) + x, requires in == out channels
  float clip_lo = 0.0f;   // ClippedReLU
  float clip_hi = 255.0f;
  int block = 0;          // DepthToSpace block size, AddAnchor replication factor

  static LayerSpec make_conv(ConvWeights w, bool residual = false);
  static LayerSpec make_relu();
  static LayerSpec make_clipped_relu(float lo = 0.0f, float hi = 255.0f);
  static LayerSpec make_depth_to_space(int block);
  static LayerSpec make_add_anchor(int factor);

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

enum class Arch { EspcnTiny, FsrcnnTiny, AbpnTiny, XcatTiny, RfdnTiny };

std::string_view to_string(Arch arch);
Arch arch_from_string(std::string_view name);
std::vector<Arch> all_archs();

struct ModelGraph {
  std::string name;
  int scale = 3;
  std::uint64_t seed = 0;
  bool clipped = false;
  std::vector<LayerSpec> layers;

  // Checks the chain: channel counts line up, 3 * scale^2 channels reach the
  // final DepthToSpace, 3 channels at scale x leave the graph, and the final
  // ClippedReLU(0, 255) is present exactly when `clipped` is set.
  void validate() const;

  // Number of recorded tensors: the network input plus one per layer output.
  std::size_t tensor_count() const noexcept { return layers.size() + 1; }

  friend bool operator==(const ModelGraph&, const ModelGraph&) = default;
};

// Desk-scale stand-ins; weights drawn He-normal (std = sqrt(2 / fan_in)) from
// Rng(Rng::derive(seed, layer_index)), biases zero. The clip flag only appends
// the final ClippedReLU, so equal seeds give equal weights.
ModelGraph build_model(Arch arch, bool clipped, std::uint64_t seed);

// Same weights, with the trailing ClippedReLU(0, 255) added or removed.
ModelGraph with_clip(const ModelGraph& m, bool clipped);

// Human-readable differences between two graphs, one entry per differing layer
// position (or header field).
std::vector<std::string> structural_diff(const ModelGraph& a, const ModelGraph& b);

// Name of recorded tensor `index`: "input" or "<layer>:<kind>".
std::string tensor_name(const ModelGraph& m, std::size_t index);

Tensor forward(const ModelGraph& m, const Tensor& img);
// All recorded tensors: [input, layer 0 output, ..., last layer output].
std::vector<Tensor> forward_trace(const ModelGraph& m, const Tensor& img);

// Manifest at `manifest_path` (JSON) plus a little-endian float32 blob next to
// it with the same stem and extension ".bin".
void save_model(const ModelGraph& m, const std::filesystem::path& manifest_path);
ModelGraph load_model(const std::filesystem::path& manifest_path);

}  // namespace rilab
