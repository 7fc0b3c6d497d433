// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#include "rilab/model.hpp"

#include <cmath>
#include <string>

#include "rilab/error.hpp"
#include "rilab/rng.hpp"

namespace rilab {

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv: return "Conv";
    case LayerKind::ReLU: return "ReLU";
    case LayerKind::ClippedReLU: return "ClippedReLU";
    case LayerKind::DepthToSpace: return "DepthToSpace";
    case LayerKind::AddAnchor: return "AddAnchor";
  }
  return "?";
}

LayerKind layer_kind_from_string(std::string_view name) {
  for (auto k : {LayerKind::Conv, LayerKind::ReLU, LayerKind::ClippedReLU, LayerKind::DepthToSpace,
                 LayerKind::AddAnchor}) {
    if (to_string(k) == name) return k;
  }
  throw ParseError("unknown layer kind '" + std::string(name) + "'");
}

LayerSpec LayerSpec::make_conv(ConvWeights w, bool residual) {
  LayerSpec l;
  l.kind = LayerKind::Conv;
  l.conv = std::move(w);
  l.residual = residual;
  return l;
}

LayerSpec LayerSpec::make_relu() { return LayerSpec{}; }

LayerSpec LayerSpec::make_clipped_relu(float lo, float hi) {
  LayerSpec l;
  l.kind = LayerKind::ClippedReLU;
  l.clip_lo = lo;
  l.clip_hi = hi;
  return l;
}

LayerSpec LayerSpec::make_depth_to_space(int block) {
  LayerSpec l;
  l.kind = LayerKind::DepthToSpace;
  l.block = block;
  return l;
}

LayerSpec LayerSpec::make_add_anchor(int factor) {
  LayerSpec l;
  l.kind = LayerKind::AddAnchor;
  l.block = factor;
  return l;
}

std::string_view to_string(Arch arch) {
  switch (arch) {
    case Arch::EspcnTiny: return "espcn_tiny";
    case Arch::FsrcnnTiny: return "fsrcnn_tiny";
    case Arch::AbpnTiny: return "abpn_tiny";
    case Arch::XcatTiny: return "xcat_tiny";
    case Arch::RfdnTiny: return "rfdn_tiny";
  }
  return "?";
}

std::vector<Arch> all_archs() {
  return {Arch::EspcnTiny, Arch::FsrcnnTiny, Arch::AbpnTiny, Arch::XcatTiny, Arch::RfdnTiny};
}

Arch arch_from_string(std::string_view name) {
  for (auto a : all_archs()) {
    if (to_string(a) == name) return a;
  }
  throw StructuralError("unknown architecture '" + std::string(name) + "'");
}

void ModelGraph::validate() const {
  if (scale <= 0) throw StructuralError(name + ": scale must be positive");
  if (layers.empty()) throw StructuralError(name + ": empty layer list");
  int channels = 3;
  int spatial = 1;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    const std::string where = name + " layer " + std::to_string(i) + " (" +
                              std::string(to_string(l.kind)) + "): ";
    switch (l.kind) {
      case LayerKind::Conv:
        try {
          l.conv.validate();
        } catch (const StructuralError& e) {
          throw StructuralError(where + e.what());
        }
        if (l.conv.in_channels != channels) {
          throw StructuralError(where + "expects " + std::to_string(l.conv.in_channels) +
                                " input channels, previous layer produces " +
                                std::to_string(channels));
        }
        if (l.residual && l.conv.in_channels != l.conv.out_channels) {
          throw StructuralError(where + "residual conv needs equal in/out channels");
        }
        channels = l.conv.out_channels;
        break;
      case LayerKind::ReLU:
        break;
      case LayerKind::ClippedReLU:
        if (!(l.clip_lo < l.clip_hi)) throw StructuralError(where + "clip bounds need lo < hi");
        break;
      case LayerKind::DepthToSpace:
        if (l.block <= 0 || channels % (l.block * l.block) != 0) {
          throw StructuralError(where + std::to_string(channels) +
                                " channels not divisible by block^2");
        }
        channels /= l.block * l.block;
        spatial *= l.block;
        break;
      case LayerKind::AddAnchor:
        if (spatial != 1 || l.block <= 0 || channels != 3 * l.block * l.block) {
          throw StructuralError(where + "anchor needs " + std::to_string(3 * l.block * l.block) +
                                " channels at input resolution");
        }
        break;
    }
  }
  if (channels != 3 || spatial != scale) {
    throw StructuralError(name + ": graph ends with " + std::to_string(channels) +
                          " channels at x" + std::to_string(spatial) + ", expected 3 at x" +
                          std::to_string(scale));
  }
  const auto& last = layers.back();
  const bool ends_clipped =
      last.kind == LayerKind::ClippedReLU && last.clip_lo == 0.0f && last.clip_hi == 255.0f;
  if (ends_clipped != clipped) {
    throw StructuralError(name + ": clipped flag disagrees with the final layer");
  }
}

namespace {

struct ConvShape {
  int k;
  int in;
  int out;
  int groups = 1;
  bool residual = false;
};

LayerSpec init_conv(const ConvShape& s, std::uint64_t seed, std::size_t layer_index) {
  ConvWeights w;
  w.kernel_h = w.kernel_w = s.k;
  w.in_channels = s.in;
  w.out_channels = s.out;
  w.groups = s.groups;
  w.weights.resize(w.weight_count());
  w.bias.assign(s.out, 0.0f);
  const double fan_in = static_cast<double>(s.k) * s.k * (s.in / s.groups);
  const double stddev = std::sqrt(2.0 / fan_in);
  Rng rng(Rng::derive(seed, layer_index));
  for (float& v : w.weights) v = static_cast<float>(stddev * rng.normal());
  return LayerSpec::make_conv(std::move(w), s.residual);
}

// Layer recipe: a conv shape, or a marker for a parameter-free layer.
struct Step {
  enum { Conv, Relu, Anchor, Shuffle } what;
  ConvShape shape{};
};

std::vector<Step> recipe(Arch arch) {
  auto conv = [](int k, int in, int out, int groups = 1, bool residual = false) {
    return Step{Step::Conv, ConvShape{k, in, out, groups, residual}};
  };
  const Step relu{Step::Relu};
  const Step anchor{Step::Anchor};
  const Step shuffle{Step::Shuffle};
  switch (arch) {
    case Arch::EspcnTiny:
      return {conv(3, 3, 16), relu, conv(3, 16, 16), relu, conv(3, 16, 27), shuffle};
    case Arch::FsrcnnTiny:
      // feature extraction, shrink, mapping, expand, pixel-shuffle head
      return {conv(5, 3, 16), relu, conv(1, 16, 8), relu, conv(3, 8, 8), relu,
              conv(1, 8, 16), relu, conv(3, 16, 27), shuffle};
    case Arch::AbpnTiny:
      return {conv(3, 3, 16),  relu, conv(3, 16, 16), relu,   conv(3, 16, 16),
              relu,            conv(3, 16, 27),     anchor,   shuffle};
    case Arch::XcatTiny:
      // grouped 3x3 followed by a 1x1 channel mix stands in for cross-concatenation
      return {conv(3, 3, 16),  relu, conv(3, 16, 16, 4), relu,   conv(1, 16, 16),
              relu,            conv(3, 16, 27),        anchor, shuffle};
    case Arch::RfdnTiny:
      // identity + conv branches (shallow residual blocks), then 1x1 fusion
      return {conv(3, 3, 16),  relu, conv(3, 16, 16, 1, true), relu, conv(3, 16, 16, 1, true),
              relu,            conv(1, 16, 16),               relu, conv(3, 16, 27),
              shuffle};
  }
  return {};
}

}  // namespace

ModelGraph build_model(Arch arch, bool clipped, std::uint64_t seed) {
  ModelGraph m;
  m.name = std::string(to_string(arch));
  m.scale = 3;
  m.seed = seed;
  m.clipped = clipped;
  for (const auto& step : recipe(arch)) {
    switch (step.what) {
      case Step::Conv: m.layers.push_back(init_conv(step.shape, seed, m.layers.size())); break;
      case Step::Relu: m.layers.push_back(LayerSpec::make_relu()); break;
      case Step::Anchor: m.layers.push_back(LayerSpec::make_add_anchor(m.scale)); break;
      case Step::Shuffle: m.layers.push_back(LayerSpec::make_depth_to_space(m.scale)); break;
    }
  }
  // Residual heads start near the anchor; a full-gain head swamps it and kills the branch.
  const bool anchored = std::any_of(m.layers.begin(), m.layers.end(),
                                    [](const LayerSpec& l) { return l.kind == LayerKind::AddAnchor; });
  if (anchored) {
    for (auto it = m.layers.rbegin(); it != m.layers.rend(); ++it) {
      if (it->kind != LayerKind::Conv) continue;
      for (float& v : it->conv.weights) v *= 0.1f;
      break;
    }
  }
  if (clipped) m.layers.push_back(LayerSpec::make_clipped_relu(0.0f, 255.0f));
  m.validate();
  return m;
}

ModelGraph with_clip(const ModelGraph& m, bool clipped) {
  ModelGraph out = m;
  if (m.clipped == clipped) return out;
  if (clipped) {
    out.layers.push_back(LayerSpec::make_clipped_relu(0.0f, 255.0f));
  } else {
    out.layers.pop_back();
  }
  out.clipped = clipped;
  out.validate();
  return out;
}

std::vector<std::string> structural_diff(const ModelGraph& a, const ModelGraph& b) {
  std::vector<std::string> diff;
  if (a.name != b.name) diff.push_back("name: " + a.name + " vs " + b.name);
  if (a.scale != b.scale) diff.push_back("scale differs");
  if (a.clipped != b.clipped) diff.push_back("clipped flag differs");
  const std::size_t n = std::max(a.layers.size(), b.layers.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= a.layers.size()) {
      diff.push_back("layer " + std::to_string(i) + ": only in second (" +
                     std::string(to_string(b.layers[i].kind)) + ")");
    } else if (i >= b.layers.size()) {
      diff.push_back("layer " + std::to_string(i) + ": only in first (" +
                     std::string(to_string(a.layers[i].kind)) + ")");
    } else if (!(a.layers[i] == b.layers[i])) {
      diff.push_back("layer " + std::to_string(i) + ": differs");
    }
  }
  return diff;
}

std::string tensor_name(const ModelGraph& m, std::size_t index) {
  if (index == 0) return "input";
  return std::to_string(index - 1) + ":" + std::string(to_string(m.layers.at(index - 1).kind));
}

namespace {

Tensor apply_layer(const LayerSpec& l, const Tensor& x, const Tensor& input) {
  switch (l.kind) {
    case LayerKind::Conv: {
      Tensor y = conv2d(x, l.conv, Padding::Zero);
      return l.residual ? add(y, x) : y;
    }
    case LayerKind::ReLU: return relu(x);
    case LayerKind::ClippedReLU: return clipped_relu(x, l.clip_lo, l.clip_hi);
    case LayerKind::DepthToSpace: return depth_to_space(x, l.block);
    case LayerKind::AddAnchor: return add(x, nearest_upsample_replicate(input, l.block));
  }
  return x;
}

void check_input(const Tensor& img) {
  if (img.channels() != 3) {
    throw StructuralError("model input must have 3 channels, got " +
                          std::to_string(img.channels()));
  }
}

}  // namespace

Tensor forward(const ModelGraph& m, const Tensor& img) {
  check_input(img);
  Tensor x = img;
  for (const auto& l : m.layers) x = apply_layer(l, x, img);
  return x;
}

std::vector<Tensor> forward_trace(const ModelGraph& m, const Tensor& img) {
  check_input(img);
  std::vector<Tensor> trace;
  trace.reserve(m.layers.size() + 1);
  trace.push_back(img);
  for (const auto& l : m.layers) trace.push_back(apply_layer(l, trace.back(), img));
  return trace;
}

}  // namespace rilab
