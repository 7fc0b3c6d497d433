// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

// Internal: layer-list (de)serialization shared by the FP32 and quantized
// model manifests.
#pragma once

#include <json.hpp>

#include "rilab/model.hpp"

namespace rilab::detail {

// Header fields and per-layer parameters, without weight storage.
nlohmann::json graph_header_to_json(const ModelGraph& m);

// Rebuilds the graph skeleton from a manifest. Conv layers get correctly sized
// zero weights; the caller fills them from its blob. Errors carry the layer index.
ModelGraph graph_from_json(const nlohmann::json& j);

}  // namespace rilab::detail
