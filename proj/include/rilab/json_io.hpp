// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

// JSON views of the report types. Every top-level document carries
// "schema_version".
#pragma once

#include <filesystem>

#include <json.hpp>

#include "rilab/experiment.hpp"
#include "rilab/metrics.hpp"
#include "rilab/ri.hpp"
#include "rilab/train.hpp"

namespace rilab {

nlohmann::json to_json(const Thresholds& t);
// Missing keys keep their defaults; unknown keys are rejected with ParseError.
Thresholds thresholds_from_json(const nlohmann::json& j);
Thresholds load_thresholds(const std::filesystem::path& path);

// Outlier pixels are listed as [row, col] pairs at output resolution.
nlohmann::json to_json(const RIReport& r);
nlohmann::json to_json(const AugmentationResult& a);
nlohmann::json to_json(const EvalResult& e);
nlohmann::json to_json(const EpochLog& e);
nlohmann::json to_json(const BenchResult& b);

}  // namespace rilab
