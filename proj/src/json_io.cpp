// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#include "rilab/json_io.hpp"

#include "rilab/error.hpp"
#include "rilab/fileio.hpp"

namespace rilab {

nlohmann::json to_json(const Thresholds& t) {
  return {{"minmax_diff_max", t.minmax_diff_max},
          {"deviation_max", t.deviation_max},
          {"outlier_count_max", t.outlier_count_max},
          {"shift_max", t.shift_max},
          {"libb_lipb_iter_max", t.iter_max},
          {"strict_zero", t.strict_zero}};
}

Thresholds thresholds_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("thresholds must be a JSON object");
  Thresholds t;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "minmax_diff_max") t.minmax_diff_max = value.get<double>();
      else if (key == "deviation_max") t.deviation_max = value.get<double>();
      else if (key == "outlier_count_max") t.outlier_count_max = value.get<int>();
      else if (key == "shift_max") t.shift_max = value.get<double>();
      else if (key == "libb_lipb_iter_max") t.iter_max = value.get<int>();
      else if (key == "strict_zero") t.strict_zero = value.get<bool>();
      else if (key == "schema_version") continue;
      else throw ParseError("unknown threshold '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("thresholds: ") + e.what());
  }
  if (t.minmax_diff_max < 0 || t.deviation_max < 0 || t.outlier_count_max < 0 ||
      t.shift_max < 0 || t.iter_max < 0) {
    throw ParseError("thresholds must be nonnegative");
  }
  return t;
}

Thresholds load_thresholds(const std::filesystem::path& path) {
  try {
    return thresholds_from_json(nlohmann::json::parse(read_file_text(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("malformed thresholds file '" + path.string() + "': " + e.what(),
                     static_cast<long long>(e.byte));
  }
}

nlohmann::json to_json(const RIReport& r) {
  auto pixels = nlohmann::json::array();
  for (int y = 0; y < r.mask_height; ++y) {
    for (int x = 0; x < r.mask_width; ++x) {
      if (r.outlier_mask[static_cast<std::size_t>(y) * r.mask_width + x]) pixels.push_back({y, x});
    }
  }
  return {{"outlier_count", r.outlier_count},
          {"mask_height", r.mask_height},
          {"mask_width", r.mask_width},
          {"outlier_pixels", std::move(pixels)},
          {"out_min", r.out_min},
          {"out_max", r.out_max},
          {"in_min", r.in_min},
          {"in_max", r.in_max},
          {"minmax_gap", r.minmax_gap},
          {"deviation", r.deviation},
          {"shift", r.shift},
          {"verdict", std::string(to_string(r.verdict))}};
}

nlohmann::json to_json(const AugmentationResult& a) {
  return {{"method", std::string(to_string(a.method))},
          {"on_before", a.on_before},
          {"outlier_count", a.outlier_count},
          {"iterations_used", a.iterations_used},
          {"pixels_modified", a.pixels_modified},
          {"height", a.image.height()},
          {"width", a.image.width()}};
}

namespace {

nlohmann::json rows_json(const std::vector<ImageScore>& rows) {
  auto out = nlohmann::json::array();
  for (const auto& r : rows) out.push_back({{"id", r.id}, {"psnr", r.psnr}, {"ssim", r.ssim}});
  return out;
}

}  // namespace

nlohmann::json to_json(const EvalResult& e) {
  nlohmann::json j = {{"schema_version", 1},
                      {"testset", e.testset},
                      {"model_id", e.model_id},
                      {"ri_id", e.ri_id},
                      {"images", rows_json(e.images)},
                      {"mean_psnr", e.mean_psnr},
                      {"mean_ssim", e.mean_ssim}};
  if (e.baseline) {
    j["baseline"] = {{"method", "bicubic"},
                     {"images", rows_json(*e.baseline)},
                     {"mean_psnr", e.baseline_mean_psnr},
                     {"mean_ssim", e.baseline_mean_ssim}};
  }
  return j;
}

nlohmann::json to_json(const EpochLog& e) {
  return {{"epoch", e.epoch}, {"lr", e.lr}, {"loss", e.loss}, {"heldout_loss", e.heldout_loss}};
}

nlohmann::json to_json(const BenchResult& b) {
  auto variant = [](const BenchVariant& v) {
    return nlohmann::json{{"mean_ms", v.mean_ms},
                          {"min_ms", v.min_ms},
                          {"elementwise_ops", v.elementwise_ops},
                          {"samples_ms", v.samples_ms}};
  };
  return {{"schema_version", 1},
          {"height", b.height},
          {"width", b.width},
          {"repeats", b.repeats},
          {"clipped", variant(b.clipped)},
          {"noclip", variant(b.noclip)}};
}

}  // namespace rilab
