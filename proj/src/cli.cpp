// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#include "rilab/cli.hpp"

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rilab/corpus.hpp"
#include "rilab/error.hpp"
#include "rilab/experiment.hpp"
#include "rilab/fileio.hpp"
#include "rilab/image.hpp"
#include "rilab/json_io.hpp"
#include "rilab/metrics.hpp"
#include "rilab/model.hpp"
#include "rilab/quant.hpp"
#include "rilab/ri.hpp"
#include "rilab/train.hpp"

namespace fs = std::filesystem;

namespace rilab {
namespace {

// "<dir>/<stem><suffix>" next to `p`.
fs::path sibling(const fs::path& p, const std::string& suffix) {
  return p.parent_path() / (p.stem().string() + suffix);
}

void write_json(const nlohmann::json& j, const fs::path& path) {
  write_file_atomic(path, j.dump(2) + "\n");
}

std::string manifest_format(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file_text(path)).value("format", "");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed manifest '" + path.string() + "': " + e.what());
  }
}

Thresholds thresholds_or_default(const std::string& path) {
  return path.empty() ? Thresholds{} : load_thresholds(path);
}

struct TrainArgs {
  std::string arch;
  bool clipped = false;
  std::string corpus;
  std::string config;
  std::optional<int> epochs;
  std::optional<std::uint64_t> seed;
  std::optional<int> patches;
  std::optional<std::string> loss;
  std::string out;
};

TrainConfig train_config(const TrainArgs& a) {
  TrainConfig cfg;
  if (!a.config.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file_text(a.config));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("malformed config '" + a.config + "': " + e.what(),
                       static_cast<long long>(e.byte));
    }
    try {
      cfg.epochs = j.value("epochs", cfg.epochs);
      cfg.batch_size = j.value("batch_size", cfg.batch_size);
      cfg.patch_size = j.value("patch_size", cfg.patch_size);
      cfg.patches_per_epoch = j.value("patches_per_epoch", cfg.patches_per_epoch);
      cfg.lr_start = j.value("lr_start", cfg.lr_start);
      cfg.lr_peak = j.value("lr_peak", cfg.lr_peak);
      cfg.lr_end = j.value("lr_end", cfg.lr_end);
      cfg.warmup_epochs = j.value("warmup_epochs", cfg.warmup_epochs);
      cfg.beta1 = j.value("beta1", cfg.beta1);
      cfg.beta2 = j.value("beta2", cfg.beta2);
      cfg.epsilon = j.value("epsilon", cfg.epsilon);
      cfg.seed = j.value("seed", cfg.seed);
      cfg.heldout_patches = j.value("heldout_patches", cfg.heldout_patches);
      if (j.contains("loss")) cfg.loss = j["loss"].get<std::string>() == "l2" ? LossKind::L2 : LossKind::L1;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("config '" + a.config + "': " + e.what());
    }
  }
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.seed) cfg.seed = *a.seed;
  if (a.patches) cfg.patches_per_epoch = *a.patches;
  if (a.loss) cfg.loss = *a.loss == "l2" ? LossKind::L2 : LossKind::L1;
  return cfg;
}

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const TrainConfig cfg = train_config(a);
  const Corpus corpus = load_corpus(a.corpus);
  if (corpus.images.empty()) throw StructuralError("corpus '" + a.corpus + "' is empty");
  const auto images = corpus.tensors();
  const fs::path manifest(a.out);
  if (manifest.has_parent_path()) fs::create_directories(manifest.parent_path());

  std::ostringstream log;
  log << nlohmann::json{{"schema_version", kSchemaVersion},
                        {"arch", a.arch},
                        {"clipped", a.clipped},
                        {"corpus", corpus.name},
                        {"epochs", cfg.epochs},
                        {"seed", cfg.seed}}
             .dump()
      << "\n";
  const auto result = train(
      build_model(arch_from_string(a.arch), a.clipped, cfg.seed), cfg, images,
      [&](const EpochLog& e) { log << to_json(e).dump() << "\n"; },
      [&](const std::string& w) { err << "warning: " << w << "\n"; });
  save_model(result.model, manifest);
  write_file_atomic(sibling(manifest, ".log.jsonl"), log.str());
  const auto& last = result.log.back();
  out << "trained " << a.arch << (a.clipped ? " (clipped)" : "") << " for " << cfg.epochs
      << " epochs, held-out loss " << result.initial_heldout_loss << " -> " << last.heldout_loss
      << "\n";
  return kExitOk;
}

// Calibrates on `ris`, or reuses a saved record when `calib_path` is given.
int cmd_quantize(const std::string& model_path, const std::vector<std::string>& ris,
                 const std::string& calib_path, const std::string& out_path, std::ostream& out) {
  if (ris.empty() && calib_path.empty()) throw StructuralError("quantize needs --ri or --calib");
  const ModelGraph m = load_model(model_path);
  std::vector<Tensor> rd;
  for (const auto& p : ris) rd.push_back(load_image(p));
  const CalibrationRecord cal = calib_path.empty() ? calibrate(m, rd) : load_calibration(calib_path);
  const QuantizedModel qm = quantize_model(m, cal);
  const fs::path manifest(out_path);
  if (manifest.has_parent_path()) fs::create_directories(manifest.parent_path());
  save_quantized(qm, manifest);
  save_calibration(cal, sibling(manifest, ".calib.json"));
  out << "quantized " << m.name << " with " << cal.images << " representative image"
      << (cal.images == 1 ? "" : "s") << ", " << qm.activations.size() << " activation tensors\n";
  return kExitOk;
}

int cmd_cfqp(const std::string& model_path, const std::string& image_path,
             const std::string& thresholds_path, const std::string& out_path,
             std::string report_path, std::ostream& out) {
  const ModelGraph m = load_model(model_path);
  const Thresholds thr = thresholds_or_default(thresholds_path);
  const Tensor img = load_image(image_path);
  const CfqpOutcome res = cfqp_detailed(m, img, thr);

  const fs::path image_out(out_path);
  if (image_out.has_parent_path()) fs::create_directories(image_out.parent_path());
  save_image(round_clamp_u8(res.chosen.image), image_out);

  nlohmann::json j = to_json(res.chosen);
  j["schema_version"] = kSchemaVersion;
  j["source"] = image_path;
  j["model"] = m.name;
  j["report"] = to_json(res.report);
  j["thresholds"] = to_json(thr);
  auto cands = nlohmann::json::array();
  for (const auto& c : res.candidates) cands.push_back(to_json(c));
  j["candidates"] = std::move(cands);
  if (report_path.empty()) report_path = sibling(image_out, ".json").string();
  write_json(j, report_path);
  out << to_string(res.report.verdict) << " RI, method " << to_string(res.chosen.method) << ", ON "
      << res.chosen.on_before << " -> " << res.chosen.outlier_count << "\n";
  return kExitOk;
}

int cmd_sweep(const std::string& model_path, const std::string& corpus, const std::string& mode,
              const std::string& testset, const std::string& out_path,
              const std::string& thresholds_path, int jobs, std::ostream& out) {
  const ModelGraph m = load_model(model_path);
  SweepOptions opt;
  opt.mode = sweep_mode_from_string(mode);
  opt.thresholds = thresholds_or_default(thresholds_path);
  opt.jobs = jobs;
  const Corpus candidates = load_corpus(corpus);
  const Corpus tests = load_corpus(testset);
  if (candidates.images.empty()) throw StructuralError("corpus '" + corpus + "' is empty");
  const auto rows = run_sweep(m, candidates, tests, opt);

  const fs::path csv(out_path);
  if (csv.has_parent_path()) fs::create_directories(csv.parent_path());
  write_file_atomic(csv, sweep_csv(rows));
  write_json({{"schema_version", kSchemaVersion},
              {"columns", std::string(kSweepCsvHeader)},
              {"model", m.name},
              {"mode", std::string(to_string(opt.mode))},
              {"corpus", candidates.name},
              {"testset", tests.name},
              {"rows", rows.size()},
              {"order", "ascending raw-mode psnr_mean"},
              {"thresholds", to_json(opt.thresholds)}},
             fs::path(csv.string() + ".meta.json"));
  out << "wrote " << rows.size() << " rows to " << csv.string() << "\n";
  return kExitOk;
}

std::pair<int, int> parse_size(const std::string& s) {
  const auto x = s.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(s);
    std::size_t used_h = 0, used_w = 0;
    const int h = std::stoi(s.substr(0, x), &used_h);
    const int w = std::stoi(s.substr(x + 1), &used_w);
    if (used_h != x || used_w != s.size() - x - 1 || h <= 0 || w <= 0) throw std::invalid_argument(s);
    return {h, w};
  } catch (const std::logic_error&) {
    throw ParseError("--input-size must look like 64x64, got '" + s + "'");
  }
}

int cmd_bench(const std::string& model_path, const std::string& size, int repeats,
              std::uint64_t seed, const std::string& out_path, std::ostream& out) {
  const ModelGraph m = load_model(model_path);
  const auto [h, w] = parse_size(size);
  const BenchResult b = bench_clip_variants(m, h, w, repeats, seed);
  nlohmann::json j = to_json(b);
  j["model"] = m.name;
  if (out_path.empty()) {
    out << j.dump(2) << "\n";
  } else {
    write_json(j, out_path);
    out << "no-clip " << b.noclip.mean_ms << " ms (" << b.noclip.elementwise_ops << " ops), clipped "
        << b.clipped.mean_ms << " ms (" << b.clipped.elementwise_ops << " ops)\n";
  }
  return kExitOk;
}

int cmd_eval(const std::string& model_path, const std::string& testset, bool baseline,
             const std::string& out_path, std::ostream& out) {
  const Corpus tests = load_corpus(testset);
  EvalResult r;
  if (manifest_format(model_path) == "rilab.qmodel") {
    r = eval_model(load_quantized(model_path), tests, baseline);
  } else {
    r = eval_model(load_model(model_path), tests, baseline);
  }
  if (out_path.empty()) {
    out << to_json(r).dump(2) << "\n";
  } else {
    write_json(to_json(r), out_path);
    out << r.model_id << " on " << r.testset << ": " << r.mean_psnr << " dB, SSIM " << r.mean_ssim
        << "\n";
  }
  return kExitOk;
}

int cmd_gen_corpus(std::uint64_t seed, int n, int size, const std::string& dir, std::ostream& out) {
  save_corpus(synth_corpus(seed, n, size), dir);
  out << "wrote " << n << " images to " << dir << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"INT8 post-training quantization lab for tiny super-resolution CNNs", "rilab"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "train a tiny SR model");
  train_cmd->add_option("--arch", ta.arch, "espcn_tiny|fsrcnn_tiny|abpn_tiny|xcat_tiny|rfdn_tiny")
      ->required();
  train_cmd->add_flag("--clipped", ta.clipped, "append a ClippedReLU(0, 255) output layer");
  train_cmd->add_option("--corpus", ta.corpus, "image dir, corpus manifest, or synth:<seed>:<n>:<size>")
      ->required();
  train_cmd->add_option("--config", ta.config, "training config JSON; flags override it");
  train_cmd->add_option("--epochs", ta.epochs);
  train_cmd->add_option("--seed", ta.seed);
  train_cmd->add_option("--patches-per-epoch", ta.patches);
  train_cmd->add_option("--loss", ta.loss)->check(CLI::IsMember({"l1", "l2"}));
  train_cmd->add_option("--out", ta.out, "model manifest path (.json)")->required();

  std::string model, out_path, image, thresholds, corpus, testset, mode = "raw", size = "64x64";
  std::string report;
  std::vector<std::string> ris;
  int jobs = 1, repeats = 100, n = 64, side = 64;
  std::uint64_t seed = 1;
  bool baseline = false;

  auto* quantize_cmd = app.add_subcommand("quantize", "calibrate and quantize a model");
  quantize_cmd->add_option("--model", model)->required();
  std::string calib;
  auto* ri_opt = quantize_cmd->add_option("--ri", ris, "representative image (repeatable)");
  auto* calib_opt = quantize_cmd->add_option("--calib", calib, "reuse a saved calibration record");
  ri_opt->excludes(calib_opt);
  quantize_cmd->add_option("--out", out_path, "quantized manifest path (.json)")->required();

  auto* cfqp_cmd = app.add_subcommand("cfqp", "classify and repair a representative image");
  cfqp_cmd->add_option("--model", model)->required();
  cfqp_cmd->add_option("--image", image)->required();
  cfqp_cmd->add_option("--thresholds-json", thresholds);
  cfqp_cmd->add_option("--out", out_path, "output image (.ppm)")->required();
  cfqp_cmd->add_option("--report", report, "result JSON (default: next to --out)");

  auto* sweep_cmd = app.add_subcommand("sweep", "quantize once per corpus image and evaluate");
  sweep_cmd->add_option("--model", model)->required();
  sweep_cmd->add_option("--corpus", corpus)->required();
  sweep_cmd->add_option("--mode", mode)->check(CLI::IsMember({"raw", "cfqp"}));
  sweep_cmd->add_option("--testset", testset)->required();
  sweep_cmd->add_option("--out", out_path, "CSV path")->required();
  sweep_cmd->add_option("--thresholds-json", thresholds);
  sweep_cmd->add_option("--jobs", jobs)->check(CLI::PositiveNumber);

  auto* bench_cmd = app.add_subcommand("bench", "time clipped vs no-clip INT8 inference");
  bench_cmd->add_option("--model", model)->required();
  bench_cmd->add_option("--input-size", size, "HxW");
  bench_cmd->add_option("--repeats", repeats)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", seed);
  bench_cmd->add_option("--out", out_path, "JSON path (default: stdout)");

  auto* eval_cmd = app.add_subcommand("eval", "PSNR/SSIM of a float or quantized model");
  eval_cmd->add_option("--model", model)->required();
  eval_cmd->add_option("--testset", testset)->required();
  eval_cmd->add_flag("--baseline", baseline, "also score bicubic upscaling");
  eval_cmd->add_option("--out", out_path, "JSON path (default: stdout)");

  auto* gen_cmd = app.add_subcommand("gen-corpus", "write a synthetic corpus to a directory");
  gen_cmd->add_option("--seed", seed);
  gen_cmd->add_option("--n", n)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--size", side)->check(CLI::Range(8, 4096));
  gen_cmd->add_option("--out", out_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(ta, out, err);
    if (*quantize_cmd) return cmd_quantize(model, ris, calib, out_path, out);
    if (*cfqp_cmd) return cmd_cfqp(model, image, thresholds, out_path, report, out);
    if (*sweep_cmd) return cmd_sweep(model, corpus, mode, testset, out_path, thresholds, jobs, out);
    if (*bench_cmd) return cmd_bench(model, size, repeats, seed, out_path, out);
    if (*eval_cmd) return cmd_eval(model, testset, baseline, out_path, out);
    if (*gen_cmd) return cmd_gen_corpus(seed, n, side, out_path, out);
  } catch (const CalibrationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitCalibration;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << "\n";
    return kExitContract;
  } catch (const StructuralError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace rilab
