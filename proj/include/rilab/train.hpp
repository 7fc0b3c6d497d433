// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rilab/model.hpp"
#include "rilab/tensor.hpp"

namespace rilab {

enum class LossKind { L1, L2 };

struct TrainConfig {
  int epochs = 40;
  int batch_size = 8;
  int patch_size = 16;  // LR pixels
  int patches_per_epoch = 200;
  double lr_start = 4e-4;
  double lr_peak = 25e-4;
  double lr_end = 4e-5;
  int warmup_epochs = 10;
  double beta1 = 0.99;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::L1;
  int heldout_patches = 16;
};

// Piecewise linear: lr_start -> lr_peak across epochs [0, warmup_epochs], then
// lr_peak -> lr_end across [warmup_epochs, epochs - 1]. When the run is too short
// to leave the warmup, the warmup line is followed.
double lr_schedule(const TrainConfig& cfg, int epoch);

struct PatchPair {
  Tensor lr;
  Tensor hr;
  int image = 0;
  int y = 0;  // HR crop origin
  int x = 0;
};

using WarningSink = std::function<void(const std::string&)>;

// n aligned (LR, HR) pairs. For each pair an image is drawn uniformly among the
// images at least patch * scale on both sides, then a uniform crop origin; LR is
// the bicubic 1/scale of the HR crop. Smaller images are skipped with a warning.
std::vector<PatchPair> sample_patches(std::span<const Tensor> dataset, int n, int patch, int scale,
                                      std::uint64_t seed, const WarningSink& warn = {});

// Mean loss over every element of the batch outputs.
double batch_loss(std::span<const Tensor> outputs, std::span<const Tensor> targets, LossKind kind);

// Parameter gradients of one Conv layer (empty for other layers).
using LayerGradients = std::vector<ConvGrad>;

// Mean batch loss and its gradient with respect to every Conv weight and bias.
// Throws TrainingError naming the first layer (in backward order) whose
// gradient is non-finite.
double compute_gradients(const ModelGraph& m, std::span<const PatchPair> batch, LossKind kind,
                         LayerGradients& grads);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long long step = 0;
};

// One bias-corrected Adam step on `params` in place.
void adam_update(std::span<float> params, std::span<const double> grad, AdamState& state,
                 double lr, double beta1, double beta2, double epsilon);

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double loss = 0.0;          // mean training loss of the epoch
  double heldout_loss = 0.0;  // on the fixed held-out batch after the epoch
};

struct TrainResult {
  ModelGraph model;
  std::vector<EpochLog> log;
  double initial_heldout_loss = 0.0;
};

// Desk-scale training loop: per epoch, sample_patches with seed
// Rng::derive(cfg.seed, epoch), mini-batches in sample order, one Adam step per
// batch. The held-out batch comes from Rng::derive(cfg.seed, 1 << 20).
TrainResult train(ModelGraph m, const TrainConfig& cfg, std::span<const Tensor> dataset,
                  const std::function<void(const EpochLog&)>& on_epoch = {},
                  const WarningSink& warn = {});

}  // namespace rilab
