// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#include "rilab/train.hpp"

#include <cmath>
#include <string>

#include "rilab/error.hpp"
#include "rilab/image.hpp"
#include "rilab/ops.hpp"
#include "rilab/rng.hpp"

namespace rilab {

double lr_schedule(const TrainConfig& cfg, int epoch) {
  if (epoch < 0 || epoch >= cfg.epochs) {
    throw StructuralError("lr_schedule: epoch " + std::to_string(epoch) + " outside [0, " +
                          std::to_string(cfg.epochs) + ")");
  }
  const int last = cfg.epochs - 1;
  if (cfg.warmup_epochs > 0 && (epoch <= cfg.warmup_epochs || last <= cfg.warmup_epochs)) {
    const double t = static_cast<double>(epoch) / cfg.warmup_epochs;
    return cfg.lr_start + (cfg.lr_peak - cfg.lr_start) * t;
  }
  if (last <= cfg.warmup_epochs) return cfg.lr_peak;
  const double t = static_cast<double>(epoch - cfg.warmup_epochs) / (last - cfg.warmup_epochs);
  return cfg.lr_peak + (cfg.lr_end - cfg.lr_peak) * t;
}

std::vector<PatchPair> sample_patches(std::span<const Tensor> dataset, int n, int patch, int scale,
                                      std::uint64_t seed, const WarningSink& warn) {
  if (dataset.empty()) throw StructuralError("sample_patches: empty dataset");
  if (patch <= 0 || scale <= 0) throw StructuralError("sample_patches: bad patch or scale");
  const int hr = patch * scale;
  std::vector<int> usable;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].height() >= hr && dataset[i].width() >= hr) {
      usable.push_back(static_cast<int>(i));
    } else if (warn) {
      warn("image " + std::to_string(i) + " is smaller than " + std::to_string(hr) + "x" +
           std::to_string(hr) + ", skipped");
    }
  }
  if (usable.empty()) {
    throw StructuralError("sample_patches: no image is at least " + std::to_string(hr) +
                          " pixels on each side");
  }
  Rng rng(seed);
  std::vector<PatchPair> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    PatchPair p;
    p.image = usable[rng.below(usable.size())];
    const Tensor& img = dataset[p.image];
    p.y = rng.below_int(img.height() - hr + 1);
    p.x = rng.below_int(img.width() - hr + 1);
    p.hr = crop(img, p.y, p.x, hr, hr);
    p.lr = bicubic_resize(p.hr, Rational{1, scale});
    out.push_back(std::move(p));
  }
  return out;
}

double batch_loss(std::span<const Tensor> outputs, std::span<const Tensor> targets, LossKind kind) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t b = 0; b < outputs.size(); ++b) {
    auto o = outputs[b].values();
    auto t = targets[b].values();
    for (std::size_t i = 0; i < o.size(); ++i) {
      const double d = static_cast<double>(o[i]) - t[i];
      sum += kind == LossKind::L1 ? std::abs(d) : d * d;
    }
    count += o.size();
  }
  return sum / static_cast<double>(count);
}

namespace {

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

bool all_finite(const Tensor& t) {
  for (float x : t.values()) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

double compute_gradients(const ModelGraph& m, std::span<const PatchPair> batch, LossKind kind,
                         LayerGradients& grads) {
  grads.assign(m.layers.size(), ConvGrad{});
  if (batch.empty()) return 0.0;
  std::size_t total = 0;
  for (const auto& p : batch) total += p.hr.size();
  const double norm = 1.0 / static_cast<double>(total);

  double loss_sum = 0.0;
  for (const auto& p : batch) {
    const auto trace = forward_trace(m, p.lr);
    for (std::size_t i = 1; i < trace.size(); ++i) {
      if (!all_finite(trace[i])) {
        throw TrainingError("forward output of layer " + std::to_string(i - 1) + " (" +
                                std::string(to_string(m.layers[i - 1].kind)) + ") is non-finite",
                            static_cast<std::ptrdiff_t>(i - 1));
      }
    }
    const Tensor& out = trace.back();
    if (!out.same_shape(p.hr)) throw StructuralError("model output does not match HR patch shape");

    Tensor g(out.height(), out.width(), out.channels());
    auto gv = g.values();
    auto ov = out.values();
    auto tv = p.hr.values();
    for (std::size_t i = 0; i < gv.size(); ++i) {
      const double target = std::clamp(static_cast<double>(tv[i]), 0.0, 255.0);
      const double d = ov[i] - target;
      if (kind == LossKind::L1) {
        loss_sum += std::abs(d);
        gv[i] = static_cast<float>(norm * ((d > 0) - (d < 0)));
      } else {
        loss_sum += d * d;
        gv[i] = static_cast<float>(norm * 2.0 * d);
      }
    }

    for (std::size_t li = m.layers.size(); li-- > 0;) {
      const auto& l = m.layers[li];
      const Tensor& x = trace[li];
      switch (l.kind) {
        case LayerKind::Conv: {
          conv2d_grad_weights(x, g, l.conv, grads[li], Padding::Zero);
          if (!all_finite(grads[li].weights) || !all_finite(grads[li].bias)) {
            throw TrainingError("gradient of layer " + std::to_string(li) +
                                    " (Conv) became non-finite",
                                static_cast<std::ptrdiff_t>(li));
          }
          if (li > 0) {
            Tensor gi = conv2d_grad_input(g, l.conv, x.height(), x.width(), Padding::Zero);
            if (l.residual) gi = add(gi, g);
            g = std::move(gi);
          }
          break;
        }
        case LayerKind::ReLU: g = relu_grad(x, g); break;
        case LayerKind::ClippedReLU: g = clipped_relu_grad(x, g, l.clip_lo, l.clip_hi); break;
        case LayerKind::DepthToSpace: g = space_to_depth(g, l.block); break;
        case LayerKind::AddAnchor: break;  // the anchor depends only on the network input
      }
    }
  }
  const double loss = loss_sum * norm;
  if (!std::isfinite(loss)) throw TrainingError("loss became non-finite", -1);
  return loss;
}

void adam_update(std::span<float> params, std::span<const double> grad, AdamState& state,
                 double lr, double beta1, double beta2, double epsilon) {
  if (grad.size() != params.size()) throw StructuralError("adam_update: size mismatch");
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
    state.step = 0;
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] = static_cast<float>(params[i] - lr * mhat / (std::sqrt(vhat) + epsilon));
  }
}

namespace {

double heldout_loss(const ModelGraph& m, std::span<const PatchPair> batch, LossKind kind) {
  std::vector<Tensor> outs;
  std::vector<Tensor> targets;
  for (const auto& p : batch) {
    outs.push_back(forward(m, p.lr));
    targets.push_back(p.hr);
  }
  return batch_loss(outs, targets, kind);
}

}  // namespace

TrainResult train(ModelGraph m, const TrainConfig& cfg, std::span<const Tensor> dataset,
                  const std::function<void(const EpochLog&)>& on_epoch, const WarningSink& warn) {
  if (dataset.empty()) throw StructuralError("train: empty dataset");
  if (cfg.epochs <= 0 || cfg.batch_size <= 0 || cfg.patches_per_epoch <= 0) {
    throw StructuralError("train: epochs, batch_size and patches_per_epoch must be positive");
  }
  m.validate();
  const auto heldout = sample_patches(dataset, cfg.heldout_patches, cfg.patch_size, m.scale,
                                      Rng::derive(cfg.seed, 1u << 20), warn);
  TrainResult result;
  result.initial_heldout_loss = heldout_loss(m, heldout, cfg.loss);

  std::vector<AdamState> wstate(m.layers.size());
  std::vector<AdamState> bstate(m.layers.size());
  LayerGradients grads;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_schedule(cfg, epoch);
    const auto patches = sample_patches(dataset, cfg.patches_per_epoch, cfg.patch_size, m.scale,
                                        Rng::derive(cfg.seed, static_cast<std::uint64_t>(epoch)),
                                        epoch == 0 ? warn : WarningSink{});
    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < patches.size(); start += cfg.batch_size) {
      const std::size_t len = std::min<std::size_t>(cfg.batch_size, patches.size() - start);
      loss_sum += compute_gradients(m, std::span(patches).subspan(start, len), cfg.loss, grads);
      ++batches;
      for (std::size_t li = 0; li < m.layers.size(); ++li) {
        auto& l = m.layers[li];
        if (l.kind != LayerKind::Conv) continue;
        adam_update(l.conv.weights, grads[li].weights, wstate[li], lr, cfg.beta1, cfg.beta2,
                    cfg.epsilon);
        adam_update(l.conv.bias, grads[li].bias, bstate[li], lr, cfg.beta1, cfg.beta2,
                    cfg.epsilon);
      }
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.lr = lr;
    entry.loss = loss_sum / batches;
    entry.heldout_loss = heldout_loss(m, heldout, cfg.loss);
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }
  result.model = std::move(m);
  return result;
}

}  // namespace rilab
