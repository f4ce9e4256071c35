// Copyright 2026 The distillir Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "distillir/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "distillir/errors.hpp"
#include "distillir/nn/convert.hpp"
#include "distillir/nn/optim.hpp"
#include "distillir/rng.hpp"

namespace distillir::trainer {
namespace {

// Planar float copies of a pair, so batch assembly is a strided copy.
struct PlanarPair {
  nn::Tensor lq;  // [3, H, W]
  nn::Tensor hq;
};

PlanarPair to_planar(const corpus::ImagePair& p) {
  PlanarPair out;
  out.lq = nn::to_batch(p.lq).reshaped({3, p.lq.height(), p.lq.width()});
  out.hq = nn::to_batch(p.hq).reshaped({3, p.hq.height(), p.hq.width()});
  return out;
}

void copy_patch(const nn::Tensor& src, int y, int x, int patch, nn::Tensor& dst, int slot) {
  const int h = src.dim(1), w = src.dim(2);
  for (int c = 0; c < 3; ++c) {
    for (int r = 0; r < patch; ++r) {
      const float* s = src.data() + (static_cast<std::size_t>(c) * h + y + r) * w + x;
      float* d = dst.data() + ((static_cast<std::size_t>(slot) * 3 + c) * patch + r) * patch;
      std::copy(s, s + patch, d);
    }
  }
}

std::string opt_metric(const std::optional<double>& v) {
  return v ? format_metric(*v) : "null";
}

}  // namespace

double cosine_lr(long step, long total_steps, double lr0) {
  if (total_steps < 1) throw ValidationError("cosine_lr: total_steps must be >= 1");
  if (step < 0 || step > total_steps) throw ValidationError("cosine_lr: step out of range");
  return lr0 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) /
                               static_cast<double>(total_steps))) / 2.0;
}

void TrainConfig::validate() const {
  if (!(lr0 > 0.0)) throw ValidationError("train: lr0 must be positive");
  if (batch < 1) throw ValidationError("train: batch must be >= 1");
  if (accum_steps < 1) throw ValidationError("train: accum_steps must be >= 1");
  if (batch % accum_steps != 0) {
    throw ValidationError("train: batch must be divisible by accum_steps");
  }
  if (patch < 4 || patch % 4 != 0) {
    throw ValidationError("train: patch must be a positive multiple of 4");
  }
  if (epochs < 0 || steps_per_epoch < 0) throw ValidationError("train: negative epochs or steps");
  if (weight_decay < 0.0) throw ValidationError("train: negative weight decay");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"lr0", lr0},         {"batch", batch},
          {"patch", patch},     {"accum_steps", accum_steps},
          {"epochs", epochs},   {"steps_per_epoch", steps_per_epoch},
          {"weight_decay", weight_decay}, {"seed", seed}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.lr0 = j.value("lr0", c.lr0);
  c.batch = j.value("batch", c.batch);
  c.patch = j.value("patch", c.patch);
  c.accum_steps = j.value("accum_steps", c.accum_steps);
  c.epochs = j.value("epochs", c.epochs);
  c.steps_per_epoch = j.value("steps_per_epoch", c.steps_per_epoch);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.seed = j.value("seed", c.seed);
  return c;
}

std::string TrainHistory::steps_csv() const {
  std::string out = "step,lr,loss\n";
  for (const auto& s : steps) {
    out += fmt::format("{},{:.9e},{:.9e}\n", s.step, s.lr, s.loss);
  }
  return out;
}

std::string TrainHistory::epochs_jsonl() const {
  std::string out;
  for (const auto& e : epochs) {
    out += fmt::format("{{\"epoch\":{},\"mean_loss\":{:.9e},\"val_psnr\":{},\"val_ssim\":{}}}\n",
                       e.epoch, e.mean_loss, opt_metric(e.val_psnr), opt_metric(e.val_ssim));
  }
  return out;
}

double train_step(RestorationModel& model, nn::AdamW& optimizer, const nn::Tensor& lq,
                  const nn::Tensor& hq, int accum_steps, double lr) {
  const int batch = lq.dim(0);
  if (accum_steps < 1 || batch % accum_steps != 0) {
    throw ValidationError("train_step: batch must be divisible by accum_steps");
  }
  const int micro = batch / accum_steps;
  optimizer.zero_grad();
  double loss = 0.0;
  for (int k = 0; k < accum_steps; ++k) {
    nn::Graph g;
    nn::Var x = g.constant(nn::slice_batch(lq, k * micro, micro));
    nn::Var y = g.constant(nn::slice_batch(hq, k * micro, micro));
    nn::Var l = nn::mean_squared_error(g, model.forward(g, x), y);
    loss += g.value(l).item();
    g.backward(l, nn::Tensor::scalar(1.0f / static_cast<float>(accum_steps)));
  }
  loss /= accum_steps;
  if (std::isfinite(loss)) optimizer.step(static_cast<float>(lr));
  return loss;
}

TrainHistory train_restoration(RestorationModel& model,
                               const std::vector<corpus::ImagePair>& pool,
                               const TrainConfig& config,
                               const std::vector<corpus::ImagePair>* validation) {
  config.validate();
  if (pool.empty()) throw ValidationError("train: empty training set");
  std::vector<PlanarPair> data;
  data.reserve(pool.size());
  for (const auto& p : pool) {
    if (p.lq.channels() != 3 || !p.lq.same_shape(p.hq)) {
      throw ValidationError("train: pair '" + p.id + "' is not a matched RGB pair");
    }
    if (p.hq.height() < config.patch || p.hq.width() < config.patch) {
      throw ValidationError("train: patch larger than image '" + p.id + "'");
    }
    data.push_back(to_planar(p));
  }

  const int steps_per_epoch = config.steps_per_epoch > 0
                                  ? config.steps_per_epoch
                                  : static_cast<int>((pool.size() + config.batch - 1) / config.batch);
  const long total = static_cast<long>(steps_per_epoch) * config.epochs;
  nn::AdamW opt(model.parameters(), {.weight_decay = static_cast<float>(config.weight_decay)});
  Rng rng = substream(config.seed, "train.batches");

  TrainHistory history;
  std::vector<std::size_t> order(pool.size());
  long step = 0;
  const int p = config.patch;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t cursor = 0;
    double epoch_loss = 0.0;
    for (int s = 0; s < steps_per_epoch; ++s, ++step) {
      nn::Tensor lq({config.batch, 3, p, p});
      nn::Tensor hq({config.batch, 3, p, p});
      for (int b = 0; b < config.batch; ++b) {
        const PlanarPair& pair = data[order[cursor++ % order.size()]];
        std::uniform_int_distribution<int> dy(0, pair.hq.dim(1) - p);
        std::uniform_int_distribution<int> dx(0, pair.hq.dim(2) - p);
        const int y = dy(rng), x = dx(rng);
        copy_patch(pair.lq, y, x, p, lq, b);
        copy_patch(pair.hq, y, x, p, hq, b);
      }
      const double lr = cosine_lr(step, total, config.lr0);
      const double loss = train_step(model, opt, lq, hq, config.accum_steps, lr);
      if (!std::isfinite(loss)) throw DivergenceError("training loss is not finite", step);
      history.steps.push_back({step, lr, loss});
      epoch_loss += loss;
    }
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.mean_loss = steps_per_epoch > 0 ? epoch_loss / steps_per_epoch : 0.0;
    if (validation != nullptr && !validation->empty()) {
      const EvalTable t = evaluate(model, *validation);
      rec.val_psnr = t.mean_psnr;
      rec.val_ssim = t.mean_ssim;
    }
    history.epochs.push_back(rec);
  }
  return history;
}

TrainHistory train_restoration(RestorationModel& model, const corpus::CorpusManifest& manifest,
                               const TrainConfig& config) {
  if (manifest.entries.empty()) throw ValidationError("train: empty manifest");
  return train_restoration(model, corpus::load_pairs(manifest), config);
}

std::string format_metric(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.6f}", v);
}

std::string EvalTable::to_csv() const {
  std::string out = "id,psnr,ssim\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{}\n", r.id, format_metric(r.psnr), format_metric(r.ssim));
  }
  out += fmt::format("mean,{},{}\n", format_metric(mean_psnr), format_metric(mean_ssim));
  return out;
}

EvalTable evaluate(const RestoreFn& restore, const std::vector<corpus::ImagePair>& test) {
  if (test.empty()) throw ValidationError("evaluate: empty test set");
  EvalTable table;
  double sp = 0.0, ss = 0.0;
  for (const auto& pair : test) {
    Image out = restore(pair.lq);
    if (!out.same_shape(pair.hq)) {
      throw ValidationError("evaluate: restored '" + pair.id + "' has the wrong shape");
    }
    clamp_unit(out);
    const auto q = imageops::quality(out, pair.hq);
    table.rows.push_back({pair.id, q.psnr, q.ssim});
    sp += q.psnr;
    ss += q.ssim;
  }
  table.mean_psnr = sp / static_cast<double>(test.size());
  table.mean_ssim = ss / static_cast<double>(test.size());
  return table;
}

EvalTable evaluate(const RestorationModel& model, const std::vector<corpus::ImagePair>& test) {
  return evaluate([&model](const Image& lq) { return model.restore(lq); }, test);
}

EvalTable evaluate(const RestorationModel& model, const corpus::CorpusManifest& test) {
  if (test.entries.empty()) throw ValidationError("evaluate: empty test manifest");
  return evaluate(model, corpus::load_pairs(test));
}

}  // namespace distillir::trainer
