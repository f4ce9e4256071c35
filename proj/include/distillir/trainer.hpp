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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "distillir/corpus.hpp"
#include "distillir/imageops.hpp"
#include "distillir/nn/optim.hpp"
#include "distillir/restoration_model.hpp"

namespace distillir::trainer {

// lr0 * (1 + cos(pi * step / total_steps)) / 2, for 0 <= step <= total_steps.
double cosine_lr(long step, long total_steps, double lr0);

struct TrainConfig {
  double lr0 = 3e-4;
  int batch = 16;
  int patch = 64;
  int accum_steps = 1;  // micro-batches averaged per optimizer update
  int epochs = 10;
  // Optimizer updates per epoch. 0 means one pass over the pool,
  // ceil(pool / batch).
  int steps_per_epoch = 0;
  double weight_decay = 1e-4;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct StepRecord {
  long step = 0;
  double lr = 0.0;
  double loss = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  std::optional<double> val_psnr;
  std::optional<double> val_ssim;
};

struct TrainHistory {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;

  // CSV "step,lr,loss".
  std::string steps_csv() const;
  // One JSON object per line, one line per epoch.
  std::string epochs_jsonl() const;
};

// Mean squared error training of `model` on random patches of `pool`.
// Every epoch reshuffles the pool order; batches cycle through it. Each
// update averages the gradients of accum_steps micro-batches of size
// batch / accum_steps. Throws DivergenceError on a non-finite loss.
TrainHistory train_restoration(RestorationModel& model,
                               const std::vector<corpus::ImagePair>& pool,
                               const TrainConfig& config,
                               const std::vector<corpus::ImagePair>* validation = nullptr);

TrainHistory train_restoration(RestorationModel& model,
                               const corpus::CorpusManifest& manifest,
                               const TrainConfig& config);

// Single optimizer step on a fixed batch; exposed for the accumulation
// equivalence check. lq/hq: [B, 3, P, P].
double train_step(RestorationModel& model, nn::AdamW& optimizer,
                  const nn::Tensor& lq, const nn::Tensor& hq, int accum_steps, double lr);

struct EvalRow {
  std::string id;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct EvalTable {
  std::vector<EvalRow> rows;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;

  // Header, one row per image, then a final "mean" row.
  std::string to_csv() const;
  std::size_t row_count() const { return rows.size() + 1; }
};

using RestoreFn = std::function<Image(const Image&)>;

EvalTable evaluate(const RestoreFn& restore, const std::vector<corpus::ImagePair>& test);
EvalTable evaluate(const RestorationModel& model, const std::vector<corpus::ImagePair>& test);
EvalTable evaluate(const RestorationModel& model, const corpus::CorpusManifest& test);

// Fixed-precision number formatting used by every CSV the toolkit writes;
// infinities print as "inf".
std::string format_metric(double v);

}  // namespace distillir::trainer
