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
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "distillir/adjuster.hpp"
#include "distillir/autoencoder.hpp"
#include "distillir/corpus.hpp"
#include "distillir/restoration_model.hpp"

namespace distillir::distill {

enum class DiscrepancyMode { kKl, kCosine };

std::string to_string(DiscrepancyMode mode);
// "kl" or "cosine"; anything else throws ConfigError.
DiscrepancyMode parse_mode(const std::string& name);

// 1 - cos(grads_s, grads_t), in [0, 2]. Throws ValidationError on a length
// mismatch or when both vectors are zero.
double gradient_match_loss(std::span<const double> grads_s, std::span<const double> grads_t);
double gradient_match_loss(std::span<const float> grads_s, std::span<const float> grads_t);

// Per-channel spatial mean of a feature map.
std::vector<double> pool_features(const FeatureMap& f);

// kl: KL(softmax(pool(a)) || softmax(pool(b))). cosine: 1 - cos of the
// flattened maps (0 for identical maps, including two zero maps).
double distribution_discrepancy(const FeatureMap& a, const FeatureMap& b, DiscrepancyMode mode);

// ||img_a - img_b||_2 + distribution_discrepancy(f_a, f_b).
double pixel_feature_loss(const Image& img_a, const Image& img_b, const FeatureMap& f_a,
                          const FeatureMap& f_b, DiscrepancyMode mode);

struct FinetuneOptions {
  int steps = 200;
  double lr = 1e-4;        // adjuster
  double model_lr = 3e-4;  // co-trained restoration model
  int batch = 8;
  int patch = 32;          // square crop side; 0 trains on whole images
  double task_weight = 1.0;
  DiscrepancyMode mode = DiscrepancyMode::kKl;
  std::uint64_t seed = 0;
};

struct CurvePoint {
  int step = 0;
  double l2 = 0.0;
  double divergence = 0.0;
  double task = 0.0;

  double pixel_feature() const { return l2 + divergence; }
};

struct DistilledSet {
  std::vector<std::string> real_ids;           // ids of the selected subset
  std::vector<corpus::ImagePair> adjusted_pairs;  // one per real id, same order
  std::vector<corpus::ImagePair> synthetic_pairs;
  AdjusterCNN adjuster;
  std::vector<CurvePoint> curve;
  nlohmann::json provenance = nlohmann::json::object();
};

// Fine-tunes a copy of `adjuster` so the adjusted subset stays close to the
// original in pixel space while its feature distribution moves toward the
// reference sample's, and so the co-trained restoration model does well on
// the adjusted pairs. Each step minimizes
//   ||A(x) - x||_2 + D(F(A(x)), F(x_ref)) + task_weight * mse(R(A(lq)), A(hq))
// over a batch of HQ and LQ crops. F is the adjuster's own feature layer;
// the reference branch is treated as a constant target. When the subset
// fits in one batch every step uses the same batch. The returned adjusted
// pairs are A applied to the full subset images, clamped to [0, 1].
// Throws DivergenceError (with the step) on a non-finite loss.
DistilledSet finetune_distribution(const AdjusterCNN& adjuster,
                                   const std::vector<corpus::ImagePair>& subset,
                                   const std::vector<corpus::ImagePair>& reference,
                                   trainer::RestorationModel& restoration_model,
                                   const FinetuneOptions& options);

// "step,l2,divergence,task" plus one row per step.
std::string curve_csv(const std::vector<CurvePoint>& curve);

struct LatentOptions {
  std::size_t count = 1;       // synthetic pairs to produce
  int steps = 20;
  double lr = 0.05;            // largest latent change per step
  double latent_weight = 0.1;  // weight of mean((z - z0)^2)
  int max_backtracks = 10;
  std::uint64_t seed = 0;
};

struct LatentResult {
  std::vector<corpus::ImagePair> synthetic;
  std::vector<double> objective;  // before any step, then after each step
};

// Optimizes latent codes, initialized at the encodings of the first `count`
// selected HQ images, so that the restoration loss gradient (w.r.t. the
// model parameters) on the decoded batch matches the one on the real
// batch, with an L2 pull toward the initial codes. Synthetic LQ images
// re-apply each source pair's degradation and seed to the decoded HQ. The
// gradient with respect to the latents uses a central finite difference
// for the Hessian-vector product and treats the degradation as identity.
// Each step is a backtracking line search that only accepts a decrease, so
// the objective never increases. The model's parameters are left as they
// were. Throws ValidationError if count is 0 or exceeds the selection.
LatentResult distill_latents(const Autoencoder& decoder,
                             const std::vector<corpus::ImagePair>& selected,
                             trainer::RestorationModel& restoration_model,
                             const LatentOptions& options);

// Writes dir/pairs/ (PNG pairs + manifest of adjusted then synthetic
// pairs), dir/adjuster.bin, dir/finetune_curve.csv and dir/distilled.json.
corpus::CorpusManifest save_distilled(const DistilledSet& set, const std::filesystem::path& dir,
                                      std::uint64_t seed);

}  // namespace distillir::distill
