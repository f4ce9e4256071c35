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

#include "distillir/distill.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "distillir/errors.hpp"
#include "distillir/imageops.hpp"
#include "distillir/nn/convert.hpp"
#include "distillir/nn/optim.hpp"
#include "distillir/rng.hpp"
#include "distillir/trainer.hpp"

namespace distillir::distill {

using corpus::ImagePair;
using nn::Graph;
using nn::Tensor;
using nn::Var;

std::string to_string(DiscrepancyMode mode) {
  return mode == DiscrepancyMode::kKl ? "kl" : "cosine";
}

DiscrepancyMode parse_mode(const std::string& name) {
  if (name == "kl") return DiscrepancyMode::kKl;
  if (name == "cosine") return DiscrepancyMode::kCosine;
  throw ConfigError("unknown discrepancy mode '" + name + "' (expected kl or cosine)");
}

namespace {

template <typename T>
double cosine_distance(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) throw ValidationError("gradient vectors differ in length");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 && nb == 0.0) throw ValidationError("cosine undefined: both vectors are zero");
  if (na == 0.0 || nb == 0.0) return 1.0;
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return 1.0 - std::clamp(c, -1.0, 1.0);
}

void check_finite(const FeatureMap& f) {
  for (double v : f.data) {
    if (!std::isfinite(v)) throw ValidationError("feature map has non-finite values");
  }
}

std::vector<double> log_softmax(const std::vector<double>& x) {
  const double m = *std::max_element(x.begin(), x.end());
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  const double lse = m + std::log(s);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - lse;
  return out;
}

}  // namespace

double gradient_match_loss(std::span<const double> grads_s, std::span<const double> grads_t) {
  return cosine_distance(grads_s, grads_t);
}

double gradient_match_loss(std::span<const float> grads_s, std::span<const float> grads_t) {
  return cosine_distance(grads_s, grads_t);
}

std::vector<double> pool_features(const FeatureMap& f) {
  const std::size_t hw = static_cast<std::size_t>(f.height) * f.width;
  if (f.channels < 1 || hw == 0 || f.data.size() != f.channels * hw) {
    throw ValidationError("malformed feature map");
  }
  std::vector<double> out(f.channels, 0.0);
  for (int c = 0; c < f.channels; ++c) {
    const double* p = f.data.data() + c * hw;
    out[c] = std::accumulate(p, p + hw, 0.0) / static_cast<double>(hw);
  }
  return out;
}

double distribution_discrepancy(const FeatureMap& a, const FeatureMap& b, DiscrepancyMode mode) {
  if (a.channels != b.channels || a.height != b.height || a.width != b.width) {
    throw ValidationError("feature maps differ in shape");
  }
  check_finite(a);
  check_finite(b);
  if (mode == DiscrepancyMode::kCosine) {
    if (a.data == b.data) return 0.0;
    return cosine_distance(std::span<const double>(a.data), std::span<const double>(b.data));
  }
  const auto la = log_softmax(pool_features(a));
  const auto lb = log_softmax(pool_features(b));
  double kl = 0.0;
  for (std::size_t i = 0; i < la.size(); ++i) kl += std::exp(la[i]) * (la[i] - lb[i]);
  return std::max(kl, 0.0);
}

double pixel_feature_loss(const Image& img_a, const Image& img_b, const FeatureMap& f_a,
                          const FeatureMap& f_b, DiscrepancyMode mode) {
  if (!img_a.same_shape(img_b)) throw ValidationError("images differ in shape");
  double ss = 0.0;
  const auto a = img_a.data();
  const auto b = img_b.data();
  for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(ss) + distribution_discrepancy(f_a, f_b, mode);
}

// --- distribution fine-tuning ------------------------------------------------

namespace {

// Indices for one step: everything when it fits, otherwise a random draw
// without replacement.
std::vector<std::size_t> draw(std::size_t n, int batch, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (n <= static_cast<std::size_t>(batch)) return idx;
  for (int i = 0; i < batch; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(batch);
  return idx;
}

struct CropBatch {
  std::vector<Image> hq, lq;
};

CropBatch crop_batch(const std::vector<ImagePair>& pairs, const std::vector<std::size_t>& idx,
                     int patch, Rng& rng) {
  CropBatch out;
  for (std::size_t i : idx) {
    const ImagePair& p = pairs[i];
    if (patch == 0) {
      out.hq.push_back(p.hq);
      out.lq.push_back(p.lq);
      continue;
    }
    if (p.hq.height() < patch || p.hq.width() < patch) {
      throw ValidationError("finetune: image '" + p.id + "' is smaller than the patch");
    }
    std::uniform_int_distribution<int> ys(0, p.hq.height() - patch);
    std::uniform_int_distribution<int> xs(0, p.hq.width() - patch);
    const int y = ys(rng), x = xs(rng);
    out.hq.push_back(imageops::crop(p.hq, y, x, patch, patch));
    out.lq.push_back(imageops::crop(p.lq, y, x, patch, patch));
  }
  return out;
}

Tensor stack(const std::vector<Image>& a, const std::vector<Image>* b = nullptr) {
  std::vector<const Image*> ptrs;
  for (const Image& img : a) ptrs.push_back(&img);
  if (b) {
    for (const Image& img : *b) ptrs.push_back(&img);
  }
  return nn::to_batch(ptrs);
}

ImagePair adjust_pair(const AdjusterCNN& adjuster, const ImagePair& p) {
  ImagePair out = p;
  out.hq = adjuster.apply(p.hq);
  out.lq = adjuster.apply(p.lq);
  return out;
}

}  // namespace

DistilledSet finetune_distribution(const AdjusterCNN& adjuster, const std::vector<ImagePair>& subset,
                                   const std::vector<ImagePair>& reference,
                                   trainer::RestorationModel& restoration_model,
                                   const FinetuneOptions& options) {
  if (subset.empty()) throw ValidationError("finetune: empty subset");
  if (reference.empty()) throw ValidationError("finetune: empty reference sample");
  if (options.steps < 0) throw ValidationError("finetune: steps must be >= 0");
  if (options.batch < 1) throw ValidationError("finetune: batch must be >= 1");
  if (options.patch < 0 || options.patch % 4 != 0) {
    throw ValidationError("finetune: patch must be 0 or a multiple of 4");
  }
  if (!(options.lr > 0.0) || !(options.model_lr >= 0.0) || options.task_weight < 0.0) {
    throw ValidationError("finetune: invalid learning rate or task weight");
  }

  DistilledSet out;
  out.adjuster = adjuster;
  for (const ImagePair& p : subset) out.real_ids.push_back(p.id);

  AdjusterCNN& adj = out.adjuster;
  nn::AdamW adj_opt(adj.parameters(), {.weight_decay = 0.0f});
  nn::AdamW model_opt(restoration_model.parameters(), {});
  Rng rng = substream(options.seed, "finetune.batch");

  for (int step = 0; step < options.steps; ++step) {
    const CropBatch sub = crop_batch(subset, draw(subset.size(), options.batch, rng),
                                     options.patch, rng);
    const CropBatch ref = crop_batch(reference, draw(reference.size(), options.batch, rng),
                                     options.patch, rng);

    // Reference features use the current adjuster weights but are a
    // constant target for this step.
    Tensor ref_pooled;
    {
      Graph gr(/*grad_enabled=*/false);
      Var f = adj.features(gr, gr.constant(stack(ref.hq, &ref.lq)));
      Var pooled = nn::global_avg_pool(gr, f);
      ref_pooled = gr.value(pooled);
    }

    Graph g;
    Var hq = g.constant(stack(sub.hq));
    Var lq = g.constant(stack(sub.lq));
    Var hq_adj = adj.forward(g, hq).image;
    Var lq_adj = adj.forward(g, lq).image;
    Var adjusted = nn::concat0(g, {hq_adj, lq_adj});
    Var original = g.constant(stack(sub.hq, &sub.lq));
    Var l2 = nn::l2_norm(g, nn::sub(g, adjusted, original));

    Var pooled = nn::global_avg_pool(g, adj.features(g, adjusted));
    Var target = g.constant(ref_pooled);
    Var divergence = options.mode == DiscrepancyMode::kKl ? nn::kl_softmax(g, pooled, target)
                                                         : nn::cosine_distance(g, pooled, target);

    Var restored = restoration_model.forward(g, nn::clamp01(g, lq_adj));
    Var task = nn::mean_squared_error(g, restored, nn::clamp01(g, hq_adj));
    Var total = nn::add(g, nn::add(g, l2, divergence),
                        nn::scale(g, task, static_cast<float>(options.task_weight)));

    CurvePoint point{step, g.value(l2).item(), g.value(divergence).item(), g.value(task).item()};
    if (!std::isfinite(g.value(total).item())) {
      throw DivergenceError(fmt::format("finetune: non-finite loss at step {}", step),
                            static_cast<std::size_t>(step));
    }
    out.curve.push_back(point);

    adj_opt.zero_grad();
    model_opt.zero_grad();
    g.backward(total);
    adj_opt.step(static_cast<float>(options.lr));
    if (options.model_lr > 0.0) model_opt.step(static_cast<float>(options.model_lr));
  }

  out.adjusted_pairs.reserve(subset.size());
  for (const ImagePair& p : subset) out.adjusted_pairs.push_back(adjust_pair(adj, p));
  out.provenance = {{"finetune_steps", options.steps},
                    {"finetune_mode", to_string(options.mode)},
                    {"reference_count", reference.size()}};
  return out;
}

std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::string s = "step,l2,divergence,task\n";
  for (const CurvePoint& p : curve) {
    s += fmt::format("{},{},{},{}\n", p.step, trainer::format_metric(p.l2),
                     trainer::format_metric(p.divergence), trainer::format_metric(p.task));
  }
  return s;
}

// --- latent distillation -----------------------------------------------------

namespace {

struct LossGrads {
  std::vector<float> theta;
  Tensor d_image;  // d loss / d hq, with the LQ gradient passed straight through
};

LossGrads restoration_grads(trainer::RestorationModel& model, const Tensor& lq, const Tensor& hq,
                            bool want_image_grad) {
  const nn::ParameterList params = model.parameters();
  nn::zero_grads(params);
  Graph g;
  Var l = want_image_grad ? g.variable(lq) : g.constant(lq);
  Var h = want_image_grad ? g.variable(hq) : g.constant(hq);
  Var loss = nn::mean_squared_error(g, model.forward(g, l), h);
  if (!std::isfinite(g.value(loss).item())) {
    throw ValidationError("latent distillation: non-finite restoration loss");
  }
  g.backward(loss);
  LossGrads out{nn::flatten_grads(params), {}};
  if (want_image_grad) {
    out.d_image = g.grad(h);
    out.d_image.add_(g.grad(l));
  }
  return out;
}

class LatentProblem {
 public:
  LatentProblem(const Autoencoder& decoder, const std::vector<ImagePair>& sources,
                trainer::RestorationModel& model, const Tensor& z0, double latent_weight)
      : decoder_(decoder), sources_(sources), model_(model), z0_(z0),
        latent_weight_(latent_weight) {
    std::vector<const Image*> lq, hq;
    for (const ImagePair& p : sources) {
      lq.push_back(&p.lq);
      hq.push_back(&p.hq);
    }
    g_real_ = restoration_grads(model, nn::to_batch(lq), nn::to_batch(hq), false).theta;
  }

  struct Batch {
    Tensor hq, lq;
  };

  Batch synthesize(const Tensor& z) {
    Graph g(false);
    const Tensor hq = g.value(decoder_.decode(g, g.constant(z)));
    std::vector<Image> lq;
    for (std::size_t i = 0; i < sources_.size(); ++i) {
      Image img = nn::to_image(hq, static_cast<int>(i));
      clamp_unit(img);
      lq.push_back(corpus::degrade(img, sources_[i].degradation, sources_[i].seed));
    }
    return {hq, stack(lq)};
  }

  double latent_penalty(const Tensor& z) const {
    double s = 0.0;
    for (std::size_t i = 0; i < z.numel(); ++i) {
      const double d = static_cast<double>(z[i]) - z0_[i];
      s += d * d;
    }
    return latent_weight_ * s / static_cast<double>(z.numel());
  }

  double objective(const Tensor& z) {
    const Batch b = synthesize(z);
    const auto gs = restoration_grads(model_, b.lq, b.hq, false).theta;
    return gradient_match_loss(std::span<const float>(gs), std::span<const float>(g_real_)) +
           latent_penalty(z);
  }

  Tensor gradient(const Tensor& z) {
    const Batch b = synthesize(z);
    const auto gs = restoration_grads(model_, b.lq, b.hq, false).theta;

    // v = d(1 - cos(gs, gt)) / d gs
    double dot = 0.0, ns = 0.0, nt = 0.0;
    for (std::size_t i = 0; i < gs.size(); ++i) {
      dot += static_cast<double>(gs[i]) * g_real_[i];
      ns += static_cast<double>(gs[i]) * gs[i];
      nt += static_cast<double>(g_real_[i]) * g_real_[i];
    }
    Tensor dz(z.shape());
    if (ns > 0.0 && nt > 0.0) {
      const double norm_s = std::sqrt(ns), norm_t = std::sqrt(nt);
      const double cos = dot / (norm_s * norm_t);
      std::vector<double> v(gs.size());
      double nv = 0.0;
      for (std::size_t i = 0; i < gs.size(); ++i) {
        v[i] = -(g_real_[i] / (norm_s * norm_t) - cos * gs[i] / ns);
        nv += v[i] * v[i];
      }
      nv = std::sqrt(nv);
      if (nv > 0.0) {
        // d/dx (g_S . v) by a central difference along v in parameter space.
        const double eps = 0.01 / nv;
        const nn::ParameterList params = model_.parameters();
        const std::vector<float> theta = nn::flatten_values(params);
        std::vector<float> shifted(theta.size());
        auto image_grad_at = [&](double sign) {
          for (std::size_t i = 0; i < theta.size(); ++i) {
            shifted[i] = static_cast<float>(theta[i] + sign * eps * v[i]);
          }
          nn::assign_values(params, shifted);
          return restoration_grads(model_, b.lq, b.hq, true).d_image;
        };
        Tensor d_img = image_grad_at(1.0);
        d_img.add_scaled_(image_grad_at(-1.0), -1.0f);
        d_img.scale_(static_cast<float>(1.0 / (2.0 * eps)));
        nn::assign_values(params, theta);

        Graph g;
        Var zv = g.variable(z);
        Var out = decoder_.decode(g, zv);
        g.backward(out, d_img);
        dz = g.grad(zv);
      }
    }
    const double scale = 2.0 * latent_weight_ / static_cast<double>(z.numel());
    for (std::size_t i = 0; i < z.numel(); ++i) {
      dz[i] += static_cast<float>(scale * (static_cast<double>(z[i]) - z0_[i]));
    }
    return dz;
  }

 private:
  Autoencoder decoder_;  // own copy: backward writes parameter gradients
  const std::vector<ImagePair>& sources_;
  trainer::RestorationModel& model_;
  Tensor z0_;
  double latent_weight_;
  std::vector<float> g_real_;
};

}  // namespace

LatentResult distill_latents(const Autoencoder& decoder, const std::vector<ImagePair>& selected,
                             trainer::RestorationModel& restoration_model,
                             const LatentOptions& options) {
  if (options.count < 1) throw ValidationError("distill_latents: count must be >= 1");
  if (options.count > selected.size()) {
    throw ValidationError(fmt::format("distill_latents: {} synthetic samples requested but only {} "
                                      "selected samples are available",
                                      options.count, selected.size()));
  }
  if (options.steps < 0 || !(options.lr > 0.0) || options.latent_weight < 0.0 ||
      options.max_backtracks < 0) {
    throw ValidationError("distill_latents: invalid options");
  }
  const std::vector<ImagePair> sources(selected.begin(), selected.begin() + options.count);
  const int dim = decoder.config().latent_dim;
  const int m = static_cast<int>(options.count);

  Tensor z({m, dim});
  for (int i = 0; i < m; ++i) {
    const auto code = decoder.encode(sources[i].hq);
    std::copy(code.begin(), code.end(), z.data() + static_cast<std::size_t>(i) * dim);
  }

  LatentResult result;
  if (options.steps > 0) {
    LatentProblem problem(decoder, sources, restoration_model, z, options.latent_weight);
    double current = problem.objective(z);
    result.objective.push_back(current);
    double step_size = options.lr;
    for (int step = 0; step < options.steps; ++step) {
      const Tensor dz = problem.gradient(z);
      float max_abs = 0.0f;
      for (float v : dz.values()) max_abs = std::max(max_abs, std::abs(v));
      if (max_abs > 0.0f && std::isfinite(max_abs)) {
        // Steepest descent with the largest latent change equal to the
        // trial step size, halved until the objective improves. The next
        // search starts from twice the accepted size, capped at lr.
        double trial = step_size;
        for (int k = 0; k <= options.max_backtracks; ++k, trial *= 0.5) {
          Tensor candidate = z;
          candidate.add_scaled_(dz, static_cast<float>(-trial / max_abs));
          const double value = problem.objective(candidate);
          if (value < current) {
            z = std::move(candidate);
            current = value;
            step_size = std::min(options.lr, 2.0 * trial);
            break;
          }
        }
      }
      result.objective.push_back(current);
    }
  }

  for (int i = 0; i < m; ++i) {
    const float* row = z.data() + static_cast<std::size_t>(i) * dim;
    ImagePair p;
    p.id = "syn-" + sources[i].id;
    p.hq = decoder.decode(std::vector<float>(row, row + dim));
    clamp_unit(p.hq);
    p.degradation = sources[i].degradation;
    p.seed = sources[i].seed;
    p.lq = corpus::degrade(p.hq, p.degradation, p.seed);
    result.synthetic.push_back(std::move(p));
  }
  return result;
}

corpus::CorpusManifest save_distilled(const DistilledSet& set, const std::filesystem::path& dir,
                                      std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  std::vector<ImagePair> all = set.adjusted_pairs;
  all.insert(all.end(), set.synthetic_pairs.begin(), set.synthetic_pairs.end());
  corpus::CorpusManifest manifest = corpus::write_pairs(all, dir / "pairs", seed);
  set.adjuster.save(dir / "adjuster.bin");
  {
    std::ofstream f(dir / "finetune_curve.csv", std::ios::binary);
    f << curve_csv(set.curve);
    if (!f) throw IoError("cannot write " + (dir / "finetune_curve.csv").string());
  }
  nlohmann::json info{{"real_ids", set.real_ids},
                      {"adjusted_count", set.adjusted_pairs.size()},
                      {"synthetic_count", set.synthetic_pairs.size()},
                      {"provenance", set.provenance}};
  std::ofstream f(dir / "distilled.json", std::ios::binary);
  f << info.dump(2) << "\n";
  if (!f) throw IoError("cannot write " + (dir / "distilled.json").string());
  return manifest;
}

}  // namespace distillir::distill
