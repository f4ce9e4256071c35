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

#include "distillir/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "distillir/errors.hpp"
#include "distillir/nn/convert.hpp"
#include "distillir/nn/optim.hpp"
#include "distillir/nn/serialize.hpp"

namespace distillir::distill {

using nn::Graph;
using nn::Var;

Autoencoder::Autoencoder(AutoencoderConfig config, std::uint64_t seed) : config_(config) {
  if (config.image_size < 8 || config.image_size % 8 != 0) {
    throw ValidationError("autoencoder image size must be a positive multiple of 8");
  }
  if (config.latent_dim < 1 || config.width < 1) {
    throw ValidationError("autoencoder latent_dim and width must be >= 1");
  }
  Rng rng = substream(seed, "autoencoder.init");
  const int w = config.width;
  const int s8 = config.image_size / 8;
  const int flat = 2 * w * s8 * s8;
  enc1_ = nn::Conv2d("enc1", 3, w, 3, rng);
  enc2_ = nn::Conv2d("enc2", w, 2 * w, 3, rng);
  enc3_ = nn::Conv2d("enc3", 2 * w, 2 * w, 3, rng);
  enc_fc_ = nn::Linear("enc_fc", flat, config.latent_dim, rng);
  dec_fc_ = nn::Linear("dec_fc", config.latent_dim, flat, rng);
  dec1_ = nn::Conv2d("dec1", 2 * w, 2 * w, 3, rng);
  dec2_ = nn::Conv2d("dec2", 2 * w, w, 3, rng);
  dec3_ = nn::Conv2d("dec3", w, w, 3, rng);
  dec_out_ = nn::Conv2d("dec_out", w, 3, 3, rng);
}

Var Autoencoder::encode(Graph& g, Var x) {
  const auto& shape = g.value(x).shape();
  if (shape.size() != 4 || shape[1] != 3 || shape[2] != config_.image_size ||
      shape[3] != config_.image_size) {
    throw ValidationError("autoencoder: expected [N, 3, S, S] input with S = " +
                          std::to_string(config_.image_size));
  }
  const int n = shape[0];
  Var h = nn::avg_pool2(g, nn::relu(g, enc1_(g, x)));
  h = nn::avg_pool2(g, nn::relu(g, enc2_(g, h)));
  h = nn::avg_pool2(g, nn::relu(g, enc3_(g, h)));
  const int flat = static_cast<int>(g.value(h).numel()) / n;
  return enc_fc_(g, nn::reshape(g, h, {n, flat}));
}

Var Autoencoder::decode(Graph& g, Var z) {
  const auto& shape = g.value(z).shape();
  if (shape.size() != 2 || shape[1] != config_.latent_dim) {
    throw ValidationError("autoencoder: expected [N, latent_dim] latent");
  }
  const int n = shape[0];
  const int s8 = config_.image_size / 8;
  Var h = nn::relu(g, dec_fc_(g, z));
  h = nn::reshape(g, h, {n, 2 * config_.width, s8, s8});
  h = nn::relu(g, dec1_(g, nn::upsample2(g, h)));
  h = nn::relu(g, dec2_(g, nn::upsample2(g, h)));
  h = nn::relu(g, dec3_(g, nn::upsample2(g, h)));
  return nn::sigmoid(g, dec_out_(g, h));
}

std::vector<float> Autoencoder::encode(const Image& img) const {
  Graph g(/*grad_enabled=*/false);
  auto& self = const_cast<Autoencoder&>(*this);
  const nn::Tensor& z = g.value(self.encode(g, g.constant(nn::to_batch(img))));
  return {z.values().begin(), z.values().end()};
}

Image Autoencoder::decode(const std::vector<float>& z) const {
  if (static_cast<int>(z.size()) != config_.latent_dim) {
    throw ValidationError("autoencoder: latent has wrong length");
  }
  Graph g(/*grad_enabled=*/false);
  auto& self = const_cast<Autoencoder&>(*this);
  Var out = self.decode(g, g.constant(nn::Tensor::from({1, config_.latent_dim}, z)));
  return nn::to_image(g.value(out));
}

nn::ParameterList Autoencoder::parameters() {
  nn::ParameterList out;
  for (nn::Conv2d* c : {&enc1_, &enc2_, &enc3_}) c->collect(out);
  enc_fc_.collect(out);
  for (nn::Parameter* p : decoder_parameters()) out.push_back(p);
  return out;
}

nn::ParameterList Autoencoder::decoder_parameters() {
  nn::ParameterList out;
  dec_fc_.collect(out);
  for (nn::Conv2d* c : {&dec1_, &dec2_, &dec3_, &dec_out_}) c->collect(out);
  return out;
}

void Autoencoder::save(const std::filesystem::path& path) const {
  nlohmann::json cfg{{"image_size", config_.image_size},
                     {"latent_dim", config_.latent_dim},
                     {"width", config_.width}};
  nn::save_parameters(path, const_cast<Autoencoder&>(*this).parameters(), "autoencoder", cfg);
}

Autoencoder Autoencoder::load(const std::filesystem::path& path) {
  const auto cfg = nn::read_blob_header(path).at("config");
  Autoencoder a({cfg.at("image_size"), cfg.at("latent_dim"), cfg.at("width")}, 0);
  nn::load_parameters(path, a.parameters(), "autoencoder");
  return a;
}

namespace {

double reconstruction_loss(Autoencoder& model, const std::vector<Image>& images, int batch) {
  double total = 0.0;
  for (std::size_t b = 0; b < images.size(); b += batch) {
    std::vector<const Image*> ptrs;
    for (std::size_t i = b; i < std::min(images.size(), b + batch); ++i) ptrs.push_back(&images[i]);
    Graph g(false);
    Var x = g.constant(nn::to_batch(ptrs));
    Var loss = nn::mean_squared_error(g, model.decode(g, model.encode(g, x)), x);
    total += g.value(loss).item() * static_cast<double>(ptrs.size());
  }
  return total / static_cast<double>(images.size());
}

}  // namespace

DecoderTrainResult train_decoder(Autoencoder& model, const std::vector<Image>& images,
                                 const DecoderTrainOptions& options) {
  if (images.size() < 2) throw ValidationError("train_decoder: need at least 2 images");
  if (options.epochs < 0 || options.batch < 1 || !(options.lr > 0.0)) {
    throw ValidationError("train_decoder: invalid options");
  }
  const int s = model.config().image_size;
  for (const Image& img : images) {
    if (img.height() != s || img.width() != s || img.channels() != 3) {
      throw ValidationError("train_decoder: images must be RGB " + std::to_string(s) + "x" +
                            std::to_string(s));
    }
  }
  DecoderTrainResult result;
  result.initial_loss = reconstruction_loss(model, images, options.batch);

  nn::AdamW opt(model.parameters(), {.weight_decay = 0.0});
  Rng rng = substream(options.seed, "decoder.shuffle");
  std::vector<std::size_t> order(images.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t b = 0; b < order.size(); b += options.batch) {
      std::vector<const Image*> ptrs;
      for (std::size_t i = b; i < std::min(order.size(), b + options.batch); ++i) {
        ptrs.push_back(&images[order[i]]);
      }
      opt.zero_grad();
      Graph g;
      Var x = g.constant(nn::to_batch(ptrs));
      Var loss = nn::mean_squared_error(g, model.decode(g, model.encode(g, x)), x);
      const double value = g.value(loss).item();
      if (!std::isfinite(value)) {
        throw DivergenceError("train_decoder: non-finite reconstruction loss", epoch);
      }
      g.backward(loss);
      opt.step(options.lr);
      sum += value * static_cast<double>(ptrs.size());
      seen += ptrs.size();
    }
    result.epoch_losses.push_back(sum / static_cast<double>(seen));
  }
  result.final_loss = reconstruction_loss(model, images, options.batch);
  return result;
}

}  // namespace distillir::distill
