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
#include <vector>

#include "distillir/image.hpp"
#include "distillir/nn/layers.hpp"

namespace distillir::distill {

struct AutoencoderConfig {
  int image_size = 64;  // square side, divisible by 8
  int latent_dim = 32;
  int width = 16;
};

// Convolutional autoencoder mapping a square RGB image to a latent vector
// and back. The decoder ends in a sigmoid, so decoded images lie in (0, 1).
class Autoencoder {
 public:
  Autoencoder() : Autoencoder(AutoencoderConfig{}, 0) {}
  Autoencoder(AutoencoderConfig config, std::uint64_t seed);

  // x: [N, 3, S, S] -> [N, latent_dim]
  nn::Var encode(nn::Graph& g, nn::Var x);
  // z: [N, latent_dim] -> [N, 3, S, S]
  nn::Var decode(nn::Graph& g, nn::Var z);

  std::vector<float> encode(const Image& img) const;
  Image decode(const std::vector<float>& z) const;

  nn::ParameterList parameters();
  nn::ParameterList decoder_parameters();
  const AutoencoderConfig& config() const noexcept { return config_; }

  void save(const std::filesystem::path& path) const;
  static Autoencoder load(const std::filesystem::path& path);

 private:
  AutoencoderConfig config_;
  nn::Conv2d enc1_, enc2_, enc3_;
  nn::Linear enc_fc_, dec_fc_;
  nn::Conv2d dec1_, dec2_, dec3_, dec_out_;
};

struct DecoderTrainOptions {
  int epochs = 10;
  double lr = 1e-3;
  int batch = 16;
  std::uint64_t seed = 0;
};

struct DecoderTrainResult {
  double initial_loss = 0.0;  // mean reconstruction MSE before training
  double final_loss = 0.0;    // and after
  std::vector<double> epoch_losses;
};

// Trains encoder and decoder jointly on reconstruction MSE. Images must
// match the configured square size.
DecoderTrainResult train_decoder(Autoencoder& model, const std::vector<Image>& images,
                                 const DecoderTrainOptions& options);

}  // namespace distillir::distill
