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

struct AdjusterConfig {
  int depth = 8;          // number of 3x3 stride-1 conv layers, >= 2
  int width = 16;         // hidden channels
  int feature_layer = 0;  // 1-based layer whose ReLU output is exposed; 0 = depth / 2
};

// Per-channel feature map of one image, CHW, double precision.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  bool operator==(const FeatureMap&) const = default;
};

// Residual image-to-image CNN: output = input + last_conv(...). The last
// layer starts at zero so a fresh adjuster is the identity map; with every
// parameter at zero it is also the identity and all features are zero.
class AdjusterCNN {
 public:
  AdjusterCNN() : AdjusterCNN(AdjusterConfig{}, 0) {}
  AdjusterCNN(AdjusterConfig config, std::uint64_t seed);

  struct Output {
    nn::Var image;     // input + delta (not clamped)
    nn::Var features;  // ReLU output of the feature layer, [N, width, H, W]
  };

  Output forward(nn::Graph& g, nn::Var x);
  // Runs only the layers up to the feature layer.
  nn::Var features(nn::Graph& g, nn::Var x);

  // Adjusted copy of `img`, clamped to [0, 1].
  Image apply(const Image& img) const;
  FeatureMap extract(const Image& img) const;

  nn::ParameterList parameters();
  const AdjusterConfig& config() const noexcept { return config_; }
  int feature_layer() const noexcept { return feature_layer_; }
  void zero_parameters();

  void save(const std::filesystem::path& path) const;
  static AdjusterCNN load(const std::filesystem::path& path);

 private:
  AdjusterConfig config_;
  int feature_layer_ = 0;
  std::vector<nn::Conv2d> layers_;
};

// Features of the designated layer for an RGB image. Throws
// ValidationError when the image is not 3-channel.
FeatureMap extract_features(const AdjusterCNN& adjuster, const Image& img);

}  // namespace distillir::distill
