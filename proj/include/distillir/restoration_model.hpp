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

#include <json.hpp>

#include "distillir/image.hpp"
#include "distillir/nn/layers.hpp"

namespace distillir::trainer {

struct RestorationModelConfig {
  int width = 16;  // channels at full resolution; 2x and 4x deeper down
};

// Three-scale encoder-decoder with additive skips and a global residual:
// output = input + head(features). The head is zero-initialized, so a
// fresh model is the identity map. No normalization layers, so gradients
// of a batch are exactly the mean of per-sample gradients.
class RestorationModel {
 public:
  RestorationModel() : RestorationModel(RestorationModelConfig{}, 0) {}
  RestorationModel(RestorationModelConfig config, std::uint64_t seed);

  // x: [N, 3, H, W] with H, W divisible by 4.
  nn::Var forward(nn::Graph& g, nn::Var x);
  // Full-image inference: edge-pads to a multiple of 4, crops back and
  // clamps to [0, 1].
  Image restore(const Image& lq) const;

  nn::ParameterList parameters();
  std::size_t parameter_count() const;
  const RestorationModelConfig& config() const noexcept { return config_; }

  void save(const std::filesystem::path& path, const nlohmann::json& extra = {}) const;
  static RestorationModel load(const std::filesystem::path& path);

 private:
  RestorationModelConfig config_;
  nn::Conv2d enc1a_, enc1b_, enc2a_, enc2b_, mid_a_, mid_b_, dec2a_, dec2b_,
      dec1a_, dec1b_, head_;
};

}  // namespace distillir::trainer
