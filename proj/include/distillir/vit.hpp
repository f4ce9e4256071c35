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

namespace distillir::scorer {

struct ScorerConfig {
  int patch = 8;   // square patch side, in pixels
  int depth = 2;   // number of attention blocks
  int width = 32;  // token embedding width
  int mlp_ratio = 2;
};

// Patch-attention regressor: luminance patches -> linear embedding ->
// `depth` pre-norm blocks (single-head self-attention + MLP) -> mean over
// tokens -> linear head -> sigmoid. No positional embedding, so the model
// accepts any image size (trailing rows/columns that do not fill a patch
// are ignored) and its output is always in (0, 1).
class LearnedScorer {
 public:
  LearnedScorer() : LearnedScorer(ScorerConfig{}, 0) {}
  LearnedScorer(ScorerConfig config, std::uint64_t seed);

  nn::Var forward(nn::Graph& g, const Image& img);
  double predict(const Image& img) const;

  nn::ParameterList parameters();
  const ScorerConfig& config() const noexcept { return config_; }

  void save(const std::filesystem::path& path) const;
  static LearnedScorer load(const std::filesystem::path& path);

  bool operator==(const LearnedScorer& other) const;

 private:
  struct Block {
    nn::LayerNorm norm1, norm2;
    nn::Linear q, k, v, proj, fc1, fc2;
  };

  // [T, patch*patch] luminance patches.
  nn::Tensor patchify(const Image& img) const;

  ScorerConfig config_;
  nn::Linear embed_;
  std::vector<Block> blocks_;
  nn::LayerNorm final_norm_;
  nn::Linear head_;
};

}  // namespace distillir::scorer
