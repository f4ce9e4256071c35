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

#include "distillir/vit.hpp"

#include <cmath>

#include "distillir/errors.hpp"
#include "distillir/imageops.hpp"
#include "distillir/nn/serialize.hpp"

namespace distillir::scorer {

using nn::Graph;
using nn::Var;

LearnedScorer::LearnedScorer(ScorerConfig config, std::uint64_t seed) : config_(config) {
  if (config.patch < 1 || config.depth < 0 || config.width < 1 || config.mlp_ratio < 1) {
    throw ValidationError("scorer config values must be positive");
  }
  Rng rng = substream(seed, "scorer.init");
  const int d = config.width;
  embed_ = nn::Linear("embed", config.patch * config.patch, d, rng);
  for (int i = 0; i < config.depth; ++i) {
    const std::string p = "block" + std::to_string(i);
    Block b;
    b.norm1 = nn::LayerNorm(p + ".norm1", d);
    b.norm2 = nn::LayerNorm(p + ".norm2", d);
    b.q = nn::Linear(p + ".q", d, d, rng);
    b.k = nn::Linear(p + ".k", d, d, rng);
    b.v = nn::Linear(p + ".v", d, d, rng);
    b.proj = nn::Linear(p + ".proj", d, d, rng);
    b.fc1 = nn::Linear(p + ".fc1", d, d * config.mlp_ratio, rng);
    b.fc2 = nn::Linear(p + ".fc2", d * config.mlp_ratio, d, rng);
    // Small residual branches at init keep the early blocks near identity.
    b.proj.weight.value.scale_(0.1f);
    b.fc2.weight.value.scale_(0.1f);
    blocks_.push_back(std::move(b));
  }
  final_norm_ = nn::LayerNorm("final_norm", d);
  head_ = nn::Linear("head", d, 1, rng);
}

nn::Tensor LearnedScorer::patchify(const Image& img) const {
  const int p = config_.patch;
  const int ty = img.height() / p, tx = img.width() / p;
  if (ty < 1 || tx < 1) throw ValidationError("scorer: image smaller than one patch");
  const Image y = imageops::luminance(img);
  nn::Tensor out({ty * tx, p * p});
  for (int by = 0; by < ty; ++by) {
    for (int bx = 0; bx < tx; ++bx) {
      float* row = out.data() + static_cast<std::size_t>(by * tx + bx) * p * p;
      for (int r = 0; r < p; ++r)
        for (int c = 0; c < p; ++c)
          row[r * p + c] = static_cast<float>(y.at(by * p + r, bx * p + c, 0) - 0.5);
    }
  }
  return out;
}

Var LearnedScorer::forward(Graph& g, const Image& img) {
  Var x = embed_(g, g.constant(patchify(img)));
  const float inv_sqrt_d = 1.0f / std::sqrt(static_cast<float>(config_.width));
  for (Block& b : blocks_) {
    Var h = b.norm1(g, x);
    Var scores = nn::scale(g, nn::matmul(g, b.q(g, h), nn::transpose(g, b.k(g, h))), inv_sqrt_d);
    Var att = nn::matmul(g, nn::softmax_rows(g, scores), b.v(g, h));
    x = nn::add(g, x, b.proj(g, att));
    Var m = b.fc2(g, nn::relu(g, b.fc1(g, b.norm2(g, x))));
    x = nn::add(g, x, m);
  }
  Var pooled = nn::mean_rows(g, final_norm_(g, x));
  return nn::sigmoid(g, head_(g, pooled));
}

double LearnedScorer::predict(const Image& img) const {
  Graph g(/*grad_enabled=*/false);
  // A no-grad graph copies parameter values and never writes to them.
  auto& self = const_cast<LearnedScorer&>(*this);
  return g.value(self.forward(g, img)).item();
}

nn::ParameterList LearnedScorer::parameters() {
  nn::ParameterList out;
  embed_.collect(out);
  for (Block& b : blocks_) {
    b.norm1.collect(out);
    b.q.collect(out);
    b.k.collect(out);
    b.v.collect(out);
    b.proj.collect(out);
    b.norm2.collect(out);
    b.fc1.collect(out);
    b.fc2.collect(out);
  }
  final_norm_.collect(out);
  head_.collect(out);
  return out;
}

void LearnedScorer::save(const std::filesystem::path& path) const {
  nlohmann::json cfg{{"patch", config_.patch},
                     {"depth", config_.depth},
                     {"width", config_.width},
                     {"mlp_ratio", config_.mlp_ratio}};
  nn::save_parameters(path, const_cast<LearnedScorer&>(*this).parameters(), "learned_scorer", cfg);
}

LearnedScorer LearnedScorer::load(const std::filesystem::path& path) {
  const auto cfg = nn::read_blob_header(path).at("config");
  ScorerConfig c;
  c.patch = cfg.at("patch");
  c.depth = cfg.at("depth");
  c.width = cfg.at("width");
  c.mlp_ratio = cfg.at("mlp_ratio");
  LearnedScorer s(c, 0);
  nn::load_parameters(path, s.parameters(), "learned_scorer");
  return s;
}

bool LearnedScorer::operator==(const LearnedScorer& other) const {
  auto a = const_cast<LearnedScorer&>(*this).parameters();
  auto b = const_cast<LearnedScorer&>(other).parameters();
  return a.size() == b.size() && nn::flatten_values(a) == nn::flatten_values(b);
}

}  // namespace distillir::scorer
