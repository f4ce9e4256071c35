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

#include "distillir/adjuster.hpp"

#include "distillir/errors.hpp"
#include "distillir/nn/convert.hpp"
#include "distillir/nn/serialize.hpp"

namespace distillir::distill {

using nn::Graph;
using nn::Tensor;
using nn::Var;

AdjusterCNN::AdjusterCNN(AdjusterConfig config, std::uint64_t seed) : config_(config) {
  if (config.depth < 2) throw ValidationError("adjuster depth must be >= 2");
  if (config.width < 1) throw ValidationError("adjuster width must be >= 1");
  feature_layer_ = config.feature_layer > 0 ? config.feature_layer : config.depth / 2;
  if (feature_layer_ >= config.depth) {
    throw ValidationError("adjuster feature layer must precede the output layer");
  }
  Rng rng = substream(seed, "adjuster.init");
  for (int i = 0; i < config.depth; ++i) {
    const int in = i == 0 ? 3 : config.width;
    const bool last = i == config.depth - 1;
    const int out = last ? 3 : config.width;
    layers_.emplace_back("conv" + std::to_string(i + 1), in, out, 3, rng, /*zero_init=*/last);
  }
}

AdjusterCNN::Output AdjusterCNN::forward(Graph& g, Var x) {
  Var h = x;
  Var feats;
  for (int i = 0; i + 1 < config_.depth; ++i) {
    h = nn::relu(g, layers_[i](g, h));
    if (i + 1 == feature_layer_) feats = h;
  }
  Var delta = layers_.back()(g, h);
  return {nn::add(g, x, delta), feats};
}

Var AdjusterCNN::features(Graph& g, Var x) {
  Var h = x;
  for (int i = 0; i < feature_layer_; ++i) h = nn::relu(g, layers_[i](g, h));
  return h;
}

Image AdjusterCNN::apply(const Image& img) const {
  if (img.channels() != 3) throw ValidationError("adjuster expects an RGB image");
  Graph g(/*grad_enabled=*/false);
  // A no-grad graph copies parameter values and never writes to them.
  auto& self = const_cast<AdjusterCNN&>(*this);
  Var x = g.constant(nn::to_batch(img));
  // Add the float delta to the double input so an identity adjuster
  // returns the input bit for bit.
  Tensor delta = g.value(self.forward(g, x).image);
  delta.add_scaled_(g.value(x), -1.0f);
  Image out = img;
  const Image d = nn::to_image(delta);
  auto o = out.data();
  auto dd = d.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += dd[i];
  clamp_unit(out);
  return out;
}

FeatureMap AdjusterCNN::extract(const Image& img) const {
  if (img.channels() != 3) throw ValidationError("adjuster expects an RGB image");
  Graph g(/*grad_enabled=*/false);
  auto& self = const_cast<AdjusterCNN&>(*this);
  const nn::Tensor& t = g.value(self.features(g, g.constant(nn::to_batch(img))));
  FeatureMap f{t.dim(1), t.dim(2), t.dim(3), {}};
  f.data.assign(t.values().begin(), t.values().end());
  return f;
}

FeatureMap extract_features(const AdjusterCNN& adjuster, const Image& img) {
  return adjuster.extract(img);
}

nn::ParameterList AdjusterCNN::parameters() {
  nn::ParameterList out;
  for (auto& l : layers_) l.collect(out);
  return out;
}

void AdjusterCNN::zero_parameters() {
  for (nn::Parameter* p : parameters()) p->value.fill(0.0f);
}

void AdjusterCNN::save(const std::filesystem::path& path) const {
  nlohmann::json cfg{{"depth", config_.depth},
                     {"width", config_.width},
                     {"feature_layer", feature_layer_}};
  nn::save_parameters(path, const_cast<AdjusterCNN&>(*this).parameters(), "adjuster_cnn", cfg);
}

AdjusterCNN AdjusterCNN::load(const std::filesystem::path& path) {
  const auto cfg = nn::read_blob_header(path).at("config");
  AdjusterConfig c{cfg.at("depth"), cfg.at("width"), cfg.at("feature_layer")};
  AdjusterCNN a(c, 0);
  nn::load_parameters(path, a.parameters(), "adjuster_cnn");
  return a;
}

}  // namespace distillir::distill
