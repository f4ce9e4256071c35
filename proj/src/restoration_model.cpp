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

#include "distillir/restoration_model.hpp"

#include <algorithm>

#include "distillir/errors.hpp"
#include "distillir/nn/convert.hpp"
#include "distillir/nn/serialize.hpp"

namespace distillir::trainer {

using nn::Graph;
using nn::Var;

RestorationModel::RestorationModel(RestorationModelConfig config, std::uint64_t seed)
    : config_(config) {
  if (config.width < 1) throw ValidationError("restoration model width must be >= 1");
  Rng rng = substream(seed, "restoration.init");
  const int w = config.width;
  enc1a_ = nn::Conv2d("enc1a", 3, w, 3, rng);
  enc1b_ = nn::Conv2d("enc1b", w, w, 3, rng);
  enc2a_ = nn::Conv2d("enc2a", w, 2 * w, 3, rng);
  enc2b_ = nn::Conv2d("enc2b", 2 * w, 2 * w, 3, rng);
  mid_a_ = nn::Conv2d("mid_a", 2 * w, 4 * w, 3, rng);
  mid_b_ = nn::Conv2d("mid_b", 4 * w, 4 * w, 3, rng);
  dec2a_ = nn::Conv2d("dec2a", 4 * w, 2 * w, 3, rng);
  dec2b_ = nn::Conv2d("dec2b", 2 * w, 2 * w, 3, rng);
  dec1a_ = nn::Conv2d("dec1a", 2 * w, w, 3, rng);
  dec1b_ = nn::Conv2d("dec1b", w, w, 3, rng);
  head_ = nn::Conv2d("head", w, 3, 3, rng, /*zero_init=*/true);
}

Var RestorationModel::forward(Graph& g, Var x) {
  const auto& shape = g.value(x).shape();
  if (shape.size() != 4 || shape[1] != 3 || shape[2] % 4 != 0 || shape[3] % 4 != 0) {
    throw ValidationError("restoration model expects [N,3,H,W] with H,W divisible by 4");
  }
  Var e1 = nn::relu(g, enc1b_(g, nn::relu(g, enc1a_(g, x))));
  Var e2 = nn::relu(g, enc2b_(g, nn::relu(g, enc2a_(g, nn::avg_pool2(g, e1)))));
  Var m = nn::relu(g, mid_b_(g, nn::relu(g, mid_a_(g, nn::avg_pool2(g, e2)))));
  Var d2 = nn::add(g, nn::relu(g, dec2a_(g, nn::upsample2(g, m))), e2);
  d2 = nn::relu(g, dec2b_(g, d2));
  Var d1 = nn::add(g, nn::relu(g, dec1a_(g, nn::upsample2(g, d2))), e1);
  d1 = nn::relu(g, dec1b_(g, d1));
  return nn::add(g, x, head_(g, d1));
}

Image RestorationModel::restore(const Image& lq) const {
  if (lq.channels() != 3) throw ValidationError("restore: expected an RGB image");
  const int h = lq.height(), w = lq.width();
  const int ph = (h + 3) / 4 * 4, pw = (w + 3) / 4 * 4;
  Image padded(ph, pw, 3);
  for (int y = 0; y < ph; ++y)
    for (int x = 0; x < pw; ++x)
      for (int c = 0; c < 3; ++c) padded.at(y, x, c) = lq.at(std::min(y, h - 1), std::min(x, w - 1), c);
  Graph g(/*grad_enabled=*/false);
  // A no-grad graph copies parameter values and never writes to them.
  auto& self = const_cast<RestorationModel&>(*this);
  Var out = self.forward(g, g.constant(nn::to_batch(padded)));
  Image full = nn::to_image(g.value(out));
  Image res(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) res.at(y, x, c) = full.at(y, x, c);
  clamp_unit(res);
  return res;
}

nn::ParameterList RestorationModel::parameters() {
  nn::ParameterList out;
  for (nn::Conv2d* c : {&enc1a_, &enc1b_, &enc2a_, &enc2b_, &mid_a_, &mid_b_, &dec2a_,
                        &dec2b_, &dec1a_, &dec1b_, &head_}) {
    c->collect(out);
  }
  return out;
}

std::size_t RestorationModel::parameter_count() const {
  return nn::count_parameters(const_cast<RestorationModel&>(*this).parameters());
}

void RestorationModel::save(const std::filesystem::path& path,
                            const nlohmann::json& extra) const {
  nlohmann::json cfg{{"width", config_.width}};
  if (!extra.is_null()) cfg["extra"] = extra;
  nn::save_parameters(path, const_cast<RestorationModel&>(*this).parameters(),
                      "restoration_model", cfg);
}

RestorationModel RestorationModel::load(const std::filesystem::path& path) {
  const auto header = nn::read_blob_header(path);
  RestorationModelConfig cfg;
  cfg.width = header.at("config").at("width").get<int>();
  RestorationModel model(cfg, 0);
  nn::load_parameters(path, model.parameters(), "restoration_model");
  return model;
}

}  // namespace distillir::trainer
