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

#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "distillir/errors.hpp"
#include "distillir/nn/convert.hpp"
#include "distillir/trainer.hpp"
#include "helpers.hpp"

namespace distillir::trainer {
namespace {

TEST(CosineLr, ClosedForm) {
  EXPECT_DOUBLE_EQ(cosine_lr(0, 100, 3e-4), 3e-4);
  EXPECT_NEAR(cosine_lr(100, 100, 3e-4), 0.0, 1e-20);
  EXPECT_NEAR(cosine_lr(50, 100, 3e-4), 1.5e-4, 1e-18);
  EXPECT_THROW(cosine_lr(101, 100, 1.0), ValidationError);
  EXPECT_THROW(cosine_lr(-1, 100, 1.0), ValidationError);
  for (long s = 1; s <= 100; ++s) EXPECT_LE(cosine_lr(s, 100, 1.0), cosine_lr(s - 1, 100, 1.0));
}

std::vector<corpus::ImagePair> toy_pairs(std::size_t n, std::uint64_t seed) {
  corpus::SynthOptions o;
  o.mix = {{corpus::DegradationSpec::noise(25), 1.0}};
  o.count = n;
  o.height = 32;
  o.width = 32;
  o.seed = seed;
  return corpus::synth_pairs(o);
}

TEST(RestorationModel, IdentityAtInitialization) {
  const RestorationModel model({}, 3);
  const Image img = testing::random_image(20, 28, 3, 1);
  const Image out = model.restore(img);
  ASSERT_TRUE(out.same_shape(img));
  for (std::size_t i = 0; i < img.size(); ++i) {
    EXPECT_NEAR(out.data()[i], img.data()[i], 1e-6);
  }
}

TEST(TrainStep, AccumulationMatchesFullBatch) {
  const auto pairs = toy_pairs(16, 2);
  std::vector<const Image*> lq, hq;
  for (const auto& p : pairs) {
    lq.push_back(&p.lq);
    hq.push_back(&p.hq);
  }
  const nn::Tensor tl = nn::to_batch(lq), th = nn::to_batch(hq);
  auto params_after = [&](int accum) {
    RestorationModel model({8}, 5);
    // Move off the identity so every layer receives gradient.
    nn::AdamW warm(model.parameters());
    train_step(model, warm, tl, th, 1, 1e-3);
    nn::AdamW opt(model.parameters());
    train_step(model, opt, tl, th, accum, 1e-3);
    return nn::flatten_values(model.parameters());
  };
  const auto base = params_after(1);
  for (int k : {4, 8}) {
    const auto other = params_after(k);
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
      diff += (double(base[i]) - other[i]) * (double(base[i]) - other[i]);
      norm += double(base[i]) * base[i];
    }
    EXPECT_LE(std::sqrt(diff / norm), 1e-5) << "accum " << k;
  }
}

TEST(TrainRestoration, LossDecreasesOverEpochs) {
  const auto pool = toy_pairs(200, 7);
  RestorationModel model({8}, 7);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch = 8;
  cfg.patch = 32;
  cfg.lr0 = 1e-3;
  cfg.seed = 7;
  const auto history = train_restoration(model, pool, cfg);
  ASSERT_EQ(history.epochs.size(), 5u);
  EXPECT_LT(history.epochs.back().mean_loss, history.epochs.front().mean_loss);
  EXPECT_EQ(history.steps.size(), 5u * 25u);
  EXPECT_EQ(history.steps_csv().substr(0, 13), "step,lr,loss\n");
}

TEST(TrainRestoration, DeterministicGivenSeed) {
  const auto pool = toy_pairs(24, 3);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch = 4;
  cfg.patch = 16;
  cfg.accum_steps = 2;
  cfg.seed = 4;
  RestorationModel a({8}, 1), b({8}, 1);
  train_restoration(a, pool, cfg);
  train_restoration(b, pool, cfg);
  EXPECT_EQ(nn::flatten_values(a.parameters()), nn::flatten_values(b.parameters()));
}

TEST(TrainRestoration, DivergenceReportsStep) {
  const auto pool = toy_pairs(8, 3);
  RestorationModel model({8}, 1);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch = 4;
  cfg.patch = 16;
  cfg.lr0 = 1e30;
  try {
    train_restoration(model, pool, cfg);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.step(), 1u);
  }
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  c.batch = 6;
  c.accum_steps = 4;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.patch = 30;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  EXPECT_EQ(TrainConfig::from_json(c.to_json()).to_json(), c.to_json());
}

TEST(Evaluate, PerfectRestorationAndFormat) {
  auto test = toy_pairs(5, 1);
  for (auto& p : test) p.lq = p.hq;
  const auto table = evaluate([](const Image& x) { return x; }, test);
  EXPECT_EQ(table.mean_psnr, std::numeric_limits<double>::infinity());
  EXPECT_NEAR(table.mean_ssim, 1.0, 1e-9);
  EXPECT_EQ(table.row_count(), 6u);
  const std::string csv = table.to_csv();
  EXPECT_EQ(csv.substr(0, 13), "id,psnr,ssim\n");
  EXPECT_NE(csv.find("mean,inf,1.000000"), std::string::npos);
}

TEST(Evaluate, Deterministic) {
  const auto test = toy_pairs(4, 2);
  const RestorationModel model({8}, 2);
  EXPECT_EQ(evaluate(model, test).to_csv(), evaluate(model, test).to_csv());
}

TEST(RestorationModel, SaveLoadRoundTrip) {
  testing::TempDir dir;
  RestorationModel m({8}, 4);
  m.save(dir.path() / "m.bin");
  auto loaded = RestorationModel::load(dir.path() / "m.bin");
  EXPECT_EQ(nn::flatten_values(loaded.parameters()), nn::flatten_values(m.parameters()));
}

}  // namespace
}  // namespace distillir::trainer
