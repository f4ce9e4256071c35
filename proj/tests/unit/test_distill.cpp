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
#include <fstream>

#include <gtest/gtest.h>

#include "distillir/distill.hpp"
#include "distillir/errors.hpp"
#include "distillir/trainer.hpp"
#include "helpers.hpp"

namespace distillir::distill {
namespace {

using distillir::testing::random_image;

std::vector<corpus::ImagePair> pairs(std::size_t n, int size, std::uint64_t seed) {
  corpus::SynthOptions o;
  o.mix = {{corpus::DegradationSpec::noise(25), 0.5},
           {corpus::DegradationSpec::parse("rain{density=25000,length=10}"), 0.5}};
  o.count = n;
  o.height = size;
  o.width = size;
  o.seed = seed;
  return corpus::synth_pairs(o);
}

FeatureMap map_of(int c, int h, int w, std::vector<double> data) {
  return {c, h, w, std::move(data)};
}

TEST(Adjuster, FeaturesOfZeroNetworkAreZero) {
  AdjusterCNN adj({}, 1);
  adj.zero_parameters();
  const FeatureMap f = extract_features(adj, random_image(16, 16, 3, 2));
  for (double v : f.data) EXPECT_EQ(v, 0.0);
  const Image img = random_image(16, 16, 3, 3);
  EXPECT_EQ(adj.apply(img), img);
}

TEST(Adjuster, FeatureShapeAndDeterminism) {
  const AdjusterCNN adj({}, 4);
  const Image img = random_image(64, 64, 3, 5);
  const FeatureMap f = extract_features(adj, img);
  EXPECT_EQ(f.channels, 16);
  EXPECT_EQ(f.height, 64);
  EXPECT_EQ(f.width, 64);
  EXPECT_EQ(f.data.size(), 16u * 64u * 64u);
  EXPECT_EQ(adj.feature_layer(), 4);
  EXPECT_EQ(extract_features(adj, img), f);
  EXPECT_THROW(extract_features(adj, random_image(8, 8, 1, 1)), ValidationError);
}

TEST(Adjuster, IdentityAtInitialization) {
  const AdjusterCNN adj({}, 6);
  const Image img = random_image(20, 12, 3, 7);
  EXPECT_EQ(adj.apply(img), img);
}

TEST(Adjuster, SaveLoadRoundTrip) {
  testing::TempDir dir;
  AdjusterCNN adj({6, 8, 0}, 2);
  adj.save(dir.path() / "a.bin");
  AdjusterCNN loaded = AdjusterCNN::load(dir.path() / "a.bin");
  EXPECT_EQ(loaded.config().depth, 6);
  EXPECT_EQ(nn::flatten_values(loaded.parameters()), nn::flatten_values(adj.parameters()));
}

TEST(GradientMatchLoss, Identities) {
  const std::vector<double> g{0.5, -1.0, 2.0, 0.25};
  std::vector<double> neg = g;
  for (double& v : neg) v = -v;
  EXPECT_NEAR(gradient_match_loss(g, g), 0.0, 1e-9);
  EXPECT_NEAR(gradient_match_loss(g, neg), 2.0, 1e-9);
  EXPECT_NEAR(gradient_match_loss(std::vector<double>{1, 0, 0}, std::vector<double>{0, 3, 0}), 1.0,
              1e-9);
  EXPECT_THROW(gradient_match_loss(std::vector<double>{0, 0}, std::vector<double>{0, 0}),
               ValidationError);
  EXPECT_THROW(gradient_match_loss(std::vector<double>{1}, std::vector<double>{1, 2}),
               ValidationError);
}

TEST(GradientMatchLoss, ScaleInvariantAndBounded) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(10 + trial), b(10 + trial);
    for (double& v : a) v = nd(rng);
    for (double& v : b) v = nd(rng);
    const double base = gradient_match_loss(a, b);
    EXPECT_GE(base, 0.0);
    EXPECT_LE(base, 2.0);
    std::vector<double> scaled = a;
    const double s = scale(rng);
    for (double& v : scaled) v *= s;
    EXPECT_NEAR(gradient_match_loss(scaled, b), base, 1e-12);
  }
}

TEST(DistributionDiscrepancy, Identities) {
  const FeatureMap f = map_of(3, 2, 2, {1, 2, 3, 4, 0, 0, 1, 1, -1, 2, 5, 0});
  EXPECT_EQ(distribution_discrepancy(f, f, DiscrepancyMode::kKl), 0.0);
  EXPECT_EQ(distribution_discrepancy(f, f, DiscrepancyMode::kCosine), 0.0);
  const double ln2 = std::log(2.0);
  const double kl = distribution_discrepancy(map_of(2, 1, 1, {0.0, ln2}), map_of(2, 1, 1, {ln2, 0.0}),
                                             DiscrepancyMode::kKl);
  EXPECT_NEAR(kl, ln2 / 3.0, 1e-9);
}

TEST(DistributionDiscrepancy, KlIsNonNegative) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    FeatureMap a = map_of(5, 3, 2, std::vector<double>(30)), b = a;
    for (double& v : a.data) v = nd(rng);
    for (double& v : b.data) v = nd(rng);
    EXPECT_GE(distribution_discrepancy(a, b, DiscrepancyMode::kKl), 0.0);
    const double c = distribution_discrepancy(a, b, DiscrepancyMode::kCosine);
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 2.0);
  }
}

TEST(DistributionDiscrepancy, RejectsBadInput) {
  const FeatureMap a = map_of(2, 1, 1, {0.0, 1.0});
  const FeatureMap nan = map_of(2, 1, 1, {0.0, std::nan("")});
  EXPECT_THROW(distribution_discrepancy(a, nan, DiscrepancyMode::kKl), ValidationError);
  EXPECT_THROW(distribution_discrepancy(a, map_of(1, 1, 2, {0, 1}), DiscrepancyMode::kKl),
               ValidationError);
  EXPECT_EQ(parse_mode("cosine"), DiscrepancyMode::kCosine);
  EXPECT_THROW(parse_mode("js"), ConfigError);
}

TEST(PixelFeatureLoss, ClosedForms) {
  const Image x = random_image(6, 5, 3, 1);
  const FeatureMap f = map_of(2, 1, 1, {0.3, -0.2});
  EXPECT_EQ(pixel_feature_loss(x, x, f, f, DiscrepancyMode::kKl), 0.0);
  const Image a(6, 5, 3, 0.2), b(6, 5, 3, 0.3);
  const double n = 6 * 5;
  EXPECT_NEAR(pixel_feature_loss(a, b, f, f, DiscrepancyMode::kKl), 0.1 * std::sqrt(3 * n), 1e-12);
}

TEST(PixelFeatureLoss, MonotoneInFeatureDivergence) {
  const Image a = random_image(4, 4, 3, 2), b = random_image(4, 4, 3, 3);
  const FeatureMap base = map_of(2, 1, 1, {0.0, 0.0});
  double prev = pixel_feature_loss(a, b, base, base, DiscrepancyMode::kKl);
  for (double gap = 0.25; gap < 4.0; gap += 0.25) {
    const double v = pixel_feature_loss(a, b, base, map_of(2, 1, 1, {0.0, gap}), DiscrepancyMode::kKl);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(Finetune, ZeroStepsLeavesImagesUnchanged) {
  const auto subset = pairs(4, 32, 1), reference = pairs(8, 32, 2);
  trainer::RestorationModel model({8}, 1);
  FinetuneOptions o;
  o.steps = 0;
  const auto set = finetune_distribution(AdjusterCNN({}, 3), subset, reference, model, o);
  ASSERT_EQ(set.adjusted_pairs.size(), subset.size());
  for (std::size_t i = 0; i < subset.size(); ++i) {
    EXPECT_EQ(set.adjusted_pairs[i].id, subset[i].id);
    EXPECT_EQ(set.adjusted_pairs[i].hq, subset[i].hq);
    EXPECT_EQ(set.adjusted_pairs[i].lq, subset[i].lq);
  }
  EXPECT_TRUE(set.curve.empty());
}

TEST(Finetune, FixedBatchLossHalvesWithin200Steps) {
  const auto all = pairs(12, 32, 3);
  const std::vector<corpus::ImagePair> subset(all.begin(), all.begin() + 4);
  const std::vector<corpus::ImagePair> reference(all.begin() + 8, all.end());
  // Start away from the identity so the pixel term has something to fix.
  AdjusterCNN adj({}, 1);
  {
    Rng rng(11);
    std::normal_distribution<float> nd(0.0f, 0.02f);
    auto params = adj.parameters();
    for (float& v : params[params.size() - 2]->value.values()) v = nd(rng);
  }
  trainer::RestorationModel model({}, 2);
  FinetuneOptions o;
  o.steps = 200;
  o.batch = 4;
  o.patch = 0;
  o.seed = 5;
  const auto set = finetune_distribution(adj, subset, reference, model, o);
  ASSERT_EQ(set.curve.size(), 200u);
  EXPECT_LE(set.curve.back().pixel_feature(), 0.5 * set.curve.front().pixel_feature());
  for (const auto& p : set.adjusted_pairs) {
    for (double v : p.hq.data()) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
  }
}

TEST(Finetune, DeterministicAndNonMutating) {
  const auto subset = pairs(6, 32, 4), reference = pairs(12, 32, 5);
  const auto subset_copy = subset;
  FinetuneOptions o;
  o.steps = 5;
  o.batch = 4;
  o.patch = 16;
  o.seed = 9;
  trainer::RestorationModel m1({8}, 1), m2({8}, 1);
  const auto a = finetune_distribution(AdjusterCNN({}, 3), subset, reference, m1, o);
  const auto b = finetune_distribution(AdjusterCNN({}, 3), subset, reference, m2, o);
  for (std::size_t i = 0; i < subset.size(); ++i) {
    EXPECT_EQ(a.adjusted_pairs[i].hq, b.adjusted_pairs[i].hq);
    EXPECT_EQ(subset[i].hq, subset_copy[i].hq);
  }
  EXPECT_EQ(curve_csv(a.curve), curve_csv(b.curve));
  EXPECT_EQ(curve_csv(a.curve).substr(0, 25), "step,l2,divergence,task\n0");
}

TEST(Finetune, RejectsEmptySubsetAndReportsDivergence) {
  trainer::RestorationModel model({8}, 1);
  const auto ref = pairs(4, 32, 1);
  EXPECT_THROW(finetune_distribution(AdjusterCNN({}, 1), {}, ref, model, {}), ValidationError);
  FinetuneOptions o;
  o.steps = 50;
  o.batch = 2;
  o.lr = 1e30;
  o.patch = 16;
  EXPECT_THROW(finetune_distribution(AdjusterCNN({}, 1), ref, ref, model, o), DivergenceError);
}

class LatentTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    corpus_ = new std::vector<corpus::ImagePair>(pairs(100, 32, 3));
    std::vector<Image> hq;
    for (const auto& p : *corpus_) hq.push_back(p.hq);
    decoder_ = new Autoencoder({32, 16, 16}, 7);
    fit_ = train_decoder(*decoder_, hq, {10, 2e-3, 16, 7});
    model_ = new trainer::RestorationModel({}, 3);
    trainer::TrainConfig tc;
    tc.epochs = 2;
    tc.batch = 8;
    tc.patch = 32;
    tc.lr0 = 1e-3;
    tc.steps_per_epoch = 10;
    trainer::train_restoration(*model_, *corpus_, tc);
  }
  static void TearDownTestSuite() {
    delete corpus_;
    delete decoder_;
    delete model_;
  }

  static std::vector<corpus::ImagePair>* corpus_;
  static Autoencoder* decoder_;
  static trainer::RestorationModel* model_;
  static DecoderTrainResult fit_;
};

std::vector<corpus::ImagePair>* LatentTest::corpus_ = nullptr;
Autoencoder* LatentTest::decoder_ = nullptr;
trainer::RestorationModel* LatentTest::model_ = nullptr;
DecoderTrainResult LatentTest::fit_;

TEST_F(LatentTest, DecoderTrainingReducesReconstructionLoss) {
  EXPECT_LT(fit_.final_loss, fit_.initial_loss);
  EXPECT_EQ(fit_.epoch_losses.size(), 10u);
  const Image rec = decoder_->decode(decoder_->encode((*corpus_)[0].hq));
  EXPECT_TRUE(rec.same_shape((*corpus_)[0].hq));
  for (double v : rec.data()) {
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST_F(LatentTest, DecoderTrainingIsDeterministic) {
  std::vector<Image> hq;
  for (std::size_t i = 0; i < 10; ++i) hq.push_back((*corpus_)[i].hq);
  Autoencoder a({32, 8, 8}, 1), b({32, 8, 8}, 1);
  train_decoder(a, hq, {2, 1e-3, 4, 5});
  train_decoder(b, hq, {2, 1e-3, 4, 5});
  EXPECT_EQ(nn::flatten_values(a.parameters()), nn::flatten_values(b.parameters()));
  EXPECT_THROW(train_decoder(a, {hq[0]}, {}), ValidationError);
}

TEST_F(LatentTest, ZeroStepsGivesReconstructions) {
  LatentOptions o;
  o.count = 3;
  o.steps = 0;
  const auto r = distill_latents(*decoder_, *corpus_, *model_, o);
  ASSERT_EQ(r.synthetic.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& src = (*corpus_)[i];
    EXPECT_EQ(r.synthetic[i].hq, decoder_->decode(decoder_->encode(src.hq)));
    EXPECT_EQ(r.synthetic[i].lq, corpus::degrade(r.synthetic[i].hq, src.degradation, src.seed));
    EXPECT_EQ(r.synthetic[i].degradation, src.degradation);
  }
}

TEST_F(LatentTest, ObjectiveStrictlyDecreasesOverTenSteps) {
  const auto before = nn::flatten_values(model_->parameters());
  LatentOptions o;
  o.count = 4;
  o.steps = 10;
  const auto r = distill_latents(*decoder_, *corpus_, *model_, o);
  ASSERT_EQ(r.objective.size(), 11u);
  for (std::size_t i = 1; i < r.objective.size(); ++i) {
    EXPECT_LT(r.objective[i], r.objective[i - 1]) << "step " << i;
  }
  for (const auto& p : r.synthetic) {
    for (double v : p.hq.data()) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
  }
  EXPECT_EQ(nn::flatten_values(model_->parameters()), before);
}

TEST_F(LatentTest, CountValidation) {
  const std::vector<corpus::ImagePair> two(corpus_->begin(), corpus_->begin() + 2);
  LatentOptions o;
  o.count = 3;
  EXPECT_THROW(distill_latents(*decoder_, two, *model_, o), ValidationError);
  o.count = 0;
  EXPECT_THROW(distill_latents(*decoder_, two, *model_, o), ValidationError);
}

TEST(SaveDistilled, WritesManifestBlobsAndCurve) {
  testing::TempDir dir;
  const auto subset = pairs(3, 32, 1);
  trainer::RestorationModel model({8}, 1);
  FinetuneOptions o;
  o.steps = 2;
  o.patch = 16;
  auto set = finetune_distribution(AdjusterCNN({}, 2), subset, pairs(6, 32, 2), model, o);
  const auto m = save_distilled(set, dir.path(), 4);
  EXPECT_EQ(m.size(), 3u);
  EXPECT_EQ(corpus::load_manifest(dir.path() / "pairs" / "manifest.jsonl").size(), 3u);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "adjuster.bin"));
  std::ifstream curve(dir.path() / "finetune_curve.csv");
  std::string header;
  std::getline(curve, header);
  EXPECT_EQ(header, "step,l2,divergence,task");
}

}  // namespace
}  // namespace distillir::distill
