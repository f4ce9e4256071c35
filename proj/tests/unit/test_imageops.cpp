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

#include <gtest/gtest.h>

#include "distillir/errors.hpp"
#include "distillir/imageops.hpp"
#include "distillir/png_io.hpp"
#include "helpers.hpp"

namespace distillir {
namespace {

using testing::random_image;

TEST(BilinearResize, PreservesConstants) {
  const Image img(17, 23, 3, 0.7);
  for (auto [h, w] : {std::pair{1, 1}, {5, 9}, {16, 4}, {40, 50}}) {
    const Image out = imageops::bilinear_resize(img, h, w);
    ASSERT_EQ(out.height(), h);
    ASSERT_EQ(out.width(), w);
    for (double v : out.data()) EXPECT_NEAR(v, 0.7, 1e-12);
  }
}

TEST(BilinearResize, SameSizeIsIdentity) {
  const Image img = random_image(12, 9, 3, 1);
  EXPECT_EQ(imageops::bilinear_resize(img, 12, 9), img);
}

TEST(BilinearResize, TwoByTwoToOnePixel) {
  // Half-pixel convention: the single output sample sits at source
  // coordinate (0.5, 0.5), equally weighting all four inputs.
  const Image img = Image::from_data(2, 2, 1, {0.0, 1.0, 0.0, 1.0});
  const Image out = imageops::bilinear_downsample(img, 1, 1);
  EXPECT_DOUBLE_EQ(out.at(0, 0, 0), 0.5);
}

TEST(BilinearResize, HalvingAveragesBlocks) {
  // With even factor 2 each output sample lands between four inputs.
  const Image img = random_image(8, 8, 1, 2);
  const Image out = imageops::bilinear_downsample(img, 4, 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      const double mean = (img.at(2 * y, 2 * x, 0) + img.at(2 * y, 2 * x + 1, 0) +
                           img.at(2 * y + 1, 2 * x, 0) + img.at(2 * y + 1, 2 * x + 1, 0)) / 4;
      EXPECT_NEAR(out.at(y, x, 0), mean, 1e-12);
    }
  }
}

TEST(BilinearResize, ZeroTargetRejected) {
  const Image img(4, 4, 1);
  EXPECT_THROW(imageops::bilinear_resize(img, 0, 3), ValidationError);
  EXPECT_THROW(imageops::bilinear_resize(img, 3, 0), ValidationError);
}

TEST(ShannonEntropy, ClosedFormCases) {
  EXPECT_EQ(imageops::shannon_entropy(Image(9, 7, 3, 0.3)), 0.0);

  Image half(4, 4, 1);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 4; ++x) half.at(y, x, 0) = 1.0;
  EXPECT_NEAR(imageops::shannon_entropy(half), 1.0, 1e-12);

  Image cycle(16, 16, 1);
  for (int i = 0; i < 256; ++i) cycle.data()[i] = i / 255.0;
  EXPECT_NEAR(imageops::shannon_entropy(cycle), 8.0, 1e-12);
}

TEST(ShannonEntropy, BoundedByEightBits) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const double h = imageops::shannon_entropy(random_image(10 + s, 13, 3, s));
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, 8.0);
  }
}

TEST(MinMaxNormalize, Cases) {
  const std::vector<double> a{2, 4, 6};
  EXPECT_EQ(imageops::min_max_normalize(a), (std::vector<double>{0.0, 0.5, 1.0}));
  const std::vector<double> b{5, 5, 5};
  EXPECT_EQ(imageops::min_max_normalize(b), (std::vector<double>{0, 0, 0}));
  const std::vector<double> c{3};
  EXPECT_EQ(imageops::min_max_normalize(c), (std::vector<double>{0}));
  EXPECT_THROW(imageops::min_max_normalize(std::vector<double>{}), ValidationError);
}

TEST(MinMaxNormalize, RangeProperty) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd(3.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(2 + trial);
    for (double& x : v) x = nd(rng);
    const auto n = imageops::min_max_normalize(v);
    EXPECT_EQ(*std::min_element(n.begin(), n.end()), 0.0);
    EXPECT_EQ(*std::max_element(n.begin(), n.end()), 1.0);
  }
}

TEST(Psnr, ClosedForm) {
  const Image x = random_image(8, 8, 3, 5);
  EXPECT_EQ(imageops::psnr(x, x), std::numeric_limits<double>::infinity());
  EXPECT_NEAR(imageops::psnr(Image(4, 4, 3, 0.0), Image(4, 4, 3, 1.0)), 0.0, 1e-12);
  // Constant offset of 0.1 gives MSE 0.01 -> 20 dB.
  EXPECT_NEAR(imageops::psnr(Image(4, 4, 3, 0.2), Image(4, 4, 3, 0.3)), 20.0, 1e-9);
  EXPECT_THROW(imageops::psnr(Image(4, 4, 3), Image(4, 5, 3)), ValidationError);
}

TEST(Ssim, ClosedForm) {
  const Image x = random_image(24, 24, 3, 6);
  EXPECT_NEAR(imageops::ssim(x, x), 1.0, 1e-9);
  const double c1 = 0.01 * 0.01;
  EXPECT_NEAR(imageops::ssim(Image(16, 16, 1, 0.0), Image(16, 16, 1, 1.0)), c1 / (1 + c1), 1e-12);
  Image y = x;
  for (double& v : y.data()) v += 1e-4;
  EXPECT_GT(imageops::ssim(x, y), 0.999);
  EXPECT_THROW(imageops::ssim(Image(10, 10, 1), Image(10, 10, 1)), ValidationError);
}

TEST(Ssim, SymmetricAndBounded) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Image a = random_image(16, 16, 3, s), b = random_image(16, 16, 3, s + 100);
    const double v = imageops::ssim(a, b);
    EXPECT_NEAR(v, imageops::ssim(b, a), 1e-12);
    EXPECT_LE(v, 1.0);
    EXPECT_GE(v, -1.0);
  }
}

TEST(CropPatches, Contracts) {
  const Image img = random_image(16, 16, 3, 7);
  const auto whole = imageops::crop_patches(img, 16, 1, 3);
  ASSERT_EQ(whole.size(), 1u);
  EXPECT_EQ(whole[0], img);
  const auto eight = imageops::crop_patches(img, 5, 8, 3);
  ASSERT_EQ(eight.size(), 8u);
  for (const auto& p : eight) {
    EXPECT_EQ(p.height(), 5);
    EXPECT_EQ(p.width(), 5);
  }
  EXPECT_EQ(imageops::crop_patches(img, 5, 8, 3), eight);
  EXPECT_THROW(imageops::crop_patches(img, 17, 1, 3), ValidationError);
}

TEST(PngIo, RoundTripIsLosslessAtEightBits) {
  testing::TempDir dir;
  const Image img = quantize8(random_image(9, 11, 3, 8));
  write_png(dir.path() / "a.png", img);
  EXPECT_EQ(read_png(dir.path() / "a.png"), img);
  EXPECT_THROW(read_png(dir.path() / "missing.png"), IoError);
}

}  // namespace
}  // namespace distillir
