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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "distillir/image.hpp"

namespace distillir::imageops {

struct QualityScore {
  double psnr = 0.0;  // dB; +inf for identical inputs
  double ssim = 0.0;
};

// Bilinear resampling with the half-pixel (edge-centered) convention:
// source coordinate = (dst + 0.5) * in / out - 0.5, clamped to the image.
// No prefilter, so constants are preserved exactly.
Image bilinear_resize(const Image& img, int out_height, int out_width);
inline Image bilinear_downsample(const Image& img, int out_height,
                                 int out_width) {
  return bilinear_resize(img, out_height, out_width);
}

// BT.601 luma. Single-channel input is returned unchanged.
Image luminance(const Image& img);

// 256-bin histogram of the 8-bit-quantized luminance.
std::array<std::uint64_t, 256> luminance_histogram(const Image& img);

// Shannon entropy, in bits, of the luminance histogram. Range [0, 8].
double shannon_entropy(const Image& img);

// Affine map of `scores` onto [0, 1]. A degenerate range maps to zeros.
std::vector<double> min_max_normalize(std::span<const double> scores);

double mse(const Image& a, const Image& b);

// 10 log10(peak^2 / MSE). Identical inputs give +infinity.
double psnr(const Image& a, const Image& b, double peak = 1.0);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

// Mean SSIM over all valid 11x11 Gaussian-weighted windows of the luminance.
double ssim(const Image& a, const Image& b);

QualityScore quality(const Image& restored, const Image& reference);

Image crop(const Image& img, int y, int x, int height, int width);

// `count` random square crops of side `size`; deterministic in `seed`.
std::vector<Image> crop_patches(const Image& img, int size, int count,
                                std::uint64_t seed);

}  // namespace distillir::imageops
