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

#include "distillir/procedural.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace distillir::corpus {
namespace {

using Color = std::array<double, 3>;

Color random_color(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {u(rng), u(rng), u(rng)};
}

}  // namespace

Image generate_clean_image(int height, int width, double complexity, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double c = std::clamp(complexity, 0.0, 1.0);
  Image img(height, width, 3);

  // Background: flat colour plus a linear ramp whose amplitude grows with c.
  const Color base = random_color(rng);
  const Color ramp = random_color(rng);
  const double theta = u(rng) * 2.0 * std::numbers::pi;
  const double gx = std::cos(theta), gy = std::sin(theta);
  const double ramp_amp = 0.6 * c;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double t = (gx * x / width + gy * y / height) * 0.5 + 0.5;
      for (int ch = 0; ch < 3; ++ch) {
        img.at(y, x, ch) = base[ch] * (1.0 - ramp_amp) + ramp_amp * t * ramp[ch];
      }
    }
  }

  // Flat shapes.
  const int shapes = static_cast<int>(std::floor(c * 12.0)) + 1;
  for (int s = 0; s < shapes; ++s) {
    const Color col = random_color(rng);
    const bool circle = u(rng) < 0.5;
    const double cx = u(rng) * width, cy = u(rng) * height;
    const double rx = (0.08 + 0.3 * u(rng)) * width;
    const double ry = (0.08 + 0.3 * u(rng)) * height;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
        const bool inside = circle ? (dx * dx + dy * dy <= 1.0)
                                   : (std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0);
        if (!inside) continue;
        for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = col[ch];
      }
    }
  }

  // Oriented sinusoidal texture.
  const double tex_amp = 0.18 * c;
  if (tex_amp > 0.0) {
    struct Wave {
      double fx, fy, phase, amp;
    };
    std::array<Wave, 3> waves{};
    for (auto& w : waves) {
      const double f = 0.05 + 0.4 * u(rng);
      const double a = u(rng) * std::numbers::pi;
      w = {f * std::cos(a), f * std::sin(a), u(rng) * 2.0 * std::numbers::pi,
           tex_amp * (0.3 + 0.7 * u(rng))};
    }
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        double v = 0.0;
        for (const auto& w : waves) {
          v += w.amp * std::sin(2.0 * std::numbers::pi * (w.fx * x + w.fy * y) + w.phase);
        }
        for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) += v;
      }
    }
  }

  // Fine grain, only in the more complex images.
  const double grain = 0.06 * std::max(0.0, c - 0.3);
  if (grain > 0.0) {
    std::uniform_real_distribution<double> g(-grain, grain);
    for (double& v : img.data()) v += g(rng);
  }

  clamp_unit(img);
  return img;
}

Image generate_clean_image(int height, int width, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double c = u(rng);
  return generate_clean_image(height, width, c, rng);
}

}  // namespace distillir::corpus
