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

#include "distillir/image.hpp"

#include <algorithm>
#include <cmath>

#include "distillir/errors.hpp"

namespace distillir {

Image::Image(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  if (height < 0 || width < 0 || (channels != 1 && channels != 3)) {
    throw ValidationError("image dimensions invalid");
  }
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

Image Image::from_data(int height, int width, int channels,
                       std::vector<double> data) {
  Image img(height, width, channels);
  if (data.size() != img.data_.size()) {
    throw ValidationError("image buffer size does not match dimensions");
  }
  img.data_ = std::move(data);
  return img;
}

void clamp_unit(Image& img) {
  for (double& v : img.data()) v = std::clamp(v, 0.0, 1.0);
}

std::uint8_t to_u8(double v) noexcept {
  const double s = std::round(std::clamp(v, 0.0, 1.0) * 255.0);
  return static_cast<std::uint8_t>(s);
}

Image quantize8(const Image& img) {
  Image out = img;
  for (double& v : out.data()) v = to_u8(v) / 255.0;
  return out;
}

bool all_finite(const Image& img) {
  return std::all_of(img.data().begin(), img.data().end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace distillir
