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

#include "distillir/nn/convert.hpp"

#include <algorithm>

#include "distillir/errors.hpp"

namespace distillir::nn {

Tensor to_batch(const std::vector<const Image*>& images) {
  if (images.empty()) throw ValidationError("to_batch: no images");
  const Image& first = *images.front();
  const int n = static_cast<int>(images.size());
  const int c = first.channels(), h = first.height(), w = first.width();
  Tensor out({n, c, h, w});
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  for (int b = 0; b < n; ++b) {
    const Image& img = *images[b];
    if (!img.same_shape(first)) throw ValidationError("to_batch: image shapes differ");
    auto src = img.data();
    for (std::size_t i = 0; i < hw; ++i) {
      for (int ch = 0; ch < c; ++ch) {
        out[(static_cast<std::size_t>(b) * c + ch) * hw + i] = static_cast<float>(src[i * c + ch]);
      }
    }
  }
  return out;
}

Tensor to_batch(const Image& image) { return to_batch(std::vector<const Image*>{&image}); }

Image to_image(const Tensor& batch, int index) {
  if (batch.rank() != 4 || index < 0 || index >= batch.dim(0)) {
    throw ValidationError("to_image: bad batch index");
  }
  const int c = batch.dim(1), h = batch.dim(2), w = batch.dim(3);
  Image img(h, w, c);
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  auto dst = img.data();
  for (std::size_t i = 0; i < hw; ++i) {
    for (int ch = 0; ch < c; ++ch) {
      dst[i * c + ch] = batch[(static_cast<std::size_t>(index) * c + ch) * hw + i];
    }
  }
  return img;
}

Tensor slice_batch(const Tensor& batch, int begin, int count) {
  if (batch.rank() < 1 || begin < 0 || count < 0 || begin + count > batch.dim(0)) {
    throw ValidationError("slice_batch: range out of bounds");
  }
  std::vector<int> shape = batch.shape();
  shape[0] = count;
  const std::size_t per = batch.numel() / batch.dim(0);
  std::vector<float> data(batch.data() + begin * per, batch.data() + (begin + count) * per);
  return Tensor::from(std::move(shape), std::move(data));
}

}  // namespace distillir::nn
