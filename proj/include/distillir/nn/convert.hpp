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

#include <vector>

#include "distillir/image.hpp"
#include "distillir/nn/tensor.hpp"

namespace distillir::nn {

// Stack same-shaped images into an NCHW batch.
Tensor to_batch(const std::vector<const Image*>& images);
Tensor to_batch(const Image& image);
// Extract image `index` of an NCHW batch (values are not clamped).
Image to_image(const Tensor& batch, int index = 0);
// Copy an NCHW batch slice [begin, begin + count).
Tensor slice_batch(const Tensor& batch, int begin, int count);

}  // namespace distillir::nn
