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

#include "distillir/image.hpp"
#include "distillir/rng.hpp"

namespace distillir::corpus {

// Procedural clean RGB image. `complexity` in [0, 1] scales the number of
// shapes, gradient amplitude and texture; low values give flat images with
// few luminance levels, high values give textured scenes.
Image generate_clean_image(int height, int width, double complexity, Rng& rng);

// Draws complexity uniformly and calls the overload above.
Image generate_clean_image(int height, int width, Rng& rng);

}  // namespace distillir::corpus
