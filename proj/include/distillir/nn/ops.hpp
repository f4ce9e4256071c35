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

#include "distillir/nn/graph.hpp"

namespace distillir::nn {

// --- image ops (NCHW) ------------------------------------------------------

// Stride-1 convolution with "same" zero padding. w: [O, C, k, k], b: [O].
Var conv2d(Graph& g, Var x, Var w, Var b);
// 2x2 average pooling; H and W must be even.
Var avg_pool2(Graph& g, Var x);
// Nearest-neighbour 2x upsampling.
Var upsample2(Graph& g, Var x);
// Mean over batch and space: [N, C, H, W] -> [C].
Var global_avg_pool(Graph& g, Var x);
// Clamp to [0, 1]; gradient passes where the input lies inside the range.
Var clamp01(Graph& g, Var x);

// --- elementwise -----------------------------------------------------------

Var add(Graph& g, Var a, Var b);
Var sub(Graph& g, Var a, Var b);
Var mul(Graph& g, Var a, Var b);
Var scale(Graph& g, Var x, float s);
Var relu(Graph& g, Var x);
Var sigmoid(Graph& g, Var x);
Var reshape(Graph& g, Var x, std::vector<int> shape);
// Concatenate along the leading dimension.
Var concat0(Graph& g, const std::vector<Var>& parts);

// --- reductions / losses (scalar outputs have shape [1]) --------------------

Var mean_squared_error(Graph& g, Var a, Var b);
Var sum_squares(Graph& g, Var x);
// Euclidean norm of all elements; the gradient at 0 is taken as 0.
Var l2_norm(Graph& g, Var x);
Var mean_all(Graph& g, Var x);
// KL(softmax(p) || softmax(q)) for two logit vectors of equal length.
Var kl_softmax(Graph& g, Var p_logits, Var q_logits);
// 1 - cos(a, b) over the flattened tensors.
Var cosine_distance(Graph& g, Var a, Var b);

// --- 2-D ops for token sequences [T, D] ------------------------------------

// x: [T, Din], w: [Dout, Din], b: [Dout] -> [T, Dout]
Var linear(Graph& g, Var x, Var w, Var b);
Var matmul(Graph& g, Var a, Var b);
Var transpose(Graph& g, Var x);
Var softmax_rows(Graph& g, Var x);
Var layer_norm(Graph& g, Var x, Var gamma, Var beta, float eps = 1e-5f);
// [T, D] -> [1, D]
Var mean_rows(Graph& g, Var x);

}  // namespace distillir::nn
