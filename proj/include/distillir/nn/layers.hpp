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

#include <string>

#include "distillir/nn/graph.hpp"
#include "distillir/nn/ops.hpp"
#include "distillir/rng.hpp"

namespace distillir::nn {

// k x k stride-1 "same" convolution.
struct Conv2d {
  Parameter weight;
  Parameter bias;

  Conv2d() = default;
  // He-normal weights, zero bias. zero_init gives all-zero weights.
  Conv2d(const std::string& name, int in_ch, int out_ch, int kernel, Rng& rng,
         bool zero_init = false);

  Var operator()(Graph& g, Var x) { return conv2d(g, x, g.param(weight), g.param(bias)); }
  void collect(ParameterList& out) { out.push_back(&weight); out.push_back(&bias); }
  int in_channels() const { return weight.value.dim(1); }
  int out_channels() const { return weight.value.dim(0); }
};

struct Linear {
  Parameter weight;  // [out, in]
  Parameter bias;

  Linear() = default;
  Linear(const std::string& name, int in, int out, Rng& rng, bool zero_init = false);

  Var operator()(Graph& g, Var x) { return linear(g, x, g.param(weight), g.param(bias)); }
  void collect(ParameterList& out) { out.push_back(&weight); out.push_back(&bias); }
};

struct LayerNorm {
  Parameter gamma;
  Parameter beta;

  LayerNorm() = default;
  LayerNorm(const std::string& name, int dim);

  Var operator()(Graph& g, Var x) { return layer_norm(g, x, g.param(gamma), g.param(beta)); }
  void collect(ParameterList& out) { out.push_back(&gamma); out.push_back(&beta); }
};

void zero_grads(const ParameterList& params);
std::size_t count_parameters(const ParameterList& params);
// Concatenation of all parameter values (or gradients) in list order.
std::vector<float> flatten_values(const ParameterList& params);
std::vector<float> flatten_grads(const ParameterList& params);
void assign_values(const ParameterList& params, std::span<const float> flat);

}  // namespace distillir::nn
