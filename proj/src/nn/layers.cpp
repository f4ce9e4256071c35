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

#include "distillir/nn/layers.hpp"

#include <cmath>
#include <random>

#include "distillir/errors.hpp"

namespace distillir::nn {

Conv2d::Conv2d(const std::string& name, int in_ch, int out_ch, int kernel,
               Rng& rng, bool zero_init)
    : weight(name + ".weight", Tensor({out_ch, in_ch, kernel, kernel})),
      bias(name + ".bias", Tensor({out_ch})) {
  if (zero_init) return;
  std::normal_distribution<float> n(0.0f, std::sqrt(2.0f / (in_ch * kernel * kernel)));
  for (float& v : weight.value.values()) v = n(rng);
}

Linear::Linear(const std::string& name, int in, int out, Rng& rng, bool zero_init)
    : weight(name + ".weight", Tensor({out, in})), bias(name + ".bias", Tensor({out})) {
  if (zero_init) return;
  std::normal_distribution<float> n(0.0f, std::sqrt(1.0f / in));
  for (float& v : weight.value.values()) v = n(rng);
}

LayerNorm::LayerNorm(const std::string& name, int dim)
    : gamma(name + ".gamma", Tensor({dim}, 1.0f)), beta(name + ".beta", Tensor({dim})) {}

void zero_grads(const ParameterList& params) {
  for (Parameter* p : params) p->zero_grad();
}

std::size_t count_parameters(const ParameterList& params) {
  std::size_t n = 0;
  for (const Parameter* p : params) n += p->value.numel();
  return n;
}

std::vector<float> flatten_values(const ParameterList& params) {
  std::vector<float> out;
  out.reserve(count_parameters(params));
  for (const Parameter* p : params) out.insert(out.end(), p->value.values().begin(), p->value.values().end());
  return out;
}

std::vector<float> flatten_grads(const ParameterList& params) {
  std::vector<float> out;
  out.reserve(count_parameters(params));
  for (const Parameter* p : params) out.insert(out.end(), p->grad.values().begin(), p->grad.values().end());
  return out;
}

void assign_values(const ParameterList& params, std::span<const float> flat) {
  if (flat.size() != count_parameters(params)) {
    throw ValidationError("assign_values: size mismatch");
  }
  std::size_t off = 0;
  for (Parameter* p : params) {
    std::copy(flat.begin() + off, flat.begin() + off + p->value.numel(), p->value.data());
    off += p->value.numel();
  }
}

}  // namespace distillir::nn
