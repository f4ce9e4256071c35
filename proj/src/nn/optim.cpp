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

#include "distillir/nn/optim.hpp"

#include <cmath>

#include "distillir/nn/layers.hpp"

namespace distillir::nn {

AdamW::AdamW(ParameterList params, AdamWOptions options)
    : params_(std::move(params)), opt_(options) {
  for (const Parameter* p : params_) {
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

void AdamW::zero_grad() { zero_grads(params_); }

void AdamW::step(float lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(static_cast<double>(opt_.beta1), t_);
  const double bc2 = 1.0 - std::pow(static_cast<double>(opt_.beta2), t_);
  const float step_size = static_cast<float>(lr / bc1);
  const float inv_sqrt_bc2 = static_cast<float>(1.0 / std::sqrt(bc2));
  const float decay = 1.0f - lr * opt_.weight_decay;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& w = params_[i]->value;
    const Tensor& g = params_[i]->grad;
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (std::size_t j = 0; j < w.numel(); ++j) {
      w[j] *= decay;
      m[j] = opt_.beta1 * m[j] + (1.0f - opt_.beta1) * g[j];
      v[j] = opt_.beta2 * v[j] + (1.0f - opt_.beta2) * g[j] * g[j];
      w[j] -= step_size * m[j] / (std::sqrt(v[j]) * inv_sqrt_bc2 + opt_.eps);
    }
  }
}

}  // namespace distillir::nn
