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

struct AdamWOptions {
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
  float weight_decay = 1e-4f;
};

// Adam with decoupled weight decay. State is keyed by position in the
// parameter list passed at construction.
class AdamW {
 public:
  AdamW(ParameterList params, AdamWOptions options = {});

  // One update using the gradients currently stored in the parameters.
  void step(float lr);
  void zero_grad();
  long steps_taken() const noexcept { return t_; }
  const ParameterList& parameters() const noexcept { return params_; }

 private:
  ParameterList params_;
  AdamWOptions opt_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  long t_ = 0;
};

}  // namespace distillir::nn
