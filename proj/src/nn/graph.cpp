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

#include "distillir/nn/graph.hpp"

#include "distillir/errors.hpp"

namespace distillir::nn {

Var Graph::constant(Tensor value) { return record(std::move(value), false, nullptr); }

Var Graph::variable(Tensor value) { return record(std::move(value), true, nullptr); }

Var Graph::param(Parameter& p) {
  if (!grad_enabled_) return constant(p.value);
  Parameter* target = &p;
  return record(p.value, true, [target](Graph&, const Tensor& g) {
    target->grad.add_(g);
  });
}

Var Graph::record(Tensor value, bool requires_grad, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad && grad_enabled_;
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Tensor Graph::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (n.has_grad) return n.grad;
  return Tensor(n.value.shape());
}

Tensor& Graph::grad_buffer(Var v) {
  Node& n = nodes_.at(v.id);
  if (!n.has_grad) {
    n.grad = Tensor(n.value.shape());
    n.has_grad = true;
  }
  return n.grad;
}

void Graph::accumulate(Var v, const Tensor& g) {
  if (!nodes_.at(v.id).requires_grad) return;
  grad_buffer(v).add_(g);
}

void Graph::backward(Var root) {
  if (value(root).numel() != 1) {
    throw ValidationError("backward() without seed needs a scalar root");
  }
  backward(root, Tensor::from(value(root).shape(), {1.0f}));
}

void Graph::backward(Var root, const Tensor& seed) {
  if (!grad_enabled_) throw ValidationError("backward() on a no-grad graph");
  if (seed.numel() != value(root).numel()) {
    throw ValidationError("backward seed shape mismatch");
  }
  for (auto& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
  if (!nodes_.at(root.id).requires_grad) return;
  grad_buffer(root).add_(seed);
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.backward) continue;
    // Callbacks only touch the buffers of earlier nodes.
    n.backward(*this, n.grad);
  }
}

}  // namespace distillir::nn
