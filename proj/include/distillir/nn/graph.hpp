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

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "distillir/nn/tensor.hpp"

namespace distillir::nn {

// A trainable tensor with its accumulated gradient.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor value)
      : name(std::move(name)), value(std::move(value)), grad(this->value.shape()) {}

  std::string name;
  Tensor value;
  Tensor grad;

  void zero_grad() { grad.fill(0.0f); }
};

using ParameterList = std::vector<Parameter*>;

// Handle to a node in a Graph.
struct Var {
  static constexpr std::size_t kInvalid = std::numeric_limits<std::size_t>::max();
  std::size_t id = kInvalid;
  bool valid() const noexcept { return id != kInvalid; }
};

class Graph;
using BackwardFn = std::function<void(Graph&, const Tensor& out_grad)>;

// Reverse-mode tape. Nodes are appended in evaluation order, so reverse
// insertion order is a valid topological order for backward().
class Graph {
 public:
  explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  Var constant(Tensor value);
  // Leaf that collects a gradient (e.g. an input image we differentiate
  // with respect to).
  Var variable(Tensor value);
  // Leaf bound to a Parameter; backward() accumulates into p.grad. With
  // gradients disabled this is a constant.
  Var param(Parameter& p);

  // Used by op implementations.
  Var record(Tensor value, bool requires_grad, BackwardFn fn);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  // Gradient of the last backward() root with respect to `v`. Zero-filled
  // if no gradient reached it.
  Tensor grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  bool grad_enabled() const noexcept { return grad_enabled_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  // Accumulate `g` into the gradient buffer of `v` (no-op for nodes that do
  // not require grad).
  void accumulate(Var v, const Tensor& g);
  // Direct access to the (lazily allocated) gradient buffer of `v`.
  Tensor& grad_buffer(Var v);

  // Seed d(root)/d(root) = 1 (root must be a scalar) or with `seed`.
  void backward(Var root);
  void backward(Var root, const Tensor& seed);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  bool grad_enabled_;
};

}  // namespace distillir::nn
