// tensor/tensor.h

// Copyright 2026  cpcx authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CPCX_TENSOR_TENSOR_H_
#define CPCX_TENSOR_TENSOR_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "base/error.h"

namespace cpcx {

using Shape = std::vector<int64_t>;

int64_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);
bool same_shape(const Shape& a, const Shape& b);

// One value in the differentiable computation record. The graph is dynamic:
// every forward pass builds fresh nodes on top of long-lived parameter
// leaves, and the whole record is released when the last handle goes away.
// Precision is a compile-time choice: float for training, double for
// gradient verification. A record never mixes the two.
template <typename Real>
struct Node {
  Shape shape;
  std::vector<Real> value;
  std::vector<Real> grad;  // adjoint, materialized lazily; same shape as value
  bool requires_grad = false;
  std::string name;  // non-empty for parameters only

  // Provenance: inputs of the producing operation, plus a closure that
  // propagates this node's adjoint into theirs. Leaves have neither.
  std::vector<std::shared_ptr<Node<Real>>> parents;
  std::function<void()> backprop;

  int64_t size() const { return static_cast<int64_t>(value.size()); }
  bool is_leaf() const { return parents.empty(); }

  // Adjoint storage, zero-filled on first touch.
  Real* grad_data() {
    if (grad.size() != value.size()) grad.assign(value.size(), Real(0));
    return grad.data();
  }

  void zero_grad() {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), Real(0));
  }

  void add_grad(const Real* g, int64_t n) {
    Real* dst = grad_data();
    for (int64_t i = 0; i < n; ++i) dst[i] += g[i];
  }
};

template <typename Real>
using NodePtr = std::shared_ptr<Node<Real>>;

template <typename Real>
NodePtr<Real> make_node(Shape shape, std::vector<Real> value, bool requires_grad);

// A constant: participates in the forward pass, receives no adjoint.
template <typename Real>
NodePtr<Real> constant(Shape shape, std::vector<Real> value);

// A learnable parameter: leaf with requires_grad set and a persistent name.
template <typename Real>
NodePtr<Real> parameter(const std::string& name, Shape shape, std::vector<Real> value);

template <typename Real>
NodePtr<Real> zeros(Shape shape, bool requires_grad = false);

// Reverse-mode sweep from a scalar root. Adjoints of interior nodes are
// reset before propagation; leaf adjoints accumulate across calls, so a
// second backward doubles them. Gradient consumers (the optimizer) zero
// leaf adjoints explicitly.
template <typename Real>
void backward(const NodePtr<Real>& root);

// Post-order (inputs before consumers) over the subgraph reachable from
// root. Exposed for the gradient checker and tests.
template <typename Real>
std::vector<Node<Real>*> topo_order(const NodePtr<Real>& root);

}  // namespace cpcx

#endif  // CPCX_TENSOR_TENSOR_H_
