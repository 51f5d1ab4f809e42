// tensor/tensor.cc

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

#include "tensor/tensor.h"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace cpcx {

int64_t numel(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream ss;
  ss << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) ss << "x";
    ss << shape[i];
  }
  ss << "]";
  return ss.str();
}

bool same_shape(const Shape& a, const Shape& b) { return a == b; }

template <typename Real>
NodePtr<Real> make_node(Shape shape, std::vector<Real> value, bool requires_grad) {
  if (numel(shape) != static_cast<int64_t>(value.size())) {
    throw ShapeError("node data size " + std::to_string(value.size()) +
                     " does not match shape " + shape_str(shape));
  }
  auto n = std::make_shared<Node<Real>>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  return n;
}

template <typename Real>
NodePtr<Real> constant(Shape shape, std::vector<Real> value) {
  return make_node<Real>(std::move(shape), std::move(value), false);
}

template <typename Real>
NodePtr<Real> parameter(const std::string& name, Shape shape, std::vector<Real> value) {
  auto n = make_node<Real>(std::move(shape), std::move(value), true);
  n->name = name;
  return n;
}

template <typename Real>
NodePtr<Real> zeros(Shape shape, bool requires_grad) {
  int64_t n = numel(shape);
  return make_node<Real>(std::move(shape), std::vector<Real>(static_cast<size_t>(n), Real(0)),
                         requires_grad);
}

template <typename Real>
std::vector<Node<Real>*> topo_order(const NodePtr<Real>& root) {
  std::vector<Node<Real>*> order;
  std::unordered_set<const Node<Real>*> visited;
  // Iterative DFS; recursion would overflow on long recurrent chains.
  struct Frame {
    Node<Real>* node;
    size_t next_parent;
  };
  std::vector<Frame> stack;
  if (!root) return order;
  stack.push_back({root.get(), 0});
  visited.insert(root.get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.node->parents.size()) {
      Node<Real>* p = f.node->parents[f.next_parent++].get();
      if (visited.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }
  return order;
}

template <typename Real>
void backward(const NodePtr<Real>& root) {
  if (!root) throw Error("backward: null root");
  if (root->size() != 1) {
    throw ShapeError("backward requires a scalar root, got shape " + shape_str(root->shape));
  }
  std::vector<Node<Real>*> order = topo_order(root);
  // Interior adjoints are per-sweep scratch; leaf adjoints persist.
  for (Node<Real>* n : order) {
    if (!n->is_leaf()) n->zero_grad();
  }
  root->grad_data()[0] += Real(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<Real>* n = *it;
    if (n->backprop && n->requires_grad) n->backprop();
  }
}

template NodePtr<float> make_node<float>(Shape, std::vector<float>, bool);
template NodePtr<double> make_node<double>(Shape, std::vector<double>, bool);
template NodePtr<float> constant<float>(Shape, std::vector<float>);
template NodePtr<double> constant<double>(Shape, std::vector<double>);
template NodePtr<float> parameter<float>(const std::string&, Shape, std::vector<float>);
template NodePtr<double> parameter<double>(const std::string&, Shape, std::vector<double>);
template NodePtr<float> zeros<float>(Shape, bool);
template NodePtr<double> zeros<double>(Shape, bool);
template std::vector<Node<float>*> topo_order<float>(const NodePtr<float>&);
template std::vector<Node<double>*> topo_order<double>(const NodePtr<double>&);
template void backward<float>(const NodePtr<float>&);
template void backward<double>(const NodePtr<double>&);

}  // namespace cpcx
