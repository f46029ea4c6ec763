// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include "mixtts/nn/tensor.hpp"

#include <algorithm>
#include <unordered_set>

namespace mixtts::nn {
namespace {

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

void check_shape(const Shape& shape, std::size_t n) {
  if (shape.size() != 2) throw ShapeMismatch("tensors are rank 2, got " + to_string(shape));
  if (element_count(shape) != n) {
    throw ShapeMismatch("value count " + std::to_string(n) + " does not match " + to_string(shape));
  }
}

}  // namespace

std::string to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += " x ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
  check_shape(shape, values.size());
  auto n = std::make_shared<detail::Node>();
  n->shape = std::move(shape);
  n->value = std::move(values);
  return Tensor(std::move(n));
}

Tensor Tensor::parameter(Shape shape, std::vector<double> values) {
  Tensor t = constant(std::move(shape), std::move(values));
  t.node_->requires_grad = true;
  return t;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const auto n = element_count(shape);
  Tensor t = constant(std::move(shape), std::vector<double>(n, 0.0));
  t.node_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::from_op(Shape shape, std::vector<double> values, std::vector<Tensor> parents,
                       std::function<void(detail::Node&)> backward) {
  check_shape(shape, values.size());
  auto n = std::make_shared<detail::Node>();
  n->shape = std::move(shape);
  n->value = std::move(values);
  for (auto& p : parents) {
    if (p.defined() && p.requires_grad()) {
      n->requires_grad = true;
      break;
    }
  }
  if (n->requires_grad) {
    n->parents.reserve(parents.size());
    for (auto& p : parents) n->parents.push_back(p.node_);
    n->backward = std::move(backward);
  }
  return Tensor(std::move(n));
}

double Tensor::item() const {
  if (size() != 1) throw ShapeMismatch("item() on " + to_string(shape()));
  return node_->value[0];
}

std::span<const double> Tensor::grad() const {
  node_->ensure_grad();
  return node_->grad;
}

void Tensor::zero_grad() {
  if (has_grad()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const { return constant(node_->shape, node_->value); }

void backward(const Tensor& root) {
  if (root.size() != 1) throw ShapeMismatch("backward needs a scalar root");
  if (!root.requires_grad()) return;

  // Iterative post-order DFS: graphs from long decode loops are deep.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(root.node(), 0);
  visited.insert(root.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* p = node->parents[next++].get();
      if (p->requires_grad && !visited.contains(p)) {
        visited.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  // Interior gradients restart from zero; leaves keep accumulating.
  for (auto* n : order) {
    if (n->backward) n->grad.assign(n->value.size(), 0.0);
  }
  root.node()->ensure_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (n->backward) {
      for (auto& p : n->parents) {
        if (p->requires_grad) p->ensure_grad();
      }
      n->backward(*n);
    }
  }
}

}  // namespace mixtts::nn
