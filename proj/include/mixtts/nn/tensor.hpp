// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
//
// Reverse-mode automatic differentiation over dense float64 matrices.
//
// A Tensor is a shared handle to a graph node. Operations on tensors that
// require gradients record their parents and a backward closure; calling
// `backward(loss)` walks the graph in reverse topological order. Leaves
// created with `Tensor::parameter` accumulate gradients until zeroed.
#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mixtts/error.hpp"

namespace mixtts::nn {

/// Dimension list. Every operation in this library works on rank-2 shapes
/// (rows x cols); vectors are 1 x n.
using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  std::size_t rows() const { return shape[0]; }
  std::size_t cols() const { return shape[1]; }
  std::vector<double>& ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Shape shape, std::vector<double> values);
  static Tensor parameter(Shape shape, std::vector<double> values);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor scalar(double v) { return constant({1, 1}, {v}); }

  /// Internal: builds a node with recorded parents. Parents that do not
  /// require gradients are dropped; if none remain the result is constant.
  static Tensor from_op(Shape shape, std::vector<double> values,
                        std::vector<Tensor> parents, std::function<void(detail::Node&)> backward);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rows() const { return node_->shape[0]; }
  std::size_t cols() const { return node_->shape[1]; }
  std::size_t size() const { return node_->value.size(); }

  std::span<const double> value() const { return node_->value; }
  std::span<double> mutable_value() { return node_->value; }
  double at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return node_->grad.size() == node_->value.size(); }
  /// Gradient buffer; zeros when nothing has been accumulated yet.
  std::span<const double> grad() const;
  std::span<double> mutable_grad() { return node_->ensure_grad(); }
  void zero_grad();

  /// Copy of the value as a new constant leaf (stops gradient flow).
  Tensor detach() const;

  detail::Node* node() const { return node_.get(); }
  const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<detail::Node> node_;
};

/// Accumulates d(root)/d(leaf) into every reachable leaf that requires
/// gradients. `root` must be 1 x 1.
void backward(const Tensor& root);

}  // namespace mixtts::nn
