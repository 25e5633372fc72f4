// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reverse-mode differentiable tensor. A Tensor is a cheap handle to a node;
// every operation on tensors that require gradients records its parents and a
// closure that propagates the output gradient back to them.

#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace tubemae::dc {

using Index = std::int64_t;
using Shape = std::vector<Index>;

Index numel_of(const Shape& shape);
std::string shape_str(const Shape& shape);

struct Node;
using NodePtr = std::shared_ptr<Node>;
using BackwardFn = std::function<void(Node& self)>;

struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::uint64_t seq = 0;  // execution order; leaves carry their creation order
  std::vector<NodePtr> parents;
  BackwardFn backward;

  bool is_leaf() const { return !backward; }

  /// Zero-initialized gradient buffer, allocated on demand.
  std::vector<double>& grad_buffer();
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(NodePtr node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const;
  Index dim(std::size_t axis) const;
  std::size_t rank() const { return shape().size(); }
  Index numel() const;

  std::span<const double> data() const;
  /// Writable view of the values. Reserved for leaves (optimizer, EMA, loading).
  std::span<double> mutable_data();
  double item() const;
  double at(Index flat) const { return data()[static_cast<std::size_t>(flat)]; }

  bool requires_grad() const;
  void set_requires_grad(bool flag);
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  /// Deep copy of values into a fresh leaf (no graph history).
  Tensor clone(bool requires_grad = false) const;

  const NodePtr& node() const { return node_; }

 private:
  NodePtr node_;
};

/// Accumulates dLoss/dLeaf into every reachable leaf that requires grad.
/// Intermediate gradients are reset at entry, so repeated calls on one graph
/// accumulate exactly once per call at the leaves.
void backward(const Tensor& loss);

/// Value-identical copy detached from the graph.
Tensor stop_gradient(const Tensor& t);

/// Records a new node. `backward` is dropped when no parent needs gradients
/// or recording is disabled. Values are checked for NaN/Inf.
Tensor record(Shape shape, std::vector<double> values, std::vector<Tensor> parents,
              BackwardFn backward, const char* op_name);

bool grad_mode_enabled();

/// Disables graph recording on this thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace tubemae::dc
