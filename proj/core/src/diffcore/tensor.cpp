// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/diffcore/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "tubemae/common/error.hpp"

namespace tubemae::dc {

namespace {

std::atomic<std::uint64_t> g_seq{1};
thread_local bool t_grad_enabled = true;

void check_finite(const std::vector<double>& values, const char* op_name) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("non-finite value produced by ") + op_name);
    }
  }
}

NodePtr make_leaf(Shape shape, std::vector<double> values, bool requires_grad) {
  if (numel_of(shape) != static_cast<Index>(values.size())) {
    throw DimensionError("tensor shape " + shape_str(shape) + " does not match " +
                         std::to_string(values.size()) + " values");
  }
  check_finite(values, "leaf construction");
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(values);
  node->requires_grad = requires_grad;
  node->seq = g_seq.fetch_add(1, std::memory_order_relaxed);
  return node;
}

}  // namespace

Index numel_of(const Shape& shape) {
  Index n = 1;
  for (Index e : shape) {
    if (e <= 0) throw DimensionError("non-positive extent in shape " + shape_str(shape));
    n *= e;
  }
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

std::vector<double>& Node::grad_buffer() {
  if (grad.empty()) grad.assign(data.size(), 0.0);
  return grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const auto n = static_cast<std::size_t>(numel_of(shape));
  return Tensor(make_leaf(std::move(shape), std::vector<double>(n, value), requires_grad));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  return Tensor(make_leaf(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({1}, {value}, requires_grad); }

const Shape& Tensor::shape() const {
  if (!node_) throw ContractError("undefined tensor");
  return node_->shape;
}

Index Tensor::dim(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) throw DimensionError("axis out of range for shape " + shape_str(s));
  return s[axis];
}

Index Tensor::numel() const { return static_cast<Index>(node_ ? node_->data.size() : 0); }

std::span<const double> Tensor::data() const {
  if (!node_) throw ContractError("undefined tensor");
  return node_->data;
}

std::span<double> Tensor::mutable_data() {
  if (!node_) throw ContractError("undefined tensor");
  if (!node_->is_leaf()) throw ContractError("mutable_data on a non-leaf tensor");
  return node_->data;
}

double Tensor::item() const {
  if (numel() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape()));
  return node_->data[0];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool flag) {
  if (!node_) throw ContractError("undefined tensor");
  if (!node_->is_leaf()) throw ContractError("requires_grad can only be changed on leaves");
  node_->requires_grad = flag;
  if (!flag) node_->grad.clear();
}

bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

std::span<const double> Tensor::grad() const {
  if (!node_) throw ContractError("undefined tensor");
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  if (!node_) throw ContractError("undefined tensor");
  return node_->grad_buffer();
}

void Tensor::zero_grad() {
  if (node_ && !node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::clone(bool requires_grad) const {
  return Tensor(make_leaf(shape(), node_->data, requires_grad));
}

Tensor record(Shape shape, std::vector<double> values, std::vector<Tensor> parents,
              BackwardFn backward, const char* op_name) {
  if (numel_of(shape) != static_cast<Index>(values.size())) {
    throw DimensionError(std::string(op_name) + ": produced " + std::to_string(values.size()) +
                         " values for shape " + shape_str(shape));
  }
  check_finite(values, op_name);
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(values);
  node->seq = g_seq.fetch_add(1, std::memory_order_relaxed);
  const bool any = t_grad_enabled && std::any_of(parents.begin(), parents.end(),
                                                 [](const Tensor& p) { return p.requires_grad(); });
  if (any) {
    node->requires_grad = true;
    node->parents.reserve(parents.size());
    for (auto& p : parents) node->parents.push_back(p.node());
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw ContractError("backward requires a scalar loss");
  }
  if (!loss.requires_grad()) return;

  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{loss.node().get()};
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    order.push_back(n);
    for (const auto& p : n->parents) {
      if (p->requires_grad) stack.push_back(p.get());
    }
  }
  // A consumer is always created after its operands, so descending sequence
  // numbers visit each node after every node that reads it.
  std::sort(order.begin(), order.end(), [](const Node* a, const Node* b) { return a->seq > b->seq; });
  for (Node* n : order) {
    if (!n->is_leaf()) n->grad.assign(n->data.size(), 0.0);
  }
  loss.node()->grad_buffer()[0] += 1.0;
  for (Node* n : order) {
    if (!n->is_leaf()) n->backward(*n);
  }
}

Tensor stop_gradient(const Tensor& t) {
  std::vector<double> values(t.data().begin(), t.data().end());
  return record(t.shape(), std::move(values), {}, nullptr, "stop_gradient");
}

bool grad_mode_enabled() { return t_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

}  // namespace tubemae::dc
