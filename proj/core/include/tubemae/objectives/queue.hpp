// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tubemae/diffcore/tensor.hpp"

namespace tubemae::objectives {

/// FIFO ring of unit-norm key vectors. Entries are plain values and never
/// take part in gradient computation.
class NegativeQueue {
 public:
  NegativeQueue(std::size_t capacity, std::size_t channels);

  /// Enqueues one key, evicting the oldest when full. The key must have unit
  /// norm (within 1e-6).
  void push(std::span<const double> key);
  /// Enqueues every row of a [rows, C] tensor in order.
  void push_rows(const dc::Tensor& keys);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t channels() const { return channels_; }
  std::size_t cursor() const { return cursor_; }

  /// Entries oldest first.
  std::vector<std::vector<double>> entries() const;
  /// Entries as a constant [size, C] tensor (oldest first); requires size > 0.
  dc::Tensor as_tensor() const;

  /// Raw ring storage, for checkpointing.
  const std::vector<double>& storage() const { return storage_; }
  void restore(std::vector<double> storage, std::size_t size, std::size_t cursor);

 private:
  std::size_t capacity_;
  std::size_t channels_;
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;  // next write slot
  std::vector<double> storage_;
};

}  // namespace tubemae::objectives
