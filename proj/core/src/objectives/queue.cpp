// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/objectives/queue.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tubemae/common/error.hpp"

namespace tubemae::objectives {

NegativeQueue::NegativeQueue(std::size_t capacity, std::size_t channels)
    : capacity_(capacity), channels_(channels), storage_(capacity * channels, 0.0) {
  TUBEMAE_EXPECT(channels > 0, "queue channels must be positive");
}

void NegativeQueue::push(std::span<const double> key) {
  TUBEMAE_EXPECT(key.size() == channels_, "queue key has " + std::to_string(key.size()) + " channels, expected " +
                                              std::to_string(channels_));
  double sq = 0.0;
  for (double v : key) sq += v * v;
  TUBEMAE_EXPECT(std::abs(std::sqrt(sq) - 1.0) < 1e-6, "queue keys must be unit-normalized");
  if (capacity_ == 0) return;
  std::copy(key.begin(), key.end(), storage_.begin() + static_cast<std::ptrdiff_t>(cursor_ * channels_));
  cursor_ = (cursor_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

void NegativeQueue::push_rows(const dc::Tensor& keys) {
  TUBEMAE_EXPECT(keys.rank() == 2 && static_cast<std::size_t>(keys.dim(1)) == channels_,
                 "push_rows expects [rows, C]");
  const auto data = keys.data();
  for (dc::Index r = 0; r < keys.dim(0); ++r) push(data.subspan(static_cast<std::size_t>(r) * channels_, channels_));
}

std::vector<std::vector<double>> NegativeQueue::entries() const {
  std::vector<std::vector<double>> out;
  out.reserve(size_);
  const std::size_t oldest = (cursor_ + capacity_ - size_) % std::max<std::size_t>(capacity_, 1);
  for (std::size_t i = 0; i < size_; ++i) {
    const std::size_t slot = (oldest + i) % capacity_;
    const auto begin = storage_.begin() + static_cast<std::ptrdiff_t>(slot * channels_);
    out.emplace_back(begin, begin + static_cast<std::ptrdiff_t>(channels_));
  }
  return out;
}

dc::Tensor NegativeQueue::as_tensor() const {
  TUBEMAE_EXPECT(size_ > 0, "queue is empty");
  std::vector<double> values;
  values.reserve(size_ * channels_);
  for (const auto& e : entries()) values.insert(values.end(), e.begin(), e.end());
  return dc::Tensor::from({static_cast<dc::Index>(size_), static_cast<dc::Index>(channels_)}, std::move(values));
}

void NegativeQueue::restore(std::vector<double> storage, std::size_t size, std::size_t cursor) {
  TUBEMAE_EXPECT(storage.size() == capacity_ * channels_, "queue storage size mismatch");
  TUBEMAE_EXPECT(size <= capacity_ && (capacity_ == 0 || cursor < capacity_), "queue cursor out of range");
  storage_ = std::move(storage);
  size_ = size;
  cursor_ = cursor;
}

}  // namespace tubemae::objectives
