// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/diffcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tubemae/common/rng.hpp"

namespace tubemae::dc {

GradCheckReport check_gradients(const std::function<Tensor()>& loss_fn, std::vector<NamedTensor> leaves,
                                const GradCheckOptions& options) {
  for (auto& leaf : leaves) leaf.tensor.zero_grad();
  backward(loss_fn());

  Rng rng(options.seed);
  GradCheckReport report;
  for (auto& leaf : leaves) {
    GradCheckEntry entry{leaf.name, 0, 0.0, 0.0};
    const auto n = static_cast<std::size_t>(leaf.tensor.numel());
    std::vector<double> analytic(n, 0.0);
    if (leaf.tensor.has_grad()) std::copy(leaf.tensor.grad().begin(), leaf.tensor.grad().end(), analytic.begin());

    std::vector<std::size_t> positions(n);
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    if (options.max_entries_per_tensor > 0 && n > options.max_entries_per_tensor) {
      rng.shuffle(positions);
      positions.resize(options.max_entries_per_tensor);
      std::sort(positions.begin(), positions.end());
    }

    auto values = leaf.tensor.mutable_data();
    for (std::size_t pos : positions) {
      const double original = values[pos];
      const double h = options.step_scale * std::max(1.0, std::abs(original));
      values[pos] = original + h;
      double plus = 0.0;
      double minus = 0.0;
      {
        NoGradGuard guard;
        plus = loss_fn().item();
        values[pos] = original - h;
        minus = loss_fn().item();
      }
      values[pos] = original;
      const double numeric = (plus - minus) / (2.0 * h);
      const double abs_err = std::abs(numeric - analytic[pos]);
      const double denom = std::max({std::abs(numeric), std::abs(analytic[pos]), options.magnitude_floor});
      entry.max_abs_error = std::max(entry.max_abs_error, abs_err);
      entry.max_rel_error = std::max(entry.max_rel_error, abs_err / denom);
      ++entry.checked;
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace tubemae::dc
