// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tubemae/diffcore/tensor.hpp"

namespace tubemae::dc {

struct GradCheckOptions {
  /// Entries sampled per parameter tensor; 0 checks every entry.
  std::size_t max_entries_per_tensor = 0;
  /// Central-difference step is step_scale * max(1, |x|).
  double step_scale = 1e-5;
  /// Denominator floor for the relative error, so entries whose true
  /// gradient is ~0 are judged on absolute error at this scale.
  double magnitude_floor = 1e-6;
  std::uint64_t seed = 0;
};

struct GradCheckEntry {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;

  bool passed(double rtol) const { return max_rel_error < rtol; }
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

/// Compares the analytic gradient of `loss_fn` with central finite differences
/// over the listed leaves. The function must be deterministic and rebuild its
/// graph on every call.
GradCheckReport check_gradients(const std::function<Tensor()>& loss_fn, std::vector<NamedTensor> leaves,
                                const GradCheckOptions& options = {});

}  // namespace tubemae::dc
