// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Self-checks shipped with the library so the CLI can run them on demand:
// finite-difference gradient checks for every objective and a naive
// reference for the Chamfer term.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tubemae/diffcore/gradcheck.hpp"

namespace tubemae::pipeline {

struct ObjectiveCheck {
  std::string objective;  // chamfer, latent, motion, global, combined
  dc::GradCheckReport report;
};

/// Central differences carry ~1e-10 of rounding noise at the losses' scale,
/// so entries whose exact gradient is zero (for instance attention key biases,
/// which softmax cancels) are judged on absolute error below 1e-5 * rtol.
dc::GradCheckOptions gradient_suite_options();

/// Random small instances (C = 16, 4 tubes for the combined model) checked
/// against central differences.
std::vector<ObjectiveCheck> gradient_suite(std::uint64_t seed,
                                           const dc::GradCheckOptions& options = gradient_suite_options());

/// Double-loop reference over flat xyz buffers of one frame.
double naive_chamfer(const std::vector<double>& a, const std::vector<double>& b);

struct ChamferAudit {
  int pairs = 0;
  double max_abs_error = 0.0;
  bool symmetric = true;      // loss(a, b) == loss(b, a) bit for bit
  bool zero_on_identity = true;

  bool passed(double tol) const { return max_abs_error <= tol && symmetric && zero_on_identity; }
};

/// `pairs` random single-frame set pairs of 1..max_points points each.
ChamferAudit chamfer_audit(std::uint64_t seed, int pairs = 200, int max_points = 32);

}  // namespace tubemae::pipeline
