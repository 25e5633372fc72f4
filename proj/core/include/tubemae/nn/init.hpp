// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tubemae/common/rng.hpp"
#include "tubemae/diffcore/tensor.hpp"

namespace tubemae::nn {

/// [fan_in, fan_out] parameter, uniform in +-sqrt(6 / (fan_in + fan_out)).
dc::Tensor xavier_uniform(int fan_in, int fan_out, Rng& rng);

/// Parameter of the given shape with N(0, stddev^2) entries.
dc::Tensor normal_param(dc::Shape shape, double stddev, Rng& rng);

}  // namespace tubemae::nn
