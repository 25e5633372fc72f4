// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "tubemae/common/rng.hpp"
#include "tubemae/diffcore/gradcheck.hpp"
#include "tubemae/diffcore/tensor.hpp"

namespace tubemae::nn {

struct Linear {
  dc::Tensor weight;  // [in, out]
  dc::Tensor bias;    // [out]

  static Linear init(int in, int out, Rng& rng);
  dc::Tensor operator()(const dc::Tensor& x) const;
  void collect(std::vector<dc::NamedTensor>& out, const std::string& prefix) const;
};

struct LayerNorm {
  dc::Tensor gamma;
  dc::Tensor beta;

  static LayerNorm init(int channels);
  dc::Tensor operator()(const dc::Tensor& x) const;
  void collect(std::vector<dc::NamedTensor>& out, const std::string& prefix) const;
};

/// Linear -> GELU -> Linear.
struct Mlp {
  Linear fc1;
  Linear fc2;

  static Mlp init(int in, int hidden, int out, Rng& rng);
  dc::Tensor operator()(const dc::Tensor& x) const;
  void collect(std::vector<dc::NamedTensor>& out, const std::string& prefix) const;
};

}  // namespace tubemae::nn
