// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/nn/layers.hpp"

#include <cmath>

#include "tubemae/diffcore/ops.hpp"
#include "tubemae/nn/init.hpp"

namespace tubemae::nn {

dc::Tensor xavier_uniform(int fan_in, int fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  std::vector<double> values(static_cast<std::size_t>(fan_in) * fan_out);
  for (double& v : values) v = rng.uniform(-bound, bound);
  return dc::Tensor::from({fan_in, fan_out}, std::move(values), true);
}

dc::Tensor normal_param(dc::Shape shape, double stddev, Rng& rng) {
  std::vector<double> values(static_cast<std::size_t>(dc::numel_of(shape)));
  for (double& v : values) v = rng.normal(0.0, stddev);
  return dc::Tensor::from(std::move(shape), std::move(values), true);
}

Linear Linear::init(int in, int out, Rng& rng) {
  return Linear{xavier_uniform(in, out, rng), dc::Tensor::zeros({out}, true)};
}

dc::Tensor Linear::operator()(const dc::Tensor& x) const { return dc::linear(x, weight, bias); }

void Linear::collect(std::vector<dc::NamedTensor>& out, const std::string& prefix) const {
  out.push_back({prefix + "weight", weight});
  out.push_back({prefix + "bias", bias});
}

LayerNorm LayerNorm::init(int channels) {
  return LayerNorm{dc::Tensor::full({channels}, 1.0, true), dc::Tensor::zeros({channels}, true)};
}

dc::Tensor LayerNorm::operator()(const dc::Tensor& x) const { return dc::layer_norm(x, gamma, beta); }

void LayerNorm::collect(std::vector<dc::NamedTensor>& out, const std::string& prefix) const {
  out.push_back({prefix + "gamma", gamma});
  out.push_back({prefix + "beta", beta});
}

Mlp Mlp::init(int in, int hidden, int out, Rng& rng) {
  Mlp m;
  m.fc1 = Linear::init(in, hidden, rng);
  m.fc2 = Linear::init(hidden, out, rng);
  return m;
}

dc::Tensor Mlp::operator()(const dc::Tensor& x) const { return fc2(dc::gelu(fc1(x))); }

void Mlp::collect(std::vector<dc::NamedTensor>& out, const std::string& prefix) const {
  fc1.collect(out, prefix + "fc1.");
  fc2.collect(out, prefix + "fc2.");
}

}  // namespace tubemae::nn
