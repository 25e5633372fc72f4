// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Differentiable primitives. There is no implicit broadcasting: operands of
// elementwise ops must have identical shapes, and replication is spelled out
// with repeat_rows. Shape violations throw DimensionError.

#pragma once

#include <span>
#include <vector>

#include "tubemae/diffcore/tensor.hpp"

namespace tubemae::dc {

// Elementwise, identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double value);
Tensor exp(const Tensor& a);
/// Natural log; inputs must be positive.
Tensor log(const Tensor& a);
Tensor relu(const Tensor& a);
/// Exact (erf) GELU.
Tensor gelu(const Tensor& a);

// Matrix products on rank-2 tensors.
Tensor matmul(const Tensor& a, const Tensor& b);     // [m,k] x [k,n]
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // [m,k] x [n,k]^T
Tensor transpose(const Tensor& a);

/// Softmax along the last axis.
Tensor softmax(const Tensor& a);
/// log(sum(exp(row))) along the last axis; output drops that axis.
Tensor logsumexp(const Tensor& a);
/// As logsumexp, restricted to entries where `include` is true (row-major,
/// same numel as `a`). Each row needs at least one included entry.
Tensor masked_logsumexp(const Tensor& a, const std::vector<bool>& include);

/// Normalizes each last-axis slice to zero mean, unit variance.
Tensor layer_norm(const Tensor& x, double eps = 1e-5);
/// layer_norm followed by a per-channel affine map; gamma and beta are [C].
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

/// Maximum along `axis`; that axis is removed (rank-1 inputs give shape [1]).
Tensor max_axis(const Tensor& a, std::size_t axis);
Tensor min_axis(const Tensor& a, std::size_t axis);
Tensor sum(const Tensor& a);   // scalar [1]
Tensor mean(const Tensor& a);  // scalar [1]

Tensor reshape(const Tensor& a, Shape shape);
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
/// Sub-range [start, start+length) along `axis`.
Tensor narrow(const Tensor& a, std::size_t axis, Index start, Index length);
/// Rows of a rank-2 tensor by index (repeats allowed).
Tensor gather_rows(const Tensor& a, std::span<const Index> rows);
/// Flat elements by index; result is rank 1.
Tensor gather(const Tensor& a, std::span<const Index> flat);
/// Tiles a [C] or [1,C] tensor into [n,C].
Tensor repeat_rows(const Tensor& row, Index n);

/// Row-wise cosine similarity of two [n,C] tensors, eps-guarded norms -> [n].
Tensor cosine_similarity(const Tensor& a, const Tensor& b, double eps = 1e-8);
/// Divides each row of [n,C] by max(norm, eps).
Tensor normalize_rows(const Tensor& a, double eps = 1e-8);

/// x W + repeat_rows(b): x [n,in], W [in,out], b [out].
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

}  // namespace tubemae::dc
