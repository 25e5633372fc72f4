// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/diffcore/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tubemae/common/error.hpp"

namespace tubemae::dc {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

void require_rank(const Tensor& a, std::size_t rank, const char* op) {
  if (a.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_str(a.shape()));
  }
}

// Views a shape as [outer, extent(axis), inner].
struct AxisSplit {
  Index outer = 1;
  Index extent = 1;
  Index inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) throw DimensionError("axis out of range for " + shape_str(shape));
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

Shape drop_axis(const Shape& shape, std::size_t axis) {
  Shape out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i != axis) out.push_back(shape[i]);
  }
  if (out.empty()) out.push_back(1);
  return out;
}

Index last_extent(const Tensor& a) { return a.shape().back(); }

std::vector<double>& pgrad(Node& self, std::size_t i) { return self.parents[i]->grad_buffer(); }
const std::vector<double>& pdata(const Node& self, std::size_t i) { return self.parents[i]->data; }
bool pneeds(const Node& self, std::size_t i) { return self.parents[i]->requires_grad; }

template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& a, const char* name, Fwd fwd, Deriv deriv) {
  std::vector<double> out(a.data().size());
  const auto in = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(in[i]);
  return record(a.shape(), std::move(out), {a},
                [deriv](Node& self) {
                  auto& g = pgrad(self, 0);
                  const auto& x = pdata(self, 0);
                  for (std::size_t i = 0; i < g.size(); ++i) {
                    g[i] += self.grad[i] * deriv(x[i], self.data[i]);
                  }
                },
                name);
}

double gelu_value(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

double gelu_deriv(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

Tensor extremum_axis(const Tensor& a, std::size_t axis, bool take_max, const char* name) {
  const auto s = split_at(a.shape(), axis);
  const auto in = a.data();
  std::vector<double> out(static_cast<std::size_t>(s.outer * s.inner));
  std::vector<Index> arg(out.size());
  for (Index o = 0; o < s.outer; ++o) {
    for (Index i = 0; i < s.inner; ++i) {
      Index best = 0;
      double best_v = in[static_cast<std::size_t>(o * s.extent * s.inner + i)];
      for (Index k = 1; k < s.extent; ++k) {
        const double v = in[static_cast<std::size_t>((o * s.extent + k) * s.inner + i)];
        if (take_max ? v > best_v : v < best_v) {
          best_v = v;
          best = k;
        }
      }
      const auto idx = static_cast<std::size_t>(o * s.inner + i);
      out[idx] = best_v;
      arg[idx] = (o * s.extent + best) * s.inner + i;
    }
  }
  return record(drop_axis(a.shape(), axis), std::move(out), {a},
                [arg = std::move(arg)](Node& self) {
                  auto& g = pgrad(self, 0);
                  for (std::size_t i = 0; i < arg.size(); ++i) {
                    g[static_cast<std::size_t>(arg[i])] += self.grad[i];
                  }
                },
                name);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.data().begin(), a.data().end());
  const auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bd[i];
  return record(a.shape(), std::move(out), {a, b},
                [](Node& self) {
                  for (std::size_t p = 0; p < 2; ++p) {
                    if (!pneeds(self, p)) continue;
                    auto& g = pgrad(self, p);
                    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
                  }
                },
                "add");
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.data().begin(), a.data().end());
  const auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bd[i];
  return record(a.shape(), std::move(out), {a, b},
                [](Node& self) {
                  if (pneeds(self, 0)) {
                    auto& g = pgrad(self, 0);
                    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
                  }
                  if (pneeds(self, 1)) {
                    auto& g = pgrad(self, 1);
                    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
                  }
                },
                "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.data().begin(), a.data().end());
  const auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bd[i];
  return record(a.shape(), std::move(out), {a, b},
                [](Node& self) {
                  for (std::size_t p = 0; p < 2; ++p) {
                    if (!pneeds(self, p)) continue;
                    auto& g = pgrad(self, p);
                    const auto& other = pdata(self, 1 - p);
                    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * other[i];
                  }
                },
                "mul");
}

Tensor div(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "div");
  std::vector<double> out(a.data().begin(), a.data().end());
  const auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= bd[i];
  return record(a.shape(), std::move(out), {a, b},
                [](Node& self) {
                  const auto& den = pdata(self, 1);
                  if (pneeds(self, 0)) {
                    auto& g = pgrad(self, 0);
                    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] / den[i];
                  }
                  if (pneeds(self, 1)) {
                    auto& g = pgrad(self, 1);
                    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i] * self.data[i] / den[i];
                  }
                },
                "div");
}

Tensor scale(const Tensor& a, double factor) {
  return unary(a, "scale", [factor](double x) { return factor * x; },
               [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& a, double value) {
  return unary(a, "add_scalar", [value](double x) { return x + value; }, [](double, double) { return 1.0; });
}

Tensor exp(const Tensor& a) {
  return unary(a, "exp", [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  for (double v : a.data()) {
    if (!(v > 0.0)) throw NumericError("log of non-positive value");
  }
  return unary(a, "log", [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor relu(const Tensor& a) {
  return unary(a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor gelu(const Tensor& a) {
  return unary(a, "gelu", gelu_value, [](double x, double) { return gelu_deriv(x); });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const Index m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  std::vector<double> out(static_cast<std::size_t>(m * n));
  MutMap(out.data(), m, n).noalias() = ConstMap(a.data().data(), m, k) * ConstMap(b.data().data(), k, n);
  return record({m, n}, std::move(out), {a, b},
                [m, k, n](Node& self) {
                  ConstMap gy(self.grad.data(), m, n);
                  if (pneeds(self, 0)) {
                    MutMap(pgrad(self, 0).data(), m, k).noalias() += gy * ConstMap(pdata(self, 1).data(), k, n).transpose();
                  }
                  if (pneeds(self, 1)) {
                    MutMap(pgrad(self, 1).data(), k, n).noalias() += ConstMap(pdata(self, 0).data(), m, k).transpose() * gy;
                  }
                },
                "matmul");
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul_nt");
  require_rank(b, 2, "matmul_nt");
  const Index m = a.dim(0), k = a.dim(1), n = b.dim(0);
  if (b.dim(1) != k) {
    throw DimensionError("matmul_nt: " + shape_str(a.shape()) + " x " + shape_str(b.shape()) + "^T");
  }
  std::vector<double> out(static_cast<std::size_t>(m * n));
  MutMap(out.data(), m, n).noalias() =
      ConstMap(a.data().data(), m, k) * ConstMap(b.data().data(), n, k).transpose();
  return record({m, n}, std::move(out), {a, b},
                [m, k, n](Node& self) {
                  ConstMap gy(self.grad.data(), m, n);
                  if (pneeds(self, 0)) {
                    MutMap(pgrad(self, 0).data(), m, k).noalias() += gy * ConstMap(pdata(self, 1).data(), n, k);
                  }
                  if (pneeds(self, 1)) {
                    MutMap(pgrad(self, 1).data(), n, k).noalias() += gy.transpose() * ConstMap(pdata(self, 0).data(), m, k);
                  }
                },
                "matmul_nt");
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  const Index m = a.dim(0), n = a.dim(1);
  std::vector<double> out(static_cast<std::size_t>(m * n));
  MutMap(out.data(), n, m) = ConstMap(a.data().data(), m, n).transpose();
  return record({n, m}, std::move(out), {a},
                [m, n](Node& self) {
                  MutMap(pgrad(self, 0).data(), m, n) += ConstMap(self.grad.data(), n, m).transpose();
                },
                "transpose");
}

Tensor softmax(const Tensor& a) {
  const Index c = last_extent(a);
  const Index rows = a.numel() / c;
  const auto in = a.data();
  std::vector<double> out(in.size());
  for (Index r = 0; r < rows; ++r) {
    const double* x = in.data() + r * c;
    double* y = out.data() + r * c;
    const double mx = *std::max_element(x, x + c);
    double z = 0.0;
    for (Index j = 0; j < c; ++j) z += (y[j] = std::exp(x[j] - mx));
    for (Index j = 0; j < c; ++j) y[j] /= z;
  }
  return record(a.shape(), std::move(out), {a},
                [rows, c](Node& self) {
                  auto& g = pgrad(self, 0);
                  for (Index r = 0; r < rows; ++r) {
                    const double* y = self.data.data() + r * c;
                    const double* gy = self.grad.data() + r * c;
                    double dot = 0.0;
                    for (Index j = 0; j < c; ++j) dot += gy[j] * y[j];
                    for (Index j = 0; j < c; ++j) g[static_cast<std::size_t>(r * c + j)] += y[j] * (gy[j] - dot);
                  }
                },
                "softmax");
}

Tensor masked_logsumexp(const Tensor& a, const std::vector<bool>& include) {
  if (static_cast<Index>(include.size()) != a.numel()) {
    throw DimensionError("masked_logsumexp: mask size does not match " + shape_str(a.shape()));
  }
  const Index c = last_extent(a);
  const Index rows = a.numel() / c;
  const auto in = a.data();
  std::vector<double> out(static_cast<std::size_t>(rows));
  for (Index r = 0; r < rows; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < c; ++j) {
      if (include[static_cast<std::size_t>(r * c + j)]) mx = std::max(mx, in[static_cast<std::size_t>(r * c + j)]);
    }
    if (!std::isfinite(mx)) throw ContractError("masked_logsumexp: row with no included entries");
    double z = 0.0;
    for (Index j = 0; j < c; ++j) {
      if (include[static_cast<std::size_t>(r * c + j)]) z += std::exp(in[static_cast<std::size_t>(r * c + j)] - mx);
    }
    out[static_cast<std::size_t>(r)] = mx + std::log(z);
  }
  Shape shape = drop_axis(a.shape(), a.rank() - 1);
  return record(std::move(shape), std::move(out), {a},
                [rows, c, include](Node& self) {
                  auto& g = pgrad(self, 0);
                  const auto& x = pdata(self, 0);
                  for (Index r = 0; r < rows; ++r) {
                    for (Index j = 0; j < c; ++j) {
                      const auto idx = static_cast<std::size_t>(r * c + j);
                      if (include[idx]) g[idx] += self.grad[static_cast<std::size_t>(r)] * std::exp(x[idx] - self.data[static_cast<std::size_t>(r)]);
                    }
                  }
                },
                "logsumexp");
}

Tensor logsumexp(const Tensor& a) { return masked_logsumexp(a, std::vector<bool>(static_cast<std::size_t>(a.numel()), true)); }

namespace {

// Shared kernel for both layer_norm overloads. Stores normalized values and
// inverse std for the backward pass.
Tensor layer_norm_impl(const Tensor& x, const Tensor* gamma, const Tensor* beta, double eps) {
  const Index c = last_extent(x);
  const Index rows = x.numel() / c;
  if (gamma) {
    if (gamma->numel() != c || beta->numel() != c) {
      throw DimensionError("layer_norm: affine parameters must have " + std::to_string(c) + " entries");
    }
  }
  const auto in = x.data();
  std::vector<double> xhat(in.size());
  std::vector<double> inv_std(static_cast<std::size_t>(rows));
  std::vector<double> out(in.size());
  for (Index r = 0; r < rows; ++r) {
    const double* xr = in.data() + r * c;
    double mu = 0.0;
    for (Index j = 0; j < c; ++j) mu += xr[j];
    mu /= static_cast<double>(c);
    double var = 0.0;
    for (Index j = 0; j < c; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<double>(c);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<std::size_t>(r)] = is;
    for (Index j = 0; j < c; ++j) {
      const auto idx = static_cast<std::size_t>(r * c + j);
      xhat[idx] = (xr[j] - mu) * is;
      out[idx] = gamma ? xhat[idx] * gamma->data()[static_cast<std::size_t>(j)] + beta->data()[static_cast<std::size_t>(j)]
                       : xhat[idx];
    }
  }
  std::vector<Tensor> parents{x};
  if (gamma) {
    parents.push_back(*gamma);
    parents.push_back(*beta);
  }
  const bool affine = gamma != nullptr;
  return record(x.shape(), std::move(out), std::move(parents),
                [rows, c, affine, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
                  std::vector<double> gxhat(self.grad);
                  if (affine) {
                    const auto& gam = pdata(self, 1);
                    for (Index r = 0; r < rows; ++r) {
                      for (Index j = 0; j < c; ++j) gxhat[static_cast<std::size_t>(r * c + j)] *= gam[static_cast<std::size_t>(j)];
                    }
                    if (pneeds(self, 1)) {
                      auto& gg = pgrad(self, 1);
                      for (Index r = 0; r < rows; ++r) {
                        for (Index j = 0; j < c; ++j) {
                          const auto idx = static_cast<std::size_t>(r * c + j);
                          gg[static_cast<std::size_t>(j)] += self.grad[idx] * xhat[idx];
                        }
                      }
                    }
                    if (pneeds(self, 2)) {
                      auto& gb = pgrad(self, 2);
                      for (Index r = 0; r < rows; ++r) {
                        for (Index j = 0; j < c; ++j) gb[static_cast<std::size_t>(j)] += self.grad[static_cast<std::size_t>(r * c + j)];
                      }
                    }
                  }
                  if (!pneeds(self, 0)) return;
                  auto& gx = pgrad(self, 0);
                  const double inv_c = 1.0 / static_cast<double>(c);
                  for (Index r = 0; r < rows; ++r) {
                    double mean_g = 0.0, mean_gx = 0.0;
                    for (Index j = 0; j < c; ++j) {
                      const auto idx = static_cast<std::size_t>(r * c + j);
                      mean_g += gxhat[idx];
                      mean_gx += gxhat[idx] * xhat[idx];
                    }
                    mean_g *= inv_c;
                    mean_gx *= inv_c;
                    const double is = inv_std[static_cast<std::size_t>(r)];
                    for (Index j = 0; j < c; ++j) {
                      const auto idx = static_cast<std::size_t>(r * c + j);
                      gx[idx] += is * (gxhat[idx] - mean_g - xhat[idx] * mean_gx);
                    }
                  }
                },
                "layer_norm");
}

}  // namespace

Tensor layer_norm(const Tensor& x, double eps) { return layer_norm_impl(x, nullptr, nullptr, eps); }

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  return layer_norm_impl(x, &gamma, &beta, eps);
}

Tensor max_axis(const Tensor& a, std::size_t axis) { return extremum_axis(a, axis, true, "max_axis"); }
Tensor min_axis(const Tensor& a, std::size_t axis) { return extremum_axis(a, axis, false, "min_axis"); }

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return record({1}, {s}, {a},
                [](Node& self) {
                  auto& g = pgrad(self, 0);
                  for (double& v : g) v += self.grad[0];
                },
                "sum");
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.numel())); }

Tensor reshape(const Tensor& a, Shape shape) {
  if (numel_of(shape) != a.numel()) {
    throw DimensionError("reshape: " + shape_str(a.shape()) + " -> " + shape_str(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  return record(std::move(shape), std::move(out), {a},
                [](Node& self) {
                  auto& g = pgrad(self, 0);
                  for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
                },
                "reshape");
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw ContractError("concat: no operands");
  const Shape& ref = parts.front().shape();
  if (axis >= ref.size()) throw DimensionError("concat: axis out of range");
  Shape out_shape = ref;
  out_shape[axis] = 0;
  std::vector<Index> extents;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == ref.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = (i == axis) || s[i] == ref[i];
    if (!ok) throw DimensionError("concat: incompatible " + shape_str(s) + " with " + shape_str(ref));
    out_shape[axis] += s[axis];
    extents.push_back(s[axis]);
  }
  const auto split = split_at(out_shape, axis);
  std::vector<double> out(static_cast<std::size_t>(numel_of(out_shape)));
  Index offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto src = parts[p].data();
    const Index block = extents[p] * split.inner;
    for (Index o = 0; o < split.outer; ++o) {
      std::copy_n(src.begin() + o * block, block, out.begin() + (o * split.extent * split.inner + offset));
    }
    offset += block;
  }
  return record(std::move(out_shape), std::move(out), parts,
                [split, extents](Node& self) {
                  Index offset = 0;
                  for (std::size_t p = 0; p < extents.size(); ++p) {
                    const Index block = extents[p] * split.inner;
                    if (pneeds(self, p)) {
                      auto& g = pgrad(self, p);
                      for (Index o = 0; o < split.outer; ++o) {
                        const double* src = self.grad.data() + o * split.extent * split.inner + offset;
                        double* dst = g.data() + o * block;
                        for (Index i = 0; i < block; ++i) dst[i] += src[i];
                      }
                    }
                    offset += block;
                  }
                },
                "concat");
}

Tensor narrow(const Tensor& a, std::size_t axis, Index start, Index length) {
  const auto s = split_at(a.shape(), axis);
  if (start < 0 || length <= 0 || start + length > s.extent) {
    throw DimensionError("narrow: range [" + std::to_string(start) + "," + std::to_string(start + length) +
                         ") outside " + shape_str(a.shape()));
  }
  Shape out_shape = a.shape();
  out_shape[axis] = length;
  const auto in = a.data();
  std::vector<double> out(static_cast<std::size_t>(s.outer * length * s.inner));
  for (Index o = 0; o < s.outer; ++o) {
    std::copy_n(in.begin() + (o * s.extent + start) * s.inner, length * s.inner,
                out.begin() + o * length * s.inner);
  }
  return record(std::move(out_shape), std::move(out), {a},
                [s, start, length](Node& self) {
                  auto& g = pgrad(self, 0);
                  for (Index o = 0; o < s.outer; ++o) {
                    const double* src = self.grad.data() + o * length * s.inner;
                    double* dst = g.data() + (o * s.extent + start) * s.inner;
                    for (Index i = 0; i < length * s.inner; ++i) dst[i] += src[i];
                  }
                },
                "narrow");
}

Tensor gather_rows(const Tensor& a, std::span<const Index> rows) {
  require_rank(a, 2, "gather_rows");
  const Index n = a.dim(0), c = a.dim(1);
  if (rows.empty()) throw DimensionError("gather_rows: empty index list");
  std::vector<Index> idx(rows.begin(), rows.end());
  std::vector<double> out(idx.size() * static_cast<std::size_t>(c));
  const auto in = a.data();
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0 || idx[r] >= n) throw DimensionError("gather_rows: index out of range");
    std::copy_n(in.begin() + idx[r] * c, c, out.begin() + static_cast<Index>(r) * c);
  }
  const auto count = static_cast<Index>(idx.size());
  return record({count, c}, std::move(out), {a},
                [idx = std::move(idx), c](Node& self) {
                  auto& g = pgrad(self, 0);
                  for (std::size_t r = 0; r < idx.size(); ++r) {
                    for (Index j = 0; j < c; ++j) g[static_cast<std::size_t>(idx[r] * c + j)] += self.grad[r * static_cast<std::size_t>(c) + static_cast<std::size_t>(j)];
                  }
                },
                "gather_rows");
}

Tensor gather(const Tensor& a, std::span<const Index> flat) {
  if (flat.empty()) throw DimensionError("gather: empty index list");
  std::vector<Index> idx(flat.begin(), flat.end());
  std::vector<double> out(idx.size());
  const auto in = a.data();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= a.numel()) throw DimensionError("gather: index out of range");
    out[i] = in[static_cast<std::size_t>(idx[i])];
  }
  const auto count = static_cast<Index>(idx.size());
  return record({count}, std::move(out), {a},
                [idx = std::move(idx)](Node& self) {
                  auto& g = pgrad(self, 0);
                  for (std::size_t i = 0; i < idx.size(); ++i) g[static_cast<std::size_t>(idx[i])] += self.grad[i];
                },
                "gather");
}

Tensor repeat_rows(const Tensor& row, Index n) {
  const bool ok = row.rank() == 1 || (row.rank() == 2 && row.dim(0) == 1);
  if (!ok || n <= 0) throw DimensionError("repeat_rows: expected [C] or [1,C], got " + shape_str(row.shape()));
  const Index c = row.numel();
  std::vector<double> out(static_cast<std::size_t>(n * c));
  const auto in = row.data();
  for (Index r = 0; r < n; ++r) std::copy(in.begin(), in.end(), out.begin() + r * c);
  return record({n, c}, std::move(out), {row},
                [n, c](Node& self) {
                  auto& g = pgrad(self, 0);
                  for (Index r = 0; r < n; ++r) {
                    for (Index j = 0; j < c; ++j) g[static_cast<std::size_t>(j)] += self.grad[static_cast<std::size_t>(r * c + j)];
                  }
                },
                "repeat_rows");
}

Tensor cosine_similarity(const Tensor& a, const Tensor& b, double eps) {
  require_same_shape(a, b, "cosine_similarity");
  require_rank(a, 2, "cosine_similarity");
  const Index n = a.dim(0), c = a.dim(1);
  const auto ad = a.data(), bd = b.data();
  std::vector<double> out(static_cast<std::size_t>(n));
  std::vector<double> na(out.size()), nb(out.size()), den(out.size());
  for (Index r = 0; r < n; ++r) {
    double dot = 0.0, sa = 0.0, sb = 0.0;
    for (Index j = 0; j < c; ++j) {
      const auto idx = static_cast<std::size_t>(r * c + j);
      dot += ad[idx] * bd[idx];
      sa += ad[idx] * ad[idx];
      sb += bd[idx] * bd[idx];
    }
    const auto ri = static_cast<std::size_t>(r);
    na[ri] = std::sqrt(sa);
    nb[ri] = std::sqrt(sb);
    den[ri] = std::max(na[ri] * nb[ri], eps);
    out[ri] = dot / den[ri];
  }
  return record({n}, std::move(out), {a, b},
                [n, c, eps, na, nb, den](Node& self) {
                  for (std::size_t p = 0; p < 2; ++p) {
                    if (!pneeds(self, p)) continue;
                    auto& g = pgrad(self, p);
                    const auto& self_v = pdata(self, p);
                    const auto& other_v = pdata(self, 1 - p);
                    const auto& self_n = p == 0 ? na : nb;
                    for (Index r = 0; r < n; ++r) {
                      const auto ri = static_cast<std::size_t>(r);
                      const double gy = self.grad[ri];
                      const bool clamped = na[ri] * nb[ri] <= eps;
                      for (Index j = 0; j < c; ++j) {
                        const auto idx = static_cast<std::size_t>(r * c + j);
                        double d = other_v[idx] / den[ri];
                        if (!clamped) d -= self.data[ri] * self_v[idx] / (self_n[ri] * self_n[ri]);
                        g[idx] += gy * d;
                      }
                    }
                  }
                },
                "cosine_similarity");
}

Tensor normalize_rows(const Tensor& a, double eps) {
  require_rank(a, 2, "normalize_rows");
  const Index n = a.dim(0), c = a.dim(1);
  const auto in = a.data();
  std::vector<double> out(in.size());
  std::vector<double> norms(static_cast<std::size_t>(n));
  for (Index r = 0; r < n; ++r) {
    double s = 0.0;
    for (Index j = 0; j < c; ++j) s += in[static_cast<std::size_t>(r * c + j)] * in[static_cast<std::size_t>(r * c + j)];
    const double nr = std::max(std::sqrt(s), eps);
    norms[static_cast<std::size_t>(r)] = nr;
    for (Index j = 0; j < c; ++j) out[static_cast<std::size_t>(r * c + j)] = in[static_cast<std::size_t>(r * c + j)] / nr;
  }
  return record(a.shape(), std::move(out), {a},
                [n, c, eps, norms = std::move(norms)](Node& self) {
                  auto& g = pgrad(self, 0);
                  for (Index r = 0; r < n; ++r) {
                    const double nr = norms[static_cast<std::size_t>(r)];
                    const double* y = self.data.data() + r * c;
                    const double* gy = self.grad.data() + r * c;
                    double dot = 0.0;
                    if (nr > eps) {
                      for (Index j = 0; j < c; ++j) dot += gy[j] * y[j];
                    }
                    for (Index j = 0; j < c; ++j) g[static_cast<std::size_t>(r * c + j)] += (gy[j] - dot * y[j]) / nr;
                  }
                },
                "normalize_rows");
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  const Tensor y = matmul(x, weight);
  return add(y, repeat_rows(bias, y.dim(0)));
}

}  // namespace tubemae::dc
