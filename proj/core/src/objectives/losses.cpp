// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/objectives/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tubemae/common/error.hpp"
#include "tubemae/diffcore/ops.hpp"

namespace tubemae::objectives {

namespace {

constexpr double kEps = 1e-8;

// Squared distance between 3-vectors.
inline double sq_dist(const double* a, const double* b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

// Index of the nearest point of `set` (count points) to `p`; ties to lower.
inline std::size_t nearest(const double* p, const double* set, std::size_t count, double* best_out) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t j = 0; j < count; ++j) {
    const double d = sq_dist(p, set + 3 * j);
    if (d < best) {
      best = d;
      arg = j;
    }
  }
  *best_out = best;
  return arg;
}

}  // namespace

ProjectionHeads ProjectionHeads::init(int channels, Rng& rng) {
  ProjectionHeads h;
  h.latent = nn::Mlp::init(channels, channels, channels, rng);
  h.motion_forward = nn::Mlp::init(channels, channels, channels, rng);
  h.motion_backward = nn::Mlp::init(channels, channels, channels, rng);
  h.global = nn::Mlp::init(channels, channels, channels, rng);
  return h;
}

void ProjectionHeads::collect(std::vector<dc::NamedTensor>& out, const std::string& prefix) const {
  latent.collect(out, prefix + "latent.");
  motion_forward.collect(out, prefix + "motion_forward.");
  motion_backward.collect(out, prefix + "motion_backward.");
  global.collect(out, prefix + "global.");
}

MotionDenominator parse_motion_denominator(const std::string& name) {
  if (name == "standard-inclusive") return MotionDenominator::kStandardInclusive;
  if (name == "literal-exclusive") return MotionDenominator::kLiteralExclusive;
  throw ConfigError("unknown motion denominator '" + name + "'");
}

std::string to_string(MotionDenominator d) {
  return d == MotionDenominator::kStandardInclusive ? "standard-inclusive" : "literal-exclusive";
}

LossFlags LossFlags::preset(const std::string& name) {
  // geo, lat, motion, global
  if (name == "B1") return {true, false, false, false};
  if (name == "B2") return {true, true, false, false};
  if (name == "B3") return {true, false, true, false};
  if (name == "B4") return {true, true, true, false};
  if (name == "B5") return {true, true, false, true};
  if (name == "B6") return {false, true, true, true};
  if (name == "B7" || name == "full") return {true, true, true, true};
  if (name == "segmentation") return {true, true, true, false};
  throw ConfigError("unknown loss preset '" + name + "'");
}

dc::Tensor chamfer_loss(const dc::Tensor& rec, const dc::Tensor& gt, int frames) {
  TUBEMAE_EXPECT(frames >= 1, "chamfer_loss: frames must be positive");
  TUBEMAE_EXPECT(rec.rank() == 2 && gt.rank() == 2, "chamfer_loss expects [sets, frames*points*3] inputs");
  TUBEMAE_EXPECT(rec.dim(0) == gt.dim(0), "chamfer_loss: set counts differ");
  const dc::Index sets = rec.dim(0);
  const dc::Index rec_width = rec.dim(1);
  const dc::Index gt_width = gt.dim(1);
  if (rec_width % (3 * frames) != 0 || gt_width % (3 * frames) != 0)
    throw DimensionError("chamfer_loss: row width is not frames*points*3");
  const auto na = static_cast<std::size_t>(rec_width / (3 * frames));
  const auto nb = static_cast<std::size_t>(gt_width / (3 * frames));
  TUBEMAE_EXPECT(na > 0 && nb > 0, "chamfer_loss: empty point set");

  const auto a = rec.data();
  const auto b = gt.data();
  // Nearest-neighbour indices are kept for the backward pass.
  std::vector<std::uint32_t> a_to_b(static_cast<std::size_t>(sets * frames) * na);
  std::vector<std::uint32_t> b_to_a(static_cast<std::size_t>(sets * frames) * nb);
  double total = 0.0;
  for (dc::Index s = 0; s < sets; ++s) {
    double set_sum = 0.0;
    for (dc::Index f = 0; f < frames; ++f) {
      const std::size_t sf = static_cast<std::size_t>(s * frames + f);
      const double* pa = a.data() + static_cast<std::size_t>(s * rec_width) + static_cast<std::size_t>(f) * na * 3;
      const double* pb = b.data() + static_cast<std::size_t>(s * gt_width) + static_cast<std::size_t>(f) * nb * 3;
      double sum_a = 0.0;
      for (std::size_t i = 0; i < na; ++i) {
        double d = 0.0;
        a_to_b[sf * na + i] = static_cast<std::uint32_t>(nearest(pa + 3 * i, pb, nb, &d));
        sum_a += d;
      }
      double sum_b = 0.0;
      for (std::size_t j = 0; j < nb; ++j) {
        double d = 0.0;
        b_to_a[sf * nb + j] = static_cast<std::uint32_t>(nearest(pb + 3 * j, pa, na, &d));
        sum_b += d;
      }
      set_sum += sum_a / static_cast<double>(na) + sum_b / static_cast<double>(nb);
    }
    total += set_sum / static_cast<double>(frames);
  }
  total /= static_cast<double>(sets);

  auto backward = [rec_node = rec.node(), gt_node = gt.node(), sets, frames, na, nb, rec_width, gt_width,
                   a_to_b = std::move(a_to_b), b_to_a = std::move(b_to_a)](dc::Node& self) {
    const double g = self.grad[0] / static_cast<double>(sets * frames);
    const auto& av = rec_node->data;
    const auto& bv = gt_node->data;
    double* ga = rec_node->requires_grad ? rec_node->grad_buffer().data() : nullptr;
    double* gb = gt_node->requires_grad ? gt_node->grad_buffer().data() : nullptr;
    const double wa = 2.0 * g / static_cast<double>(na);
    const double wb = 2.0 * g / static_cast<double>(nb);
    for (dc::Index s = 0; s < sets; ++s) {
      for (dc::Index f = 0; f < frames; ++f) {
        const std::size_t sf = static_cast<std::size_t>(s * frames + f);
        const std::size_t oa = static_cast<std::size_t>(s * rec_width) + static_cast<std::size_t>(f) * na * 3;
        const std::size_t ob = static_cast<std::size_t>(s * gt_width) + static_cast<std::size_t>(f) * nb * 3;
        for (std::size_t i = 0; i < na; ++i) {
          const std::size_t j = a_to_b[sf * na + i];
          for (std::size_t c = 0; c < 3; ++c) {
            const double d = wa * (av[oa + 3 * i + c] - bv[ob + 3 * j + c]);
            if (ga) ga[oa + 3 * i + c] += d;
            if (gb) gb[ob + 3 * j + c] -= d;
          }
        }
        for (std::size_t j = 0; j < nb; ++j) {
          const std::size_t i = b_to_a[sf * nb + j];
          for (std::size_t c = 0; c < 3; ++c) {
            const double d = wb * (bv[ob + 3 * j + c] - av[oa + 3 * i + c]);
            if (gb) gb[ob + 3 * j + c] += d;
            if (ga) ga[oa + 3 * i + c] -= d;
          }
        }
      }
    }
  };
  return dc::record({1}, {total}, {rec, gt}, std::move(backward), "chamfer_loss");
}

dc::Tensor cosine_alignment_loss(const dc::Tensor& projected, const dc::Tensor& target) {
  TUBEMAE_EXPECT(projected.shape() == target.shape(), "alignment inputs must be shape-aligned");
  const dc::Tensor cos = dc::cosine_similarity(projected, dc::stop_gradient(target), kEps);
  return dc::add_scalar(dc::scale(dc::mean(cos), -1.0), 1.0);
}

dc::Tensor latent_loss(const dc::Tensor& z_lat, const dc::Tensor& z, const ProjectionHeads& heads) {
  return cosine_alignment_loss(heads.latent(z_lat), z);
}

FrameFeatures pool_frames(const dc::Tensor& z, const std::vector<int>& row_frame, int total_frames) {
  TUBEMAE_EXPECT(z.rank() == 2, "pool_frames expects [rows, C]");
  TUBEMAE_EXPECT(static_cast<dc::Index>(row_frame.size()) == z.dim(0), "pool_frames: one frame id per row");
  std::vector<std::vector<dc::Index>> rows(static_cast<std::size_t>(total_frames));
  for (std::size_t i = 0; i < row_frame.size(); ++i) {
    const int f = row_frame[i];
    TUBEMAE_EXPECT(f >= 0 && f < total_frames, "pool_frames: frame id out of range");
    rows[static_cast<std::size_t>(f)].push_back(static_cast<dc::Index>(i));
  }
  FrameFeatures out;
  out.total_frames = total_frames;
  std::vector<dc::Tensor> pooled;
  for (int f = 0; f < total_frames; ++f) {
    const auto& r = rows[static_cast<std::size_t>(f)];
    if (r.empty()) continue;
    const dc::Tensor m = dc::max_axis(dc::gather_rows(z, r), 0);
    pooled.push_back(dc::reshape(m, {1, z.dim(1)}));
    out.frames.push_back(f);
  }
  TUBEMAE_EXPECT(!pooled.empty(), "pool_frames: no rows");
  out.features = pooled.size() == 1 ? pooled.front() : dc::concat(pooled, 0);
  return out;
}

FrameFeatures pool_frames(const dc::Tensor& z, int total_frames) {
  TUBEMAE_EXPECT(z.rank() == 2 && total_frames >= 1 && z.dim(0) % total_frames == 0,
                 "pool_frames: rows must form a frame-major grid");
  const dc::Index per_frame = z.dim(0) / total_frames;
  FrameFeatures out;
  out.total_frames = total_frames;
  out.features = dc::max_axis(dc::reshape(z, {total_frames, per_frame, z.dim(1)}), 1);
  for (int f = 0; f < total_frames; ++f) out.frames.push_back(f);
  return out;
}

namespace {

// One direction of the motion objective. `offset` is -1 (forward) or +1.
// Returns an undefined tensor when the direction has no pair.
dc::Tensor motion_direction(const dc::Tensor& projected, const std::vector<int>& frames, const dc::Tensor& targets,
                            int offset, const LossConfig& cfg) {
  const dc::Index candidates = targets.dim(0);
  std::vector<dc::Index> rows;
  std::vector<dc::Index> positives;
  for (std::size_t r = 0; r < frames.size(); ++r) {
    const int j = frames[r] + offset;
    if (j < 0 || j >= candidates) continue;
    rows.push_back(static_cast<dc::Index>(r));
    positives.push_back(j);
  }
  if (rows.empty()) return {};
  const auto pairs = static_cast<dc::Index>(rows.size());
  const dc::Tensor q = dc::normalize_rows(dc::gather_rows(projected, rows), kEps);
  const dc::Tensor logits = dc::scale(dc::matmul_nt(q, targets), 1.0 / cfg.temperature);
  std::vector<bool> include(static_cast<std::size_t>(pairs * candidates), true);
  std::vector<dc::Index> pos_flat(static_cast<std::size_t>(pairs));
  for (dc::Index p = 0; p < pairs; ++p) {
    const dc::Index j = positives[static_cast<std::size_t>(p)];
    pos_flat[static_cast<std::size_t>(p)] = p * candidates + j;
    if (cfg.motion_denominator == MotionDenominator::kLiteralExclusive)
      include[static_cast<std::size_t>(p * candidates + j)] = false;
  }
  const dc::Tensor lse = dc::masked_logsumexp(logits, include);
  return dc::mean(dc::sub(lse, dc::gather(logits, pos_flat)));
}

}  // namespace

dc::Tensor motion_loss(const FrameFeatures& online, const FrameFeatures& target, const ProjectionHeads& heads,
                       const LossConfig& cfg) {
  TUBEMAE_EXPECT(cfg.temperature > 0.0, "temperature must be positive");
  TUBEMAE_EXPECT(target.total_frames >= 2, "motion_loss needs at least two frames");
  TUBEMAE_EXPECT(target.features.dim(0) == target.total_frames, "motion targets must cover every frame");
  TUBEMAE_EXPECT(online.total_frames == target.total_frames, "motion_loss: frame counts differ");
  if (cfg.motion_denominator == MotionDenominator::kLiteralExclusive)
    TUBEMAE_EXPECT(target.total_frames >= 2, "literal denominator needs a negative frame");
  const dc::Tensor h = dc::normalize_rows(dc::stop_gradient(target.features), kEps);
  const dc::Tensor fwd = motion_direction(heads.motion_forward(online.features), online.frames, h, -1, cfg);
  const dc::Tensor bwd = motion_direction(heads.motion_backward(online.features), online.frames, h, +1, cfg);
  if (fwd.defined() && bwd.defined()) return dc::scale(dc::add(fwd, bwd), 0.5);
  if (fwd.defined()) return fwd;
  if (bwd.defined()) return bwd;
  throw ContractError("motion_loss: no visible frame has a temporal neighbour");
}

dc::Tensor pool_global(const dc::Tensor& z) {
  TUBEMAE_EXPECT(z.rank() == 2 && z.dim(0) >= 1, "pool_global expects [rows, C]");
  return dc::normalize_rows(dc::reshape(dc::max_axis(z, 0), {1, z.dim(1)}), kEps);
}

dc::Tensor info_nce(const dc::Tensor& query, const dc::Tensor& positive, const NegativeQueue& queue,
                    double temperature) {
  TUBEMAE_EXPECT(temperature > 0.0, "temperature must be positive");
  TUBEMAE_EXPECT(query.rank() == 2 && query.dim(0) == 1 && positive.shape() == query.shape(),
                 "info_nce expects [1, C] query and positive");
  dc::Tensor keys = dc::stop_gradient(positive);
  if (queue.size() > 0) keys = dc::concat({keys, queue.as_tensor()}, 0);
  const dc::Tensor logits = dc::scale(dc::matmul_nt(query, keys), 1.0 / temperature);
  const dc::Index zero = 0;
  return dc::reshape(dc::sub(dc::logsumexp(logits), dc::gather(logits, std::span<const dc::Index>(&zero, 1))), {1});
}

dc::Tensor global_loss(const dc::Tensor& q_hat, const dc::Tensor& q, const NegativeQueue& queue,
                       const ProjectionHeads& heads, const LossConfig& cfg) {
  return info_nce(dc::normalize_rows(heads.global(q_hat), kEps), q, queue, cfg.temperature);
}

CombinedLoss total_loss(const LossTerms& terms) {
  CombinedLoss out;
  const auto take = [&](const dc::Tensor& t, double& slot) {
    if (!t.defined()) return;
    slot = t.item();
    out.total = out.total.defined() ? dc::add(out.total, t) : t;
  };
  take(terms.geo, out.report.geo);
  take(terms.lat, out.report.lat);
  take(terms.global, out.report.global);
  take(terms.motion, out.report.motion);
  if (!out.total.defined()) out.total = dc::Tensor::scalar(0.0);
  out.report.total = out.total.item();
  return out;
}

double disentanglement_probe(const dc::Tensor& z_geo, const dc::Tensor& z_lat) {
  TUBEMAE_EXPECT(z_geo.shape() == z_lat.shape() && z_geo.rank() == 2, "probe inputs must be aligned [rows, C]");
  dc::NoGradGuard guard;
  const dc::Tensor cos = dc::cosine_similarity(z_geo, z_lat, kEps);
  double acc = 0.0;
  for (double c : cos.data()) acc += std::abs(c);
  return acc / static_cast<double>(cos.numel());
}

}  // namespace tubemae::objectives
