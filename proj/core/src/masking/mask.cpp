// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/masking/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tubemae/common/error.hpp"
#include "tubemae/common/rng.hpp"
#include "tubemae/diffcore/ops.hpp"

namespace tubemae::masking {

MaskStrategy parse_strategy(const std::string& name) {
  if (name == "frame") return MaskStrategy::kFrame;
  if (name == "video") return MaskStrategy::kVideo;
  if (name == "block") return MaskStrategy::kBlock;
  throw ConfigError("unknown mask strategy '" + name + "' (expected frame, video or block)");
}

std::string to_string(MaskStrategy s) {
  switch (s) {
    case MaskStrategy::kFrame: return "frame";
    case MaskStrategy::kVideo: return "video";
    case MaskStrategy::kBlock: return "block";
  }
  return "frame";
}

int MaskPlan::visible_count() const { return static_cast<int>(std::count(visible.begin(), visible.end(), 1)); }

int MaskPlan::visible_in_frame(int frame) const {
  const auto begin = visible.begin() + static_cast<std::ptrdiff_t>(frame) * per_frame;
  return static_cast<int>(std::count(begin, begin + per_frame, 1));
}

std::vector<int> MaskPlan::visible_indices() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < visible.size(); ++i) {
    if (visible[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> MaskPlan::masked_indices() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < visible.size(); ++i) {
    if (!visible[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

int visible_per_frame(int per_frame, double ratio) {
  TUBEMAE_EXPECT(ratio > 0.0 && ratio < 1.0, "mask ratio must lie in (0, 1)");
  // Ratios are decimal fractions, so (1 - 0.65) * 10 lands just below the .5
  // tie in binary. The nudge restores round-half-up for such exact ties.
  const int v = static_cast<int>(std::lround((1.0 - ratio) * per_frame + 1e-9));
  TUBEMAE_EXPECT(v >= 1, "mask ratio leaves no visible tube per frame");
  return v;
}

namespace {

void mask_frame_random(MaskPlan& plan, int frame, int keep, Rng& rng) {
  std::vector<int> order(static_cast<std::size_t>(plan.per_frame));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  for (int i = 0; i < keep; ++i) {
    plan.visible[static_cast<std::size_t>(frame) * plan.per_frame + order[static_cast<std::size_t>(i)]] = 1;
  }
}

void mask_frame_block(MaskPlan& plan, int frame, int keep, Rng& rng,
                      const std::vector<std::array<double, 4>>& anchors) {
  const int n = plan.per_frame;
  const auto base = static_cast<std::size_t>(frame) * n;
  const int seed_anchor = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
  const auto& s = anchors[base + seed_anchor];
  std::vector<std::pair<double, int>> by_distance;
  for (int k = 0; k < n; ++k) {
    const auto& a = anchors[base + k];
    const double d2 = (a[0] - s[0]) * (a[0] - s[0]) + (a[1] - s[1]) * (a[1] - s[1]) + (a[2] - s[2]) * (a[2] - s[2]);
    by_distance.emplace_back(k == seed_anchor ? -1.0 : d2, k);
  }
  std::sort(by_distance.begin(), by_distance.end());
  std::fill(plan.visible.begin() + static_cast<std::ptrdiff_t>(base),
            plan.visible.begin() + static_cast<std::ptrdiff_t>(base + n), 1);
  const int masked = n - keep;
  for (int i = 0; i < masked; ++i) plan.visible[base + by_distance[static_cast<std::size_t>(i)].second] = 0;
}

}  // namespace

MaskPlan make_mask(int frames, int per_frame, MaskStrategy strategy, double ratio, std::uint64_t seed,
                   const std::vector<std::array<double, 4>>* anchors) {
  TUBEMAE_EXPECT(frames >= 1 && per_frame >= 1, "make_mask: empty grid");
  TUBEMAE_EXPECT(ratio > 0.0 && ratio < 1.0, "mask ratio must lie in (0, 1)");
  MaskPlan plan;
  plan.strategy = strategy;
  plan.ratio = ratio;
  plan.frames = frames;
  plan.per_frame = per_frame;
  plan.seed = seed;
  plan.visible.assign(static_cast<std::size_t>(frames) * per_frame, 0);
  Rng rng(seed);

  switch (strategy) {
    case MaskStrategy::kFrame: {
      const int keep = visible_per_frame(per_frame, ratio);
      for (int f = 0; f < frames; ++f) mask_frame_random(plan, f, keep, rng);
      break;
    }
    case MaskStrategy::kVideo: {
      const int total = frames * per_frame;
      const int keep = std::max(1, static_cast<int>(std::lround((1.0 - ratio) * total)));
      std::vector<int> order(static_cast<std::size_t>(total));
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(order);
      for (int i = 0; i < keep; ++i) plan.visible[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
      break;
    }
    case MaskStrategy::kBlock: {
      TUBEMAE_EXPECT(anchors != nullptr && anchors->size() == plan.visible.size(),
                     "block masking needs one anchor coordinate per grid cell");
      const int keep = visible_per_frame(per_frame, ratio);
      for (int f = 0; f < frames; ++f) mask_frame_block(plan, f, keep, rng, *anchors);
      break;
    }
  }
  return plan;
}

SplitEmbeddings split_embeddings(const embedding::EmbeddingBatch& batch, const MaskPlan& plan,
                                 const geometry::TubeBatch& tubes) {
  TUBEMAE_EXPECT(plan.frames == batch.anchor_frames && plan.per_frame == batch.anchors_per_frame,
                 "split_embeddings: plan grid does not match the embedding batch");
  TUBEMAE_EXPECT(tubes.anchor_count() == batch.rows(), "split_embeddings: tube batch does not match");
  SplitEmbeddings out;
  out.visible_index = plan.visible_indices();
  out.masked_index = plan.masked_indices();
  TUBEMAE_EXPECT(!out.visible_index.empty(), "split_embeddings: no visible tubes");

  std::vector<dc::Index> rows(out.visible_index.begin(), out.visible_index.end());
  out.visible.embeddings = dc::gather_rows(batch.embeddings, rows);
  out.visible.anchor_frames = batch.anchor_frames;
  out.visible.source_frames = batch.source_frames;
  const bool uniform = plan.strategy != MaskStrategy::kVideo;
  out.visible.anchors_per_frame = uniform ? plan.visible_in_frame(0) : 0;
  for (int i : out.visible_index) {
    out.visible.anchors.push_back(batch.anchors[static_cast<std::size_t>(i)]);
    out.visible_frame.push_back(i / plan.per_frame);
  }

  const std::size_t per_tube = static_cast<std::size_t>(tubes.members_per_anchor()) * 3;
  for (int i : out.masked_index) {
    out.masked_anchors.push_back(batch.anchors[static_cast<std::size_t>(i)]);
    const auto begin = tubes.ground_truth.begin() + static_cast<std::ptrdiff_t>(per_tube * i);
    out.masked_ground_truth.insert(out.masked_ground_truth.end(), begin, begin + static_cast<std::ptrdiff_t>(per_tube));
  }
  return out;
}

}  // namespace tubemae::masking
