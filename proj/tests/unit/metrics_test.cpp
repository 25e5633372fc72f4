// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "tubemae/common/error.hpp"
#include "tubemae/common/rng.hpp"
#include "tubemae/metrics/metrics.hpp"

namespace mt = tubemae::metrics;

namespace {

// Frame labels made of `segments` runs; adjacent runs may share a label only
// when `allow_repeat` is set, which merges them.
std::vector<int> random_labels(tubemae::Rng& rng, int segments, int classes) {
  std::vector<int> out;
  int prev = -1;
  for (int s = 0; s < segments; ++s) {
    int label = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
    if (label == prev) label = (label + 1) % classes;
    const int len = 1 + static_cast<int>(rng.below(6));
    out.insert(out.end(), static_cast<std::size_t>(len), label);
    prev = label;
  }
  return out;
}

// Same length as `gt`, with boundaries jittered and a few labels swapped.
std::vector<int> perturbed(const std::vector<int>& gt, tubemae::Rng& rng, int classes) {
  auto p = gt;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto r = rng.uniform();
    if (r < 0.1) p[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
    else if (r < 0.2 && i > 0) p[i] = p[i - 1];
  }
  return p;
}

}  // namespace

TEST(SegmentMetrics, EditScoreMatchesDynamicProgrammingOracle) {
  tubemae::Rng rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const auto gt = random_labels(rng, 1 + static_cast<int>(rng.below(20)), 4);
    const auto pred = perturbed(gt, rng, 4);
    EXPECT_NEAR(mt::segmental_edit_score(pred, gt), oracle::edit_score(pred, gt), 1e-12) << "trial " << trial;
  }
}

TEST(SegmentMetrics, F1MatchesExhaustiveMatching) {
  tubemae::Rng rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    const auto gt = random_labels(rng, 1 + static_cast<int>(rng.below(8)), 3);
    const auto pred = perturbed(gt, rng, 3);
    for (double thr : mt::kF1Thresholds)
      EXPECT_NEAR(mt::f1_at(pred, gt, thr), oracle::f1(pred, gt, thr), 1e-12) << "trial " << trial << " thr " << thr;
  }
}

TEST(SegmentMetrics, PerfectPredictionScoresOneHundredEverywhere) {
  tubemae::Rng rng(3);
  const auto gt = random_labels(rng, 7, 3);
  const auto s = mt::score_segmentation({gt}, {gt});
  EXPECT_EQ(s.accuracy, 100.0);
  EXPECT_EQ(s.edit, 100.0);
  EXPECT_EQ(s.f1_10, 100.0);
  EXPECT_EQ(s.f1_25, 100.0);
  EXPECT_EQ(s.f1_50, 100.0);
}

TEST(SegmentMetrics, BoundedAndInvariantToRelabeling) {
  tubemae::Rng rng(4);
  const std::vector<int> perm{2, 0, 3, 1};
  for (int trial = 0; trial < 100; ++trial) {
    const auto gt = random_labels(rng, 1 + static_cast<int>(rng.below(10)), 4);
    const auto pred = perturbed(gt, rng, 4);
    auto rg = gt, rp = pred;
    for (auto& x : rg) x = perm[static_cast<std::size_t>(x)];
    for (auto& x : rp) x = perm[static_cast<std::size_t>(x)];
    const double e = mt::segmental_edit_score(pred, gt);
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, 100.0);
    EXPECT_EQ(e, mt::segmental_edit_score(rp, rg));
    for (double thr : mt::kF1Thresholds) {
      const double f = mt::f1_at(pred, gt, thr);
      EXPECT_GE(f, 0.0);
      EXPECT_LE(f, 100.0);
      EXPECT_EQ(f, mt::f1_at(rp, rg, thr));
    }
  }
}

TEST(SegmentMetrics, RunLengthEncodingRoundTrips) {
  tubemae::Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto frames = random_labels(rng, 1 + static_cast<int>(rng.below(10)), 3);
    const auto seq = mt::SegmentSeq::from_frames(frames);
    EXPECT_EQ(seq.expand(), frames);
    EXPECT_EQ(static_cast<int>(seq.size()), static_cast<int>(oracle::segments(frames).size()));
  }
}

TEST(SegmentMetrics, HandComputedExample) {
  const std::vector<int> gt{0, 0, 0, 1, 1, 1, 2, 2};
  const std::vector<int> pred{0, 0, 1, 1, 1, 1, 1, 2};
  EXPECT_DOUBLE_EQ(mt::frame_accuracy(pred, gt), 100.0 * 6 / 8);
  EXPECT_DOUBLE_EQ(mt::segmental_edit_score(pred, gt), 100.0);
  // IoUs: label0 2/3, label1 3/5, label2 1/2.
  EXPECT_DOUBLE_EQ(mt::f1_at(pred, gt, 0.5), 100.0);
  EXPECT_DOUBLE_EQ(mt::f1_at(pred, gt, 0.55), 100.0 * 2 * 2 / 6);
  EXPECT_DOUBLE_EQ(mt::segment_iou({0, 0, 3}, {0, 0, 2}), 2.0 / 3.0);
}

TEST(SegmentMetrics, LengthMismatchIsAContractError) {
  EXPECT_THROW(mt::frame_accuracy(std::vector<int>{1, 2}, std::vector<int>{1}), tubemae::ContractError);
}

TEST(ClassificationMetrics, AccuracyIsAPercentage) {
  EXPECT_DOUBLE_EQ(mt::classification_report(std::vector<int>{0, 1, 1, 2}, std::vector<int>{0, 1, 2, 2}), 75.0);
}

TEST(MetricsCsv, ThresholdColumnIsEmptyWhenAbsent) {
  std::ostringstream os;
  mt::write_metrics_csv(os, mt::to_rows({90.0, 80.0, 70.0, 60.0, 50.0}));
  EXPECT_EQ(os.str(),
            "metric,value,threshold\n"
            "accuracy,90,\n"
            "edit,80,\n"
            "f1,70,0.1\n"
            "f1,60,0.25\n"
            "f1,50,0.5\n");
}
