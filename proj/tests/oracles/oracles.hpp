// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Slow, obviously-correct reference implementations used only by tests.
// Nothing here calls into the library's numeric code.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tubemae/geometry/tubes.hpp"
#include "tubemae/geometry/video.hpp"

namespace oracle {

using Point = std::array<double, 3>;
using Row = std::vector<double>;

// Chamfer ----------------------------------------------------------------

/// Mean squared nearest distance A->B plus B->A, by double loop.
double chamfer(const std::vector<Point>& a, const std::vector<Point>& b);

/// Chamfer over [sets][frames] flat xyz buffers: mean over frames, then sets.
double chamfer_sets(const std::vector<double>& rec, const std::vector<double>& gt, int sets, int frames);

// Geometry ---------------------------------------------------------------

/// Greedy max-min selection with full recomputation at every step.
/// Ties go to the lowest index.
std::vector<int> fps(const std::vector<Point>& points, int count, int first);

/// Max over points of the distance to the nearest selected point.
double covering_radius(const std::vector<Point>& points, const std::vector<int>& selected);

/// Every way the tube batch disagrees with a brute-force scan of the video:
/// anchors, member selection, displacements, ground truth, membership
/// distance/time bounds. Empty means the batch is exact.
std::vector<std::string> tube_violations(const tubemae::geometry::PointCloudVideo& video,
                                         const tubemae::geometry::TubeConfig& cfg,
                                         const tubemae::geometry::TubeBatch& tubes);

// Objectives -------------------------------------------------------------

/// Motion InfoNCE from already-projected query rows. `frames[r]` is the frame
/// id of query row r; targets hold one row per frame. Returns the mean of the
/// per-direction means over the directions that have pairs.
double motion_loss(const std::vector<Row>& forward_queries, const std::vector<Row>& backward_queries,
                   const std::vector<int>& frames, const std::vector<Row>& targets, double tau, bool inclusive);

/// -log softmax of the positive over [positive, negatives...].
double info_nce(const Row& query, const Row& positive, const std::vector<Row>& negatives, double tau);

Row normalized(const Row& v);
double dot(const Row& a, const Row& b);

// Segmentation metrics ---------------------------------------------------

struct Seg {
  int label;
  int start;
  int end;  // exclusive
};

std::vector<Seg> segments(const std::vector<int>& frames);
int edit_distance(const std::vector<int>& a, const std::vector<int>& b);
double edit_score(const std::vector<int>& pred_frames, const std::vector<int>& gt_frames);
/// Exhaustive search over all one-to-one same-label matchings with IoU >= thr.
int max_true_positives(const std::vector<Seg>& pred, const std::vector<Seg>& gt, double thr);
double f1(const std::vector<int>& pred_frames, const std::vector<int>& gt_frames, double thr);

}  // namespace oracle
