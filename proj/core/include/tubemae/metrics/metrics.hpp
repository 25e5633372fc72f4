// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Classification and temporal segmentation metrics. Scores are percentages.

#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace tubemae::metrics {

struct Segment {
  int label = 0;
  int start = 0;  // inclusive
  int end = 0;    // exclusive

  int length() const { return end - start; }
  bool operator==(const Segment&) const = default;
};

/// Run-length encoding of a frame-label sequence.
struct SegmentSeq {
  std::vector<Segment> segments;
  int frames = 0;

  static SegmentSeq from_frames(std::span<const int> labels);
  std::vector<int> expand() const;
  std::vector<int> labels() const;
  std::size_t size() const { return segments.size(); }
};

double frame_accuracy(std::span<const int> pred, std::span<const int> gt);

/// Unit-cost edit distance between two label strings.
int levenshtein(std::span<const int> a, std::span<const int> b);

double segmental_edit_score(std::span<const int> pred, std::span<const int> gt);

/// Frame intersection-over-union of two segments.
double segment_iou(const Segment& a, const Segment& b);

/// Segmental F1 at an IoU threshold. A predicted segment may match one
/// ground-truth segment of the same label with IoU >= threshold; each ground
/// truth segment is matched at most once and the matching is maximal.
double f1_at(std::span<const int> pred, std::span<const int> gt, double threshold);

/// Number of true positives behind f1_at.
int f1_true_positives(const SegmentSeq& pred, const SegmentSeq& gt, double threshold);

double classification_report(std::span<const int> preds, std::span<const int> labels);

inline constexpr double kF1Thresholds[] = {0.10, 0.25, 0.50};

struct SegmentationScores {
  double accuracy = 0.0;
  double edit = 0.0;
  double f1_10 = 0.0;
  double f1_25 = 0.0;
  double f1_50 = 0.0;
};

/// Mean of per-video scores.
SegmentationScores score_segmentation(const std::vector<std::vector<int>>& preds,
                                      const std::vector<std::vector<int>>& targets);

struct MetricRow {
  std::string metric;
  double value = 0.0;
  std::optional<double> threshold;
};

std::vector<MetricRow> to_rows(const SegmentationScores& s);

/// CSV with header "metric,value,threshold"; threshold empty when absent.
void write_metrics_csv(std::ostream& os, const std::vector<MetricRow>& rows);

}  // namespace tubemae::metrics
