// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/metrics/metrics.hpp"

#include <algorithm>
#include <functional>

#include "tubemae/common/error.hpp"
#include "tubemae/io/csv.hpp"

namespace tubemae::metrics {

SegmentSeq SegmentSeq::from_frames(std::span<const int> labels) {
  SegmentSeq seq;
  seq.frames = static_cast<int>(labels.size());
  for (int t = 0; t < seq.frames; ++t) {
    if (seq.segments.empty() || seq.segments.back().label != labels[static_cast<std::size_t>(t)]) {
      seq.segments.push_back({labels[static_cast<std::size_t>(t)], t, t + 1});
    } else {
      seq.segments.back().end = t + 1;
    }
  }
  return seq;
}

std::vector<int> SegmentSeq::expand() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(frames));
  for (const auto& s : segments) out.insert(out.end(), static_cast<std::size_t>(s.length()), s.label);
  return out;
}

std::vector<int> SegmentSeq::labels() const {
  std::vector<int> out;
  for (const auto& s : segments) out.push_back(s.label);
  return out;
}

double frame_accuracy(std::span<const int> pred, std::span<const int> gt) {
  TUBEMAE_EXPECT(pred.size() == gt.size(), "frame_accuracy: length mismatch (" + std::to_string(pred.size()) + " vs " +
                                               std::to_string(gt.size()) + ")");
  TUBEMAE_EXPECT(!gt.empty(), "frame_accuracy: empty sequence");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) hit += pred[i] == gt[i] ? 1 : 0;
  return 100.0 * static_cast<double>(hit) / static_cast<double>(gt.size());
}

int levenshtein(std::span<const int> a, std::span<const int> b) {
  std::vector<int> prev(b.size() + 1);
  std::vector<int> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double segmental_edit_score(std::span<const int> pred, std::span<const int> gt) {
  const auto p = SegmentSeq::from_frames(pred).labels();
  const auto g = SegmentSeq::from_frames(gt).labels();
  const std::size_t denom = std::max(p.size(), g.size());
  if (denom == 0) return 100.0;
  return 100.0 * (1.0 - static_cast<double>(levenshtein(p, g)) / static_cast<double>(denom));
}

double segment_iou(const Segment& a, const Segment& b) {
  const int inter = std::max(0, std::min(a.end, b.end) - std::max(a.start, b.start));
  const int uni = a.length() + b.length() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

int f1_true_positives(const SegmentSeq& pred, const SegmentSeq& gt, double threshold) {
  TUBEMAE_EXPECT(threshold > 0.0 && threshold < 1.0, "f1_at: threshold must lie in (0, 1)");
  const std::size_t np = pred.size();
  const std::size_t ng = gt.size();
  std::vector<std::vector<std::size_t>> edges(np);
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = 0; j < ng; ++j)
      if (pred.segments[i].label == gt.segments[j].label &&
          segment_iou(pred.segments[i], gt.segments[j]) >= threshold)
        edges[i].push_back(j);
  // Predicted segments are taken in temporal order; a later segment may
  // re-route an earlier match through an augmenting path.
  std::vector<int> owner(ng, -1);
  std::vector<char> seen;
  const std::function<bool(std::size_t)> augment = [&](std::size_t i) {
    for (std::size_t j : edges[i]) {
      if (seen[j]) continue;
      seen[j] = 1;
      if (owner[j] < 0 || augment(static_cast<std::size_t>(owner[j]))) {
        owner[j] = static_cast<int>(i);
        return true;
      }
    }
    return false;
  };
  int tp = 0;
  for (std::size_t i = 0; i < np; ++i) {
    seen.assign(ng, 0);
    if (augment(i)) ++tp;
  }
  return tp;
}

double f1_at(std::span<const int> pred, std::span<const int> gt, double threshold) {
  const auto p = SegmentSeq::from_frames(pred);
  const auto g = SegmentSeq::from_frames(gt);
  const int tp = f1_true_positives(p, g, threshold);
  const double fp = static_cast<double>(p.size()) - tp;
  const double fn = static_cast<double>(g.size()) - tp;
  const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  const double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  if (precision + recall == 0.0) return 0.0;
  return 100.0 * 2.0 * precision * recall / (precision + recall);
}

double classification_report(std::span<const int> preds, std::span<const int> labels) {
  TUBEMAE_EXPECT(preds.size() == labels.size(), "classification_report: length mismatch");
  TUBEMAE_EXPECT(!labels.empty(), "classification_report: no samples");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += preds[i] == labels[i] ? 1 : 0;
  return 100.0 * static_cast<double>(hit) / static_cast<double>(labels.size());
}

SegmentationScores score_segmentation(const std::vector<std::vector<int>>& preds,
                                      const std::vector<std::vector<int>>& targets) {
  TUBEMAE_EXPECT(!preds.empty() && preds.size() == targets.size(), "score_segmentation: one prediction per target");
  SegmentationScores s;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    s.accuracy += frame_accuracy(preds[i], targets[i]);
    s.edit += segmental_edit_score(preds[i], targets[i]);
    s.f1_10 += f1_at(preds[i], targets[i], 0.10);
    s.f1_25 += f1_at(preds[i], targets[i], 0.25);
    s.f1_50 += f1_at(preds[i], targets[i], 0.50);
  }
  const double n = static_cast<double>(preds.size());
  s.accuracy /= n;
  s.edit /= n;
  s.f1_10 /= n;
  s.f1_25 /= n;
  s.f1_50 /= n;
  return s;
}

std::vector<MetricRow> to_rows(const SegmentationScores& s) {
  return {{"accuracy", s.accuracy, std::nullopt},
          {"edit", s.edit, std::nullopt},
          {"f1", s.f1_10, 0.10},
          {"f1", s.f1_25, 0.25},
          {"f1", s.f1_50, 0.50}};
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricRow>& rows) {
  os << "metric,value,threshold\n";
  for (const auto& r : rows) {
    os << r.metric << ',' << io::format_number(r.value) << ',';
    if (r.threshold) os << io::format_number(*r.threshold);
    os << '\n';
  }
}

}  // namespace tubemae::metrics
