// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tubemae/dataio/synthetic.hpp"
#include "tubemae/geometry/video.hpp"

namespace tubemae::dataio {

struct SplitRatio {
  std::string name;
  double ratio = 0.0;
};

struct DatasetSpec {
  std::vector<MotionClass> classes;
  int videos_per_class = 20;
  std::vector<SplitRatio> splits = {{"train", 0.8}, {"test", 0.2}};
  int frames = 24;
  int points = 256;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Dataset {
  std::vector<geometry::PointCloudVideo> videos;
  std::vector<std::string> split;  // split name per video

  std::vector<geometry::PointCloudVideo> subset(const std::string& name) const;
};

/// Per-class split counts by largest remainder; e.g. 20 at 0.8/0.2 gives 16/4.
std::vector<int> stratified_counts(int n, const std::vector<SplitRatio>& splits);

/// Videos ordered class-major. Generation may use `workers` threads; the
/// result does not depend on the worker count.
Dataset generate_dataset(const DatasetSpec& spec, int workers = 1);

/// Videos made of consecutive motion segments with per-frame labels.
struct SegmentedSpec {
  std::vector<MotionClass> classes;
  int videos = 24;
  int segments_per_video = 3;
  int min_length = 4;  // frames per segment, at least
  int frames = 24;
  int points = 256;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Random segment classes (adjacent ones differ) and lengths summing to
/// spec.frames, drawn from `seed`.
std::vector<Segment> segment_plan(const SegmentedSpec& spec, std::uint64_t seed);

std::vector<geometry::PointCloudVideo> generate_segmented_dataset(const SegmentedSpec& spec, int workers = 1);

struct ManifestEntry {
  std::string path;  // relative to the manifest directory
  int label = 0;
  std::string split;

  bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
  std::string root;  // directory holding the manifest
  std::vector<ManifestEntry> entries;
};

/// Tab-separated "path<TAB>label<TAB>split" lines.
void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);
Manifest read_manifest(const std::string& path);

/// Writes every video under `dir/videos/` and the manifest to
/// `dir/manifest.tsv`.
Manifest make_dataset(const DatasetSpec& spec, const std::string& dir, int workers = 1);

std::vector<geometry::PointCloudVideo> load_split(const Manifest& manifest, const std::string& split);

}  // namespace tubemae::dataio
