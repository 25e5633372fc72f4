// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/dataio/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <thread>

#include "tubemae/common/error.hpp"
#include "tubemae/common/rng.hpp"
#include "tubemae/dataio/video_file.hpp"

namespace tubemae::dataio {

namespace fs = std::filesystem;

namespace {

// Contiguous chunks, one per thread. Each item writes only its own slot.
void parallel_for(std::size_t total, int workers, const std::function<void(std::size_t)>& fn) {
  const auto threads = static_cast<std::size_t>(std::clamp(workers, 1, 64));
  if (threads == 1) {
    for (std::size_t i = 0; i < total; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (total + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t b = std::min(total, t * chunk);
    const std::size_t e = std::min(total, b + chunk);
    if (b < e)
      pool.emplace_back([&fn, b, e] {
        for (std::size_t i = b; i < e; ++i) fn(i);
      });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

void DatasetSpec::validate() const {
  TUBEMAE_EXPECT(!classes.empty(), "dataset needs at least one class");
  TUBEMAE_EXPECT(videos_per_class >= 1, "videos_per_class must be positive");
  TUBEMAE_EXPECT(!splits.empty(), "dataset needs at least one split");
  double sum = 0.0;
  for (const auto& s : splits) {
    TUBEMAE_EXPECT(s.ratio >= 0.0, "split ratios must be non-negative");
    sum += s.ratio;
  }
  TUBEMAE_EXPECT(std::abs(sum - 1.0) < 1e-9, "split ratios must sum to 1");
}

std::vector<geometry::PointCloudVideo> Dataset::subset(const std::string& name) const {
  std::vector<geometry::PointCloudVideo> out;
  for (std::size_t i = 0; i < videos.size(); ++i)
    if (split[i] == name) out.push_back(videos[i]);
  return out;
}

std::vector<int> stratified_counts(int n, const std::vector<SplitRatio>& splits) {
  std::vector<int> counts(splits.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t i = 0; i < splits.size(); ++i) {
    const double exact = splits[i].ratio * n;
    counts[i] = static_cast<int>(std::floor(exact + 1e-9));
    assigned += counts[i];
    remainders.emplace_back(exact - counts[i], i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[remainders[k % remainders.size()].second];
  return counts;
}

Dataset generate_dataset(const DatasetSpec& spec, int workers) {
  spec.validate();
  const int per_class = spec.videos_per_class;
  const auto total = static_cast<std::size_t>(per_class) * spec.classes.size();
  Dataset ds;
  ds.videos.resize(total);
  ds.split.resize(total);

  parallel_for(total, workers, [&](std::size_t i) {
    const auto& cls = spec.classes[i / static_cast<std::size_t>(per_class)];
    ds.videos[i] = generate_video(cls, spec.frames, spec.points, mix64(mix64(spec.seed) + i));
  });

  const auto counts = stratified_counts(per_class, spec.splits);
  Rng rng = Rng::stream(spec.seed, "split");
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    std::vector<int> order(static_cast<std::size_t>(per_class));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::size_t pos = 0;
    for (std::size_t s = 0; s < counts.size(); ++s)
      for (int k = 0; k < counts[s]; ++k, ++pos)
        ds.split[c * static_cast<std::size_t>(per_class) + static_cast<std::size_t>(order[pos])] = spec.splits[s].name;
  }
  return ds;
}

void SegmentedSpec::validate() const {
  TUBEMAE_EXPECT(!classes.empty(), "segmented dataset needs at least one class");
  TUBEMAE_EXPECT(videos >= 1 && segments_per_video >= 1 && min_length >= 1, "segmented spec counts must be positive");
  TUBEMAE_EXPECT(segments_per_video * min_length <= frames, "segments do not fit into the video length");
  TUBEMAE_EXPECT(segments_per_video == 1 || classes.size() >= 2, "adjacent segments need two distinct classes");
}

std::vector<Segment> segment_plan(const SegmentedSpec& spec, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "segment-plan");
  const int k = spec.segments_per_video;
  const int spare = spec.frames - k * spec.min_length;
  std::vector<int> cuts(static_cast<std::size_t>(k - 1));
  for (auto& c : cuts) c = static_cast<int>(rng.below(static_cast<std::uint64_t>(spare) + 1));
  std::sort(cuts.begin(), cuts.end());
  std::vector<Segment> plan;
  int prev_cut = 0;
  int prev_class = -1;
  for (int s = 0; s < k; ++s) {
    const int cut = s + 1 < k ? cuts[static_cast<std::size_t>(s)] : spare;
    int cls = 0;
    do {
      cls = static_cast<int>(rng.below(spec.classes.size()));
    } while (cls == prev_class);
    plan.push_back({spec.classes[static_cast<std::size_t>(cls)], spec.min_length + cut - prev_cut});
    prev_cut = cut;
    prev_class = cls;
  }
  return plan;
}

std::vector<geometry::PointCloudVideo> generate_segmented_dataset(const SegmentedSpec& spec, int workers) {
  spec.validate();
  std::vector<geometry::PointCloudVideo> out(static_cast<std::size_t>(spec.videos));
  parallel_for(out.size(), workers, [&](std::size_t i) {
    const std::uint64_t seed = mix64(mix64(spec.seed) + i);
    out[i] = generate_segmented_video(segment_plan(spec, seed), spec.frames, spec.points, seed);
  });
  return out;
}

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  for (const auto& e : entries) {
    TUBEMAE_EXPECT(e.path.find_first_of("\t\n") == std::string::npos && e.split.find_first_of("\t\n") == std::string::npos,
                   "manifest fields must not contain tabs or newlines");
    out << e.path << '\t' << e.label << '\t' << e.split << '\n';
  }
}

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest '" + path + "'");
  Manifest m;
  m.root = fs::path(path).parent_path().string();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    ManifestEntry e;
    std::string label;
    if (!std::getline(ss, e.path, '\t') || !std::getline(ss, label, '\t') || !std::getline(ss, e.split, '\t')) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected path<TAB>label<TAB>split");
    }
    try {
      std::size_t used = 0;
      e.label = std::stoi(label, &used);
      if (used != label.size()) throw std::invalid_argument(label);
    } catch (const std::exception&) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": bad label '" + label + "'");
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

Manifest make_dataset(const DatasetSpec& spec, const std::string& dir, int workers) {
  const Dataset ds = generate_dataset(spec, workers);
  fs::create_directories(fs::path(dir) / "videos");
  Manifest m;
  m.root = dir;
  const int per_class = spec.videos_per_class;
  for (std::size_t i = 0; i < ds.videos.size(); ++i) {
    const int cls = static_cast<int>(i) / per_class;
    const int k = static_cast<int>(i) % per_class;
    char name[64];
    std::snprintf(name, sizeof(name), "videos/c%02d_%04d.pcv", cls, k);
    write_video((fs::path(dir) / name).string(), ds.videos[i]);
    m.entries.push_back({name, *ds.videos[i].label, ds.split[i]});
  }
  write_manifest((fs::path(dir) / "manifest.tsv").string(), m.entries);
  return m;
}

std::vector<geometry::PointCloudVideo> load_split(const Manifest& manifest, const std::string& split) {
  std::vector<geometry::PointCloudVideo> out;
  for (const auto& e : manifest.entries) {
    if (e.split != split) continue;
    auto v = read_video((fs::path(manifest.root) / e.path).string());
    v.label = e.label;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace tubemae::dataio
