// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/dataio/video_file.hpp"

#include <limits>

#include "tubemae/common/error.hpp"
#include "tubemae/io/binary.hpp"

namespace tubemae::dataio {

namespace {

constexpr std::string_view kMagic = "PCV1";

std::uint16_t as_u16(int v, const char* what) {
  if (v < 0 || v > std::numeric_limits<std::uint16_t>::max()) {
    throw ContractError(std::string(what) + " " + std::to_string(v) + " does not fit in u16");
  }
  return static_cast<std::uint16_t>(v);
}

}  // namespace

std::string encode_video(const geometry::PointCloudVideo& video) {
  video.validate();
  io::ByteWriter w;
  w.bytes(kMagic);
  w.u32(static_cast<std::uint32_t>(video.frames));
  w.u32(static_cast<std::uint32_t>(video.points));
  w.u32(static_cast<std::uint32_t>(video.channels));
  std::uint8_t flags = 0;
  if (video.channels > 0) flags |= kHasFeatures;
  if (video.label) flags |= kHasLabel;
  if (!video.frame_labels.empty()) flags |= kHasFrameLabels;
  w.u8(flags);
  for (float v : video.coords) w.f32(v);
  for (float v : video.features) w.f32(v);
  if (video.label) w.u16(as_u16(*video.label, "label"));
  for (int l : video.frame_labels) w.u16(as_u16(l, "frame label"));
  return w.take();
}

geometry::PointCloudVideo decode_video(const std::string& bytes) {
  io::ByteReader r(bytes);
  if (r.bytes(4, "magic") != kMagic) throw FormatError("bad video magic", 0);
  geometry::PointCloudVideo v;
  const auto frames = r.u32("frame count");
  const auto points = r.u32("point count");
  const auto channels = r.u32("channel count");
  const std::size_t flags_at = r.offset();
  const auto flags = r.u8("flags");
  if (frames == 0 || points == 0) throw FormatError("empty video extents", 4);
  if (flags & ~(kHasFeatures | kHasLabel | kHasFrameLabels)) throw FormatError("unknown flag bits", flags_at);
  if (((flags & kHasFeatures) != 0) != (channels > 0)) {
    throw FormatError("feature flag disagrees with channel count", flags_at);
  }
  const std::uint64_t cells = static_cast<std::uint64_t>(frames) * points;
  std::uint64_t expected = kVideoHeaderBytes + cells * 3 * 4 + cells * channels * 4;
  if (flags & kHasLabel) expected += 2;
  if (flags & kHasFrameLabels) expected += 2ULL * frames;
  if (bytes.size() < expected) throw FormatError("truncated video: expected " + std::to_string(expected) + " bytes", bytes.size());
  if (bytes.size() > expected) throw FormatError("trailing bytes after video payload", expected);

  v.frames = static_cast<int>(frames);
  v.points = static_cast<int>(points);
  v.channels = static_cast<int>(channels);
  v.coords.resize(cells * 3);
  for (auto& x : v.coords) x = r.f32("coordinates");
  v.features.resize(cells * channels);
  for (auto& x : v.features) x = r.f32("features");
  if (flags & kHasLabel) v.label = r.u16("label");
  if (flags & kHasFrameLabels) {
    v.frame_labels.resize(frames);
    for (auto& l : v.frame_labels) l = r.u16("frame labels");
  }
  r.expect_end();
  return v;
}

void write_video(const std::string& path, const geometry::PointCloudVideo& video) {
  io::write_file(path, encode_video(video));
}

geometry::PointCloudVideo read_video(const std::string& path) { return decode_video(io::read_file(path)); }

}  // namespace tubemae::dataio
