// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic point cloud videos with labeled motion classes. Every frame is a
// fresh permutation of the posed template plus Gaussian noise, so there is no
// point correspondence across frames.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tubemae/geometry/video.hpp"

namespace tubemae::dataio {

enum class MotionKind { kTranslateX, kTranslateY, kRotateZ, kOscillate, kExpand, kArticulate };

inline constexpr int kMotionKindCount = 6;

MotionKind parse_motion_kind(const std::string& name);
std::string to_string(MotionKind kind);

/// Speed ranges differ between domains; see motion_classes().
enum class Domain { kA, kB };

Domain parse_domain(const std::string& name);
std::string to_string(Domain d);

struct MotionClass {
  int id = 0;
  MotionKind kind = MotionKind::kTranslateX;
  double speed_lo = 0.02;  // per-frame rate; radians for rotations
  double speed_hi = 0.04;
  double noise_sigma = 0.01;
};

/// The first `count` kinds in declaration order, labeled 0..count-1.
std::vector<MotionClass> motion_classes(int count, Domain domain = Domain::kA, double noise_sigma = 0.01);

/// Noise-free pose of `base` after `u` frames of motion at `speed`.
/// `moving` flags the articulated part (used by kArticulate only).
std::vector<double> apply_motion(MotionKind kind, const std::vector<double>& base, const std::vector<char>& moving,
                                 double speed, int u);

/// Speed drawn for a video generated with (cls, seed), and for the first
/// segment of a segmented video.
double sampled_speed(const MotionClass& cls, std::uint64_t seed);

geometry::PointCloudVideo generate_video(const MotionClass& cls, int frames, int points, std::uint64_t seed);

struct Segment {
  MotionClass cls;
  int length = 0;
};

/// Concatenated motions; each segment continues from the previous end pose.
/// frame_labels carry the class id of each frame.
geometry::PointCloudVideo generate_segmented_video(const std::vector<Segment>& segments, int frames, int points,
                                                   std::uint64_t seed);

}  // namespace tubemae::dataio
