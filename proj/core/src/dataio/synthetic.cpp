// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/dataio/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "tubemae/common/error.hpp"
#include "tubemae/common/rng.hpp"

namespace tubemae::dataio {

namespace {

constexpr std::array<const char*, kMotionKindCount> kKindNames = {
    "translate-x", "translate-y", "rotate-z", "oscillate", "expand", "two-part-articulation"};

// Rate multipliers turning the shared speed scale into each kind's units.
constexpr double kRotationRate = 4.0;      // radians per frame per unit speed
constexpr double kOscillationRate = 10.0;  // angular frequency per unit speed
constexpr double kOscillationAmplitude = 0.5;
constexpr double kExpansionRate = 2.0;

struct Template {
  std::vector<double> points;  // N*3, centered, max norm 1
  std::vector<char> moving;    // articulated part (+x side)
};

Template make_template(MotionKind kind, int n, Rng& rng) {
  Template t;
  t.points.resize(static_cast<std::size_t>(n) * 3);
  if (kind == MotionKind::kArticulate) {
    // Two clusters side by side along x.
    for (int i = 0; i < n; ++i) {
      const double cx = (i % 2 == 0) ? -0.8 : 0.8;
      t.points[3 * i] = cx + 0.35 * rng.normal();
      t.points[3 * i + 1] = 0.35 * rng.normal();
      t.points[3 * i + 2] = 0.2 * rng.normal();
    }
  } else {
    for (int i = 0; i < n; ++i) {
      t.points[3 * i] = 1.0 * rng.normal();
      t.points[3 * i + 1] = 0.6 * rng.normal();
      t.points[3 * i + 2] = 0.35 * rng.normal();
    }
  }
  std::array<double, 3> c{0.0, 0.0, 0.0};
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 3; ++k) c[k] += t.points[3 * i + k];
  for (double& v : c) v /= static_cast<double>(n);
  double max_norm = 0.0;
  for (int i = 0; i < n; ++i) {
    double sq = 0.0;
    for (int k = 0; k < 3; ++k) {
      t.points[3 * i + k] -= c[k];
      sq += t.points[3 * i + k] * t.points[3 * i + k];
    }
    max_norm = std::max(max_norm, std::sqrt(sq));
  }
  if (max_norm > 0.0)
    for (double& v : t.points) v /= max_norm;
  t.moving.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t.moving[i] = t.points[3 * i] > 0.0 ? 1 : 0;
  return t;
}

std::array<double, 3> centroid(const std::vector<double>& p) {
  const std::size_t n = p.size() / 3;
  std::array<double, 3> c{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < 3; ++k) c[k] += p[3 * i + k];
  for (double& v : c) v /= static_cast<double>(n);
  return c;
}

// Appends one noisy, shuffled frame to `out`.
void emit_frame(const std::vector<double>& pose, double sigma, Rng& rng, std::vector<float>& out) {
  const std::size_t n = pose.size() / 3;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  for (std::size_t i : order) {
    for (std::size_t k = 0; k < 3; ++k) {
      const double noise = sigma > 0.0 ? sigma * rng.normal() : 0.0;
      out.push_back(static_cast<float>(pose[3 * i + k] + noise));
    }
  }
}

}  // namespace

MotionKind parse_motion_kind(const std::string& name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (name == kKindNames[i]) return static_cast<MotionKind>(i);
  throw ConfigError("unknown motion kind '" + name + "'");
}

std::string to_string(MotionKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

Domain parse_domain(const std::string& name) {
  if (name == "A" || name == "a") return Domain::kA;
  if (name == "B" || name == "b") return Domain::kB;
  throw ConfigError("unknown domain '" + name + "'");
}

std::string to_string(Domain d) { return d == Domain::kA ? "A" : "B"; }

std::vector<MotionClass> motion_classes(int count, Domain domain, double noise_sigma) {
  TUBEMAE_EXPECT(count >= 1 && count <= kMotionKindCount, "motion_classes: count must be in [1, 6]");
  TUBEMAE_EXPECT(noise_sigma >= 0.0, "noise sigma must be non-negative");
  std::vector<MotionClass> out;
  for (int i = 0; i < count; ++i) {
    MotionClass c;
    c.id = i;
    c.kind = static_cast<MotionKind>(i);
    c.speed_lo = domain == Domain::kA ? 0.02 : 0.045;
    c.speed_hi = domain == Domain::kA ? 0.04 : 0.07;
    c.noise_sigma = noise_sigma;
    out.push_back(c);
  }
  return out;
}

std::vector<double> apply_motion(MotionKind kind, const std::vector<double>& base, const std::vector<char>& moving,
                                 double speed, int u) {
  TUBEMAE_EXPECT(base.size() % 3 == 0 && moving.size() * 3 == base.size(), "apply_motion: malformed pose");
  std::vector<double> out = base;
  const std::size_t n = base.size() / 3;
  const auto c = centroid(base);
  const double t = static_cast<double>(u);
  switch (kind) {
    case MotionKind::kTranslateX:
      for (std::size_t i = 0; i < n; ++i) out[3 * i] += speed * t;
      break;
    case MotionKind::kTranslateY:
      for (std::size_t i = 0; i < n; ++i) out[3 * i + 1] += speed * t;
      break;
    case MotionKind::kOscillate: {
      const double dy = kOscillationAmplitude * std::sin(kOscillationRate * speed * t);
      for (std::size_t i = 0; i < n; ++i) out[3 * i + 1] += dy;
      break;
    }
    case MotionKind::kExpand: {
      const double s = 1.0 + kExpansionRate * speed * t;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < 3; ++k) out[3 * i + k] = c[k] + s * (base[3 * i + k] - c[k]);
      break;
    }
    case MotionKind::kRotateZ:
    case MotionKind::kArticulate: {
      const double a = kRotationRate * speed * t;
      const double ca = std::cos(a);
      const double sa = std::sin(a);
      for (std::size_t i = 0; i < n; ++i) {
        if (kind == MotionKind::kArticulate && !moving[i]) continue;
        const double x = base[3 * i] - c[0];
        const double y = base[3 * i + 1] - c[1];
        out[3 * i] = c[0] + ca * x - sa * y;
        out[3 * i + 1] = c[1] + sa * x + ca * y;
      }
      break;
    }
  }
  return out;
}

double sampled_speed(const MotionClass& cls, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "speed");
  return rng.uniform(cls.speed_lo, cls.speed_hi);
}

geometry::PointCloudVideo generate_video(const MotionClass& cls, int frames, int points, std::uint64_t seed) {
  Segment s{cls, frames};
  auto v = generate_segmented_video({s}, frames, points, seed);
  v.frame_labels.clear();
  v.label = cls.id;
  return v;
}

geometry::PointCloudVideo generate_segmented_video(const std::vector<Segment>& segments, int frames, int points,
                                                   std::uint64_t seed) {
  TUBEMAE_EXPECT(frames >= 1 && points >= 1, "generate: L and N must be positive");
  TUBEMAE_EXPECT(!segments.empty(), "generate: at least one segment");
  int total = 0;
  for (const auto& s : segments) {
    TUBEMAE_EXPECT(s.length >= 1, "generate: segment lengths must be positive");
    total += s.length;
  }
  if (total != frames) {
    throw LengthError("segment lengths sum to " + std::to_string(total) + ", expected " + std::to_string(frames));
  }
  Rng shape_rng = Rng::stream(seed, "template");
  Rng frame_rng = Rng::stream(seed, "frames");
  const Template tpl = make_template(segments.front().cls.kind, points, shape_rng);

  geometry::PointCloudVideo v;
  v.frames = frames;
  v.points = points;
  v.coords.reserve(static_cast<std::size_t>(frames) * points * 3);
  std::vector<double> base = tpl.points;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& seg = segments[s];
    const double speed = sampled_speed(seg.cls, s == 0 ? seed : mix64(seed + s));
    // Later segments start one step past the previous end pose.
    const int first = s == 0 ? 0 : 1;
    std::vector<double> pose;
    for (int u = first; u < first + seg.length; ++u) {
      pose = apply_motion(seg.cls.kind, base, tpl.moving, speed, u);
      emit_frame(pose, seg.cls.noise_sigma, frame_rng, v.coords);
      v.frame_labels.push_back(seg.cls.id);
    }
    base = std::move(pose);
  }
  return v;
}

}  // namespace tubemae::dataio
