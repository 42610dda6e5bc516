#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace valet {

inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

/// Point or vector on the ground plane (y = 0), coordinates x and z.
struct Vec2 {
  double x = 0.0;
  double z = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.z + b.z}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.z - b.z}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.z}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.z}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

inline constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.z * b.z; }
inline constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.z - a.z * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.z); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

/// Unit vector along `heading`. Positive heading turns from +x toward +z (left).
inline Vec2 heading_dir(double heading) { return {std::cos(heading), std::sin(heading)}; }
/// Unit vector pointing to the left of `heading`.
inline Vec2 left_dir(double heading) { return {-std::sin(heading), std::cos(heading)}; }

/// Planar pose: position on the ground plane plus heading.
struct Pose2 {
  double x = 0.0;
  double z = 0.0;
  double heading = 0.0;

  Vec2 position() const { return {x, z}; }
  friend constexpr bool operator==(const Pose2&, const Pose2&) = default;
};

/// Expresses world point `p` in the frame of `pose`: (forward, left).
inline Vec2 to_local(const Pose2& pose, Vec2 p) {
  const Vec2 d = p - pose.position();
  return {dot(d, heading_dir(pose.heading)), dot(d, left_dir(pose.heading))};
}

/// Inverse of to_local.
inline Vec2 to_world(const Pose2& pose, Vec2 local) {
  return pose.position() + local.x * heading_dir(pose.heading) + local.z * left_dir(pose.heading);
}

/// Rectangle with arbitrary orientation. `length` runs along `heading`, `width` across it.
struct OrientedRect {
  Vec2 center;
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;

  Pose2 frame() const { return {center.x, center.z, heading}; }

  bool contains(Vec2 p) const {
    const Vec2 l = to_local(frame(), p);
    return std::abs(l.x) <= 0.5 * length && std::abs(l.z) <= 0.5 * width;
  }

  /// Corners in counter-clockwise order starting at rear-right.
  std::array<Vec2, 4> corners() const {
    const double hl = 0.5 * length;
    const double hw = 0.5 * width;
    const Pose2 f = frame();
    return {to_world(f, {-hl, -hw}), to_world(f, {hl, -hw}), to_world(f, {hl, hw}),
            to_world(f, {-hl, hw})};
  }
};

/// Axis-aligned rectangle [min, max] in metres.
struct AxisRect {
  Vec2 min;
  Vec2 max;

  bool contains(Vec2 p) const {
    return p.x >= min.x && p.x <= max.x && p.z >= min.z && p.z <= max.z;
  }
};

struct Segment2 {
  Vec2 a;
  Vec2 b;

  double length() const { return distance(a, b); }
};

struct Triangle {
  std::array<Vec2, 3> v;

  bool contains(Vec2 p) const {
    const double d0 = cross(v[1] - v[0], p - v[0]);
    const double d1 = cross(v[2] - v[1], p - v[1]);
    const double d2 = cross(v[0] - v[2], p - v[2]);
    const bool has_neg = d0 < 0 || d1 < 0 || d2 < 0;
    const bool has_pos = d0 > 0 || d1 > 0 || d2 > 0;
    return !(has_neg && has_pos);
  }
};

/// Distance from `p` to segment [a, b].
inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + t * ab);
}

inline bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const double d1 = cross(q2 - q1, p1 - q1);
  const double d2 = cross(q2 - q1, p2 - q1);
  const double d3 = cross(p2 - p1, q1 - p1);
  const double d4 = cross(p2 - p1, q2 - p1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

}  // namespace valet
