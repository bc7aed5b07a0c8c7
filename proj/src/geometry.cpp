#include "wamtopo/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace wamtopo {

Mat3 rot_x(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

Mat3 rot_y(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

Mat3 rot_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

Mat3 rot_axis(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (n < 1e-300) return Mat3::Identity();
  const Vec3 u = axis / n;
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 k;
  k << 0, -u.z(), u.y(), u.z(), 0, -u.x(), -u.y(), u.x(), 0;
  return Mat3::Identity() + s * k + (1.0 - c) * k * k;
}

SegmentClosest segment_closest(const Vec3& a0, const Vec3& a1,
                               const Vec3& b0, const Vec3& b1) {
  // Closest points between two segments via the standard clamped
  // quadratic minimization (Ericson, Real-Time Collision Detection).
  const Vec3 d1 = a1 - a0;
  const Vec3 d2 = b1 - b0;
  const Vec3 r = a0 - b0;
  const double aa = d1.squaredNorm();
  const double ee = d2.squaredNorm();
  const double f = d2.dot(r);
  double s = 0.0, t = 0.0;

  if (aa <= 1e-300 && ee <= 1e-300) {
    // Both segments are points.
  } else if (aa <= 1e-300) {
    t = std::clamp(f / ee, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (ee <= 1e-300) {
      s = std::clamp(-c / aa, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = aa * ee - b * b;
      if (denom > 0.0) {
        s = std::clamp((b * f - c * ee) / denom, 0.0, 1.0);
      }
      t = (b * s + f) / ee;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / aa, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / aa, 0.0, 1.0);
      }
    }
  }
  SegmentClosest out;
  out.point_a = a0 + s * d1;
  out.point_b = b0 + t * d2;
  out.distance = (out.point_b - out.point_a).norm();
  return out;
}

double segment_distance(const Vec3& a0, const Vec3& a1, const Vec3& b0,
                        const Vec3& b1) {
  return segment_closest(a0, a1, b0, b1).distance;
}

double point_segment_distance(const Vec3& p, const Vec3& a0, const Vec3& a1) {
  const Vec3 d = a1 - a0;
  const double dd = d.squaredNorm();
  if (dd <= 1e-300) return (p - a0).norm();
  const double t = std::clamp((p - a0).dot(d) / dd, 0.0, 1.0);
  return (p - (a0 + t * d)).norm();
}

double capsule_segment_penetration(const Capsule& cap, const Vec3& a0,
                                   const Vec3& a1, double seg_radius) {
  const double d = segment_distance(cap.p0, cap.p1, a0, a1);
  return std::max(0.0, cap.radius + seg_radius - d);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace wamtopo
