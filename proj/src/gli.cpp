#include "wamtopo/gli.hpp"

#include <algorithm>
#include <cmath>

#include "wamtopo/errors.hpp"

namespace wamtopo {

namespace {

constexpr double kFourPi = 4.0 * M_PI;

// Normalize, returning the zero vector when the norm underflows. A zero
// cross product here means three of the four endpoints are collinear; the
// corresponding vertex of the spherical quadrilateral degenerates and its
// arcsine term vanishes, which is exactly what a zero vector produces.
inline Vec3 unit_or_zero(const Vec3& v) {
  const double n = v.norm();
  return n > 1e-300 ? Vec3(v / n) : Vec3(Vec3::Zero());
}

inline double clamped_asin(double x) { return std::asin(std::clamp(x, -1.0, 1.0)); }

// Signed solid angle of the quadrilateral spanned by the two segments,
// divided by 4*pi. Assumes non-degenerate, non-intersecting input.
double solid_angle_gli(const Vec3& a0, const Vec3& a1, const Vec3& b0,
                       const Vec3& b1) {
  const Vec3 r12 = a1 - a0;
  const Vec3 r34 = b1 - b0;
  const Vec3 r13 = b0 - a0;
  const Vec3 r14 = b1 - a0;
  const Vec3 r23 = b0 - a1;
  const Vec3 r24 = b1 - a1;

  const Vec3 n1 = unit_or_zero(r13.cross(r14));
  const Vec3 n2 = unit_or_zero(r14.cross(r24));
  const Vec3 n3 = unit_or_zero(r24.cross(r23));
  const Vec3 n4 = unit_or_zero(r23.cross(r13));

  const double omega = clamped_asin(n1.dot(n2)) + clamped_asin(n2.dot(n3)) +
                       clamped_asin(n3.dot(n4)) + clamped_asin(n4.dot(n1));

  const double sign_arg = r34.cross(r12).dot(r13);
  const double sign = sign_arg > 0.0 ? 1.0 : (sign_arg < 0.0 ? -1.0 : 0.0);
  return omega * sign / kFourPi;
}

void check_lengths(const Vec3& a0, const Vec3& a1, const Vec3& b0,
                   const Vec3& b1) {
  if ((a1 - a0).norm() < kGliMinLength) {
    throw DegenerateSegmentError("first segment shorter than 1e-9 m");
  }
  if ((b1 - b0).norm() < kGliMinLength) {
    throw DegenerateSegmentError("second segment shorter than 1e-9 m");
  }
}

}  // namespace

double segment_gli(const Vec3& a0, const Vec3& a1, const Vec3& b0,
                   const Vec3& b1) {
  check_lengths(a0, a1, b0, b1);
  if (segment_distance(a0, a1, b0, b1) < kGliMinSeparation) {
    throw IntersectingSegmentsError("segments closer than 1e-9 m; linking integrand singular");
  }
  return solid_angle_gli(a0, a1, b0, b1);
}

ClampedGli segment_gli_clamped(const Vec3& a0, const Vec3& a1, const Vec3& b0,
                               const Vec3& b1) {
  check_lengths(a0, a1, b0, b1);
  const SegmentClosest close = segment_closest(a0, a1, b0, b1);
  if (close.distance >= kGliClampSeparation) {
    return {solid_angle_gli(a0, a1, b0, b1), false};
  }
  // Push the second segment out along the line of closest approach until the
  // pair is exactly kGliClampSeparation apart. When the closest points
  // coincide, that line is undefined; fall back to the mutual perpendicular
  // of the two directions, or to any perpendicular of the first direction if
  // the segments are parallel.
  Vec3 dir;
  if (close.distance > 1e-300) {
    dir = (close.point_b - close.point_a) / close.distance;
  } else {
    const Vec3 u = a1 - a0;
    const Vec3 v = b1 - b0;
    Vec3 perp = u.cross(v);
    if (perp.norm() < 1e-12) {
      perp = u.cross(std::abs(u.x()) < 0.9 * u.norm() ? Vec3::UnitX() : Vec3::UnitY());
    }
    dir = perp.normalized();
  }
  const Vec3 shift = (kGliClampSeparation - close.distance) * dir;
  return {solid_angle_gli(a0, a1, b0 + shift, b1 + shift), true};
}

double curve_gli(const Polyline& c1, const Polyline& c2) {
  double total = 0.0;
  for (int i = 0; i < c1.n_segments(); ++i) {
    const auto [a0, a1] = c1.segment(i);
    for (int j = 0; j < c2.n_segments(); ++j) {
      const auto [b0, b1] = c2.segment(j);
      total += segment_gli(a0, a1, b0, b1);
    }
  }
  return total;
}

ClampedGli curve_gli_clamped(const Polyline& c1, const Polyline& c2) {
  double total = 0.0;
  bool saturated = false;
  for (int i = 0; i < c1.n_segments(); ++i) {
    const auto [a0, a1] = c1.segment(i);
    for (int j = 0; j < c2.n_segments(); ++j) {
      const auto [b0, b1] = c2.segment(j);
      const ClampedGli g = segment_gli_clamped(a0, a1, b0, b1);
      total += g.value;
      saturated = saturated || g.saturated;
    }
  }
  return {total, saturated};
}

}  // namespace wamtopo
