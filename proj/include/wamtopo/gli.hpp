#pragma once

#include "wamtopo/geometry.hpp"
#include "wamtopo/polyline.hpp"

namespace wamtopo {

// Minimum segment length and minimum strict-mode separation (metres).
inline constexpr double kGliMinLength = 1e-9;
inline constexpr double kGliMinSeparation = 1e-9;

// Separation that near-touching segment pairs are pushed out to in clamped
// mode (metres).
inline constexpr double kGliClampSeparation = 1e-6;

// Gaussian linking integral of two directed segments [a0,a1] and [b0,b1],
// evaluated in closed form as the signed solid angle of the segment-pair
// quadrilateral: the sum of four arcsine vertex terms divided by 4*pi, with
// the sign taken from the orientation of the connecting vector against the
// two directions. Exact for straight segments; |result| < 0.5 for any
// non-intersecting pair.
//
// Strict mode: throws DegenerateSegmentError if either segment is shorter
// than kGliMinLength, and IntersectingSegmentsError if the segments are
// closer than kGliMinSeparation (the integrand is singular there).
double segment_gli(const Vec3& a0, const Vec3& a1, const Vec3& b0,
                   const Vec3& b1);

// Clamped mode for use on noisy, machine-generated geometry: if the
// segments are closer than kGliClampSeparation, the second segment is
// translated along the line of closest approach until the separation equals
// kGliClampSeparation, the result is evaluated there, and `saturated` is set.
// Degenerate segments still throw.
struct ClampedGli {
  double value;
  bool saturated;
};
ClampedGli segment_gli_clamped(const Vec3& a0, const Vec3& a1, const Vec3& b0,
                               const Vec3& b1);

// Total linking integral between two open polylines: the sum of
// segment_gli over all segment pairs. Strict mode.
double curve_gli(const Polyline& c1, const Polyline& c2);

// Clamped-mode total; `saturated` is true if any pair was clamped.
ClampedGli curve_gli_clamped(const Polyline& c1, const Polyline& c2);

}  // namespace wamtopo
