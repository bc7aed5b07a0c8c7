#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

namespace wamtopo {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Rotation by `angle` (radians) about one of the principal axes.
Mat3 rot_x(double angle);
Mat3 rot_y(double angle);
Mat3 rot_z(double angle);

// Rotation about an arbitrary unit axis (Rodrigues). `axis` need not be
// normalized; a zero axis yields the identity.
Mat3 rot_axis(const Vec3& axis, double angle);

// Shortest distance between segments [a0,a1] and [b0,b1], clamped to the
// segment interiors/endpoints. Also returns the pair of closest points.
struct SegmentClosest {
  double distance;
  Vec3 point_a;  // closest point on [a0,a1]
  Vec3 point_b;  // closest point on [b0,b1]
};
SegmentClosest segment_closest(const Vec3& a0, const Vec3& a1,
                               const Vec3& b0, const Vec3& b1);

double segment_distance(const Vec3& a0, const Vec3& a1,
                        const Vec3& b0, const Vec3& b1);

// Distance from point p to segment [a0,a1].
double point_segment_distance(const Vec3& p, const Vec3& a0, const Vec3& a1);

// A capsule: the set of points within `radius` of segment [p0,p1].
struct Capsule {
  Vec3 p0;
  Vec3 p1;
  double radius;
};

// Penetration depth of segment [a0,a1] (treated as a capsule of radius
// `seg_radius`) into `cap`: max(0, r_sum - distance).
double capsule_segment_penetration(const Capsule& cap, const Vec3& a0,
                                   const Vec3& a1, double seg_radius);

// SplitMix64 step: the standard 64-bit mixing function. Used everywhere a
// deterministic derived seed or index hash is needed.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace wamtopo
