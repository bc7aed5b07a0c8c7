#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "wamtopo/geometry.hpp"

namespace wamtopo {

// An open, oriented polyline: an ordered list of 3D points defining
// n_points-1 directed segments. Consecutive points must be at least 1e-9 m
// apart (throws DegeneratePolylineError otherwise); a polyline needs at
// least two points.
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Vec3> points, std::string id = "");

  // Rows are points. Throws on fewer than 2 rows / coincident neighbours.
  static Polyline from_matrix(const Eigen::MatrixX3d& points,
                              std::string id = "");

  int n_points() const { return static_cast<int>(points_.size()); }
  int n_segments() const { return n_points() - 1; }

  const Vec3& point(int i) const { return points_[static_cast<size_t>(i)]; }
  const std::vector<Vec3>& points() const { return points_; }
  const std::string& id() const { return id_; }

  // Segment i runs from point(i) to point(i+1).
  std::pair<Vec3, Vec3> segment(int i) const {
    return {points_[static_cast<size_t>(i)], points_[static_cast<size_t>(i) + 1]};
  }

  double length() const;

  // Same points, opposite orientation.
  Polyline reversed() const;

  // Rigid/scaled copies (used heavily by invariance tests).
  Polyline transformed(const Mat3& rot, const Vec3& translation) const;
  Polyline scaled(double factor) const;

  Eigen::MatrixX3d to_matrix() const;

 private:
  std::vector<Vec3> points_;
  std::string id_;
};

// Resample a piecewise-linear path through `keypoints` into `n_points`
// points spaced uniformly by arc length (endpoints preserved).
Polyline resample_uniform(const std::vector<Vec3>& keypoints, int n_points,
                          std::string id = "");

}  // namespace wamtopo
