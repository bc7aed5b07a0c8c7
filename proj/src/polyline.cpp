#include "wamtopo/polyline.hpp"

#include <cmath>
#include <utility>

#include "wamtopo/errors.hpp"

namespace wamtopo {

namespace {
constexpr double kMinSegmentLength = 1e-9;
}

Polyline::Polyline(std::vector<Vec3> points, std::string id)
    : points_(std::move(points)), id_(std::move(id)) {
  if (points_.size() < 2) {
    throw DegeneratePolylineError("polyline '" + id_ + "' needs at least 2 points, got " +
                                  std::to_string(points_.size()));
  }
  for (size_t i = 0; i + 1 < points_.size(); ++i) {
    if (!points_[i].allFinite()) {
      throw DegeneratePolylineError("polyline '" + id_ + "' has a non-finite point at index " +
                                    std::to_string(i));
    }
    if ((points_[i + 1] - points_[i]).norm() < kMinSegmentLength) {
      throw DegeneratePolylineError("polyline '" + id_ + "' has coincident points at indices " +
                                    std::to_string(i) + "," + std::to_string(i + 1));
    }
  }
  if (!points_.back().allFinite()) {
    throw DegeneratePolylineError("polyline '" + id_ + "' has a non-finite final point");
  }
}

Polyline Polyline::from_matrix(const Eigen::MatrixX3d& points, std::string id) {
  std::vector<Vec3> pts(static_cast<size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) pts[static_cast<size_t>(i)] = points.row(i);
  return Polyline(std::move(pts), std::move(id));
}

double Polyline::length() const {
  double total = 0.0;
  for (size_t i = 0; i + 1 < points_.size(); ++i) total += (points_[i + 1] - points_[i]).norm();
  return total;
}

Polyline Polyline::reversed() const {
  std::vector<Vec3> pts(points_.rbegin(), points_.rend());
  return Polyline(std::move(pts), id_);
}

Polyline Polyline::transformed(const Mat3& rot, const Vec3& translation) const {
  std::vector<Vec3> pts(points_.size());
  for (size_t i = 0; i < points_.size(); ++i) pts[i] = rot * points_[i] + translation;
  return Polyline(std::move(pts), id_);
}

Polyline Polyline::scaled(double factor) const {
  std::vector<Vec3> pts(points_.size());
  for (size_t i = 0; i < points_.size(); ++i) pts[i] = factor * points_[i];
  return Polyline(std::move(pts), id_);
}

Eigen::MatrixX3d Polyline::to_matrix() const {
  Eigen::MatrixX3d m(n_points(), 3);
  for (int i = 0; i < n_points(); ++i) m.row(i) = points_[static_cast<size_t>(i)];
  return m;
}

Polyline resample_uniform(const std::vector<Vec3>& keypoints, int n_points, std::string id) {
  if (keypoints.size() < 2 || n_points < 2) {
    throw DegeneratePolylineError("resample_uniform needs >=2 keypoints and >=2 output points");
  }
  // Cumulative arc length along the keypoint path.
  std::vector<double> cum(keypoints.size(), 0.0);
  for (size_t i = 1; i < keypoints.size(); ++i) {
    cum[i] = cum[i - 1] + (keypoints[i] - keypoints[i - 1]).norm();
  }
  const double total = cum.back();
  if (total < 1e-9) {
    throw DegeneratePolylineError("resample_uniform: keypoint path has zero length");
  }
  std::vector<Vec3> pts(static_cast<size_t>(n_points));
  size_t seg = 0;
  for (int k = 0; k < n_points; ++k) {
    const double s = total * static_cast<double>(k) / static_cast<double>(n_points - 1);
    while (seg + 2 < keypoints.size() && cum[seg + 1] < s) ++seg;
    const double seg_len = cum[seg + 1] - cum[seg];
    const double t = seg_len > 0.0 ? (s - cum[seg]) / seg_len : 0.0;
    pts[static_cast<size_t>(k)] = keypoints[seg] + t * (keypoints[seg + 1] - keypoints[seg]);
  }
  return Polyline(std::move(pts), std::move(id));
}

}  // namespace wamtopo
