#include "wamtopo_oracle/delaunay_bruteforce.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "wamtopo_oracle/errors.hpp"

namespace wamtopo_oracle {

namespace {

// Circumsphere of four points by solving the 3x3 linear system
// 2(p_k - p_0) . c = |p_k|^2 - |p_0|^2, in long double. Returns false for a
// (near-)degenerate tetrahedron.
bool circumsphere(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                  const Eigen::Vector3d& p2, const Eigen::Vector3d& p3,
                  Eigen::Vector3d& center, double& radius2) {
  using LVec = Eigen::Matrix<long double, 3, 1>;
  using LMat = Eigen::Matrix<long double, 3, 3>;
  const LVec q0 = p0.cast<long double>();
  const LVec q1 = p1.cast<long double>();
  const LVec q2 = p2.cast<long double>();
  const LVec q3 = p3.cast<long double>();
  LMat m;
  m.row(0) = 2.0L * (q1 - q0).transpose();
  m.row(1) = 2.0L * (q2 - q0).transpose();
  m.row(2) = 2.0L * (q3 - q0).transpose();
  LVec rhs(q1.squaredNorm() - q0.squaredNorm(), q2.squaredNorm() - q0.squaredNorm(),
           q3.squaredNorm() - q0.squaredNorm());
  const long double det = m.determinant();
  const long double scale = (q1 - q0).norm() * (q2 - q0).norm() * (q3 - q0).norm();
  if (std::abs(det) <= 1e-30L * scale) return false;
  const LVec c = m.fullPivLu().solve(rhs);
  center = c.cast<double>();
  radius2 = static_cast<double>((q0 - c).squaredNorm());
  return true;
}

}  // namespace

BruteForceDelaunay delaunay_bruteforce(const Eigen::MatrixX3d& jittered_points) {
  const int n = static_cast<int>(jittered_points.rows());
  if (n > 16) {
    throw TooManyPoints("brute-force enumeration accepts at most 16 points, "
                        "got " + std::to_string(n));
  }
  if (n < 4) {
    throw OracleError("a tetrahedralization needs at least 4 points, got " +
                      std::to_string(n));
  }
  BruteForceDelaunay out;
  std::set<std::pair<int, int>> edge_set;

  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      for (int c = b + 1; c < n; ++c) {
        for (int d = c + 1; d < n; ++d) {
          Eigen::Vector3d center;
          double r2 = 0.0;
          if (!circumsphere(jittered_points.row(a), jittered_points.row(b),
                            jittered_points.row(c), jittered_points.row(d), center, r2)) {
            continue;
          }
          bool empty = true;
          for (int e = 0; e < n && empty; ++e) {
            if (e == a || e == b || e == c || e == d) continue;
            const double d2 = (Eigen::Vector3d(jittered_points.row(e)) - center).squaredNorm();
            if (d2 < r2) empty = false;
          }
          if (!empty) continue;
          out.tetrahedra.push_back({a, b, c, d});
          edge_set.emplace(a, b);
          edge_set.emplace(a, c);
          edge_set.emplace(a, d);
          edge_set.emplace(b, c);
          edge_set.emplace(b, d);
          edge_set.emplace(c, d);
        }
      }
    }
  }
  std::sort(out.tetrahedra.begin(), out.tetrahedra.end());
  out.edges.assign(edge_set.begin(), edge_set.end());
  return out;
}

}  // namespace wamtopo_oracle
