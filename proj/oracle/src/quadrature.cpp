#include "wamtopo_oracle/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stack>
#include <string>
#include <vector>

#include "wamtopo_oracle/errors.hpp"

namespace wamtopo_oracle {

namespace {

using Eigen::Vector3d;

// Clamped closest-approach distance between two segments, written
// independently of the library under test (simple sampled descent is enough
// for a refinement criterion; exactness is not required here).
double pair_distance(const Vector3d& a0, const Vector3d& a1, const Vector3d& b0,
                     const Vector3d& b1) {
  // Coarse 17x17 parameter scan followed by local refinement.
  double best = (a0 - b0).norm();
  double bs = 0.0, bt = 0.0;
  const int grid = 16;
  for (int i = 0; i <= grid; ++i) {
    for (int j = 0; j <= grid; ++j) {
      const double s = static_cast<double>(i) / grid;
      const double t = static_cast<double>(j) / grid;
      const Vector3d pa = a0 + s * (a1 - a0);
      const Vector3d pb = b0 + t * (b1 - b0);
      const double d = (pa - pb).norm();
      if (d < best) {
        best = d;
        bs = s;
        bt = t;
      }
    }
  }
  double step = 1.0 / grid;
  for (int it = 0; it < 60; ++it) {
    bool improved = false;
    for (const auto& [ds, dt] : {std::pair{step, 0.0}, {-step, 0.0}, {0.0, step}, {0.0, -step}}) {
      const double s = std::clamp(bs + ds, 0.0, 1.0);
      const double t = std::clamp(bt + dt, 0.0, 1.0);
      const Vector3d pa = a0 + s * (a1 - a0);
      const Vector3d pb = b0 + t * (b1 - b0);
      const double d = (pa - pb).norm();
      if (d < best) {
        best = d;
        bs = s;
        bt = t;
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
    if (step < 1e-12) break;
  }
  return best;
}

struct Panel {
  double s0, s1, t0, t1;
  int depth;
};

}  // namespace

void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  // Roots of P_n on [-1,1] by Newton from the Chebyshev initial guess,
  // mapped to [0,1].
  nodes.resize(static_cast<size_t>(n));
  weights.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Evaluate P_n(x) and P'_n(x) by the three-term recurrence.
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[static_cast<size_t>(i)] = 0.5 * (1.0 - x);  // descending root order -> ascending node
    weights[static_cast<size_t>(i)] = 1.0 / ((1.0 - x * x) * pp * pp);
  }
}

double segment_gli_quadrature(const Eigen::Vector3d& a0, const Eigen::Vector3d& a1,
                              const Eigen::Vector3d& b0, const Eigen::Vector3d& b1,
                              int nodes_per_axis, double ratio, int max_depth) {
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  auto it = cache.find(nodes_per_axis);
  if (it == cache.end()) {
    std::vector<double> nn, ww;
    gauss_legendre_01(nodes_per_axis, nn, ww);
    it = cache.emplace(nodes_per_axis, std::make_pair(std::move(nn), std::move(ww))).first;
  }
  const std::vector<double>& nodes = it->second.first;
  const std::vector<double>& wts = it->second.second;

  const Vector3d da = a1 - a0;
  const Vector3d db = b1 - b0;
  const Vector3d cross = da.cross(db);
  const double len_a = da.norm();
  const double len_b = db.norm();

  double total = 0.0;
  std::stack<Panel> panels;
  panels.push({0.0, 1.0, 0.0, 1.0, 0});
  while (!panels.empty()) {
    const Panel p = panels.top();
    panels.pop();
    const double la = (p.s1 - p.s0) * len_a;
    const double lb = (p.t1 - p.t0) * len_b;
    const Vector3d pa0 = a0 + p.s0 * da, pa1 = a0 + p.s1 * da;
    const Vector3d pb0 = b0 + p.t0 * db, pb1 = b0 + p.t1 * db;
    const double d = pair_distance(pa0, pa1, pb0, pb1);
    if (p.depth < max_depth && d * ratio < std::max(la, lb)) {
      if (la >= lb) {
        const double sm = 0.5 * (p.s0 + p.s1);
        panels.push({p.s0, sm, p.t0, p.t1, p.depth + 1});
        panels.push({sm, p.s1, p.t0, p.t1, p.depth + 1});
      } else {
        const double tm = 0.5 * (p.t0 + p.t1);
        panels.push({p.s0, p.s1, p.t0, tm, p.depth + 1});
        panels.push({p.s0, p.s1, tm, p.t1, p.depth + 1});
      }
      continue;
    }
    // Tensor-product rule over the panel.
    const double js = (p.s1 - p.s0);
    const double jt = (p.t1 - p.t0);
    double panel_sum = 0.0;
    for (size_t i = 0; i < nodes.size(); ++i) {
      const double s = p.s0 + js * nodes[i];
      const Vector3d x1 = a0 + s * da;
      for (size_t j = 0; j < nodes.size(); ++j) {
        const double t = p.t0 + jt * nodes[j];
        const Vector3d r = x1 - (b0 + t * db);
        const double rn = r.norm();
        panel_sum += wts[i] * wts[j] * cross.dot(r) / (rn * rn * rn);
      }
    }
    total += panel_sum * js * jt;
  }
  return total / (4.0 * M_PI);
}

double segment_distance_oracle(const Eigen::Vector3d& a0,
                               const Eigen::Vector3d& a1,
                               const Eigen::Vector3d& b0,
                               const Eigen::Vector3d& b1) {
  return pair_distance(a0, a1, b0, b1);
}

double gli_quadrature(const Eigen::Vector3d& a0, const Eigen::Vector3d& a1,
                      const Eigen::Vector3d& b0, const Eigen::Vector3d& b1,
                      const QuadratureSpec& spec) {
  if (spec.nodes < 2 || spec.nodes > 256) {
    throw OracleError("quadrature nodes per axis must be in [2, 256], got " +
                      std::to_string(spec.nodes));
  }
  const double distance = pair_distance(a0, a1, b0, b1);
  if (!(distance > 1e-3)) {
    throw SegmentsTooClose(
        "segments are " + std::to_string(distance) +
        " m apart; the quadrature reference needs a separation above 1e-3 m");
  }
  return segment_gli_quadrature(a0, a1, b0, b1, spec.nodes);
}

}  // namespace wamtopo_oracle
