#include "wamtopo/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "wamtopo/errors.hpp"

namespace wamtopo {

bool EdgeSet::contains(int i, int j) const {
  if (i > j) std::swap(i, j);
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(i, j));
}

std::vector<std::vector<int>> EdgeSet::adjacency() const {
  std::vector<std::vector<int>> adj(static_cast<size_t>(n_vertices));
  for (const auto& [i, j] : edges) {
    adj[static_cast<size_t>(i)].push_back(j);
    adj[static_cast<size_t>(j)].push_back(i);
  }
  return adj;
}

bool operator==(const EdgeSet& a, const EdgeSet& b) {
  return a.n_vertices == b.n_vertices && a.edges == b.edges;
}

Eigen::MatrixX3d jitter_points(const Eigen::MatrixX3d& points) {
  const Vec3 lo = points.colwise().minCoeff();
  const Vec3 hi = points.colwise().maxCoeff();
  const double diag = (hi - lo).norm();
  const double scale = kJitterRelativeScale * diag;
  Eigen::MatrixX3d out = points;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (int k = 0; k < 3; ++k) {
      const std::uint64_t h =
          splitmix64(static_cast<std::uint64_t>(3 * i + k) + 0xD3A1000000000000ULL);
      const double u01 = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0,1)
      out(i, k) += scale * (2.0 * u01 - 1.0);
    }
  }
  return out;
}

double orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  // det[a-d; b-d; c-d] in extended precision.
  const long double adx = a.x() - d.x(), ady = a.y() - d.y(), adz = a.z() - d.z();
  const long double bdx = b.x() - d.x(), bdy = b.y() - d.y(), bdz = b.z() - d.z();
  const long double cdx = c.x() - d.x(), cdy = c.y() - d.y(), cdz = c.z() - d.z();
  const long double det = adx * (bdy * cdz - bdz * cdy) - ady * (bdx * cdz - bdz * cdx) +
                          adz * (bdx * cdy - bdy * cdx);
  return static_cast<double>(det);
}

double insphere(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d,
                const Vec3& e) {
  // 4x4 determinant with rows (p - e, |p - e|^2) for p in {a,b,c,d}.
  long double m[4][4];
  const Vec3* pts[4] = {&a, &b, &c, &d};
  for (int r = 0; r < 4; ++r) {
    const long double x = pts[r]->x() - e.x();
    const long double y = pts[r]->y() - e.y();
    const long double z = pts[r]->z() - e.z();
    m[r][0] = x;
    m[r][1] = y;
    m[r][2] = z;
    m[r][3] = x * x + y * y + z * z;
  }
  // Cofactor expansion along the last column.
  auto det3 = [&](int r0, int r1, int r2) {
    return m[r0][0] * (m[r1][1] * m[r2][2] - m[r1][2] * m[r2][1]) -
           m[r0][1] * (m[r1][0] * m[r2][2] - m[r1][2] * m[r2][0]) +
           m[r0][2] * (m[r1][0] * m[r2][1] - m[r1][1] * m[r2][0]);
  };
  const long double det = -m[0][3] * det3(1, 2, 3) + m[1][3] * det3(0, 2, 3) -
                          m[2][3] * det3(0, 1, 3) + m[3][3] * det3(0, 1, 2);
  return static_cast<double>(det);
}

namespace {

constexpr int kInf = -1;  // symbolic vertex at infinity

struct Tet {
  std::array<int, 4> v;
  bool alive = true;
  bool ghost() const { return v[0] == kInf || v[1] == kInf || v[2] == kInf || v[3] == kInf; }
};

// The finite facet of a ghost tetra, in stored (outward) orientation.
std::array<int, 3> ghost_facet(const Tet& t) {
  std::array<int, 3> f{};
  int k = 0;
  for (int i = 0; i < 4; ++i) {
    if (t.v[static_cast<size_t>(i)] != kInf) f[static_cast<size_t>(k++)] = t.v[static_cast<size_t>(i)];
  }
  return f;
}

struct Triangulation {
  std::vector<Vec3> p;
  std::vector<Tet> tets;
  Vec3 interior_ref;  // a point strictly inside the hull at all times

  const Vec3& at(int i) const { return p[static_cast<size_t>(i)]; }

  bool conflicts(const Tet& t, const Vec3& q) const {
    if (!t.ghost()) {
      return insphere(at(t.v[0]), at(t.v[1]), at(t.v[2]), at(t.v[3]), q) > 0.0;
    }
    const auto f = ghost_facet(t);
    return orient3d(at(f[0]), at(f[1]), at(f[2]), q) > 0.0;
  }

  void add_finite(int a, int b, int c, int d) {
    if (orient3d(at(a), at(b), at(c), at(d)) < 0.0) std::swap(c, d);
    tets.push_back({{a, b, c, d}, true});
  }

  // Ghost over hull facet (a,b,c): stored so the facet faces away from the
  // interior, i.e. orient3d(a,b,c, interior_ref) < 0.
  void add_ghost(int a, int b, int c) {
    const double o = orient3d(at(a), at(b), at(c), interior_ref);
    if (o == 0.0) throw DegenerateInputError("hull facet plane passes through interior reference");
    if (o > 0.0) std::swap(b, c);
    tets.push_back({{a, b, c, kInf}, true});
  }

  void insert(int qi) {
    const Vec3& q = at(qi);
    std::vector<size_t> conflict;
    for (size_t t = 0; t < tets.size(); ++t) {
      if (tets[t].alive && conflicts(tets[t], q)) conflict.push_back(t);
    }
    if (conflict.empty()) {
      throw DegenerateInputError("point " + std::to_string(qi) +
                                 " conflicts with no tetrahedron (duplicate after jitter?)");
    }
    // Boundary facets: unordered facet triples seen exactly once among the
    // conflict tetra facets.
    std::map<std::array<int, 3>, int> count;
    for (const size_t t : conflict) {
      const auto& v = tets[t].v;
      for (int skip = 0; skip < 4; ++skip) {
        std::array<int, 3> f{};
        int k = 0;
        for (int i = 0; i < 4; ++i) {
          if (i != skip) f[static_cast<size_t>(k++)] = v[static_cast<size_t>(i)];
        }
        std::sort(f.begin(), f.end());
        ++count[f];
      }
    }
    for (const size_t t : conflict) tets[t].alive = false;
    for (const auto& [f, n] : count) {
      if (n != 1) continue;
      if (f[0] == kInf) {
        // Silhouette edge (f[1], f[2]) of the hull as seen from q.
        add_ghost(f[1], f[2], qi);
      } else {
        const double o = orient3d(at(f[0]), at(f[1]), at(f[2]), q);
        if (o == 0.0) {
          throw DegenerateInputError("degenerate cavity facet during insertion of point " +
                                     std::to_string(qi));
        }
        add_finite(f[0], f[1], f[2], qi);
      }
    }
  }
};

Triangulation triangulate(const Eigen::MatrixX3d& points) {
  const int n = static_cast<int>(points.rows());
  if (n < 4) {
    throw TooFewPointsError("tetrahedralization needs at least 4 points, got " +
                            std::to_string(n));
  }
  const Eigen::MatrixX3d jp = jitter_points(points);

  Triangulation tri;
  tri.p.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) tri.p[static_cast<size_t>(i)] = jp.row(i);

  // Seed tetra: the first point, the first distinct point, the first
  // non-collinear point, the first non-coplanar point.
  const int v0 = 0;
  int v1 = -1, v2 = -1, v3 = -1;
  for (int i = 1; i < n && v1 < 0; ++i) {
    if ((tri.at(i) - tri.at(v0)).norm() > 0.0) v1 = i;
  }
  for (int i = 1; i < n && v1 >= 0 && v2 < 0; ++i) {
    if (i == v1) continue;
    if ((tri.at(i) - tri.at(v0)).cross(tri.at(v1) - tri.at(v0)).norm() > 0.0) v2 = i;
  }
  for (int i = 1; i < n && v2 >= 0 && v3 < 0; ++i) {
    if (i == v1 || i == v2) continue;
    if (orient3d(tri.at(v0), tri.at(v1), tri.at(v2), tri.at(i)) != 0.0) v3 = i;
  }
  if (v3 < 0) {
    throw DegenerateInputError("points are affinely dependent even after symbolic jitter");
  }
  tri.interior_ref = 0.25 * (tri.at(v0) + tri.at(v1) + tri.at(v2) + tri.at(v3));
  tri.add_finite(v0, v1, v2, v3);
  {
    const std::array<int, 4> t = tri.tets[0].v;  // copy: add_ghost reallocates
    tri.add_ghost(t[1], t[2], t[3]);
    tri.add_ghost(t[0], t[2], t[3]);
    tri.add_ghost(t[0], t[1], t[3]);
    tri.add_ghost(t[0], t[1], t[2]);
  }
  for (int i = 1; i < n; ++i) {
    if (i == v1 || i == v2 || i == v3) continue;
    tri.insert(i);
  }
  return tri;
}

}  // namespace

EdgeSet delaunay_edges(const Eigen::MatrixX3d& points) {
  const Triangulation tri = triangulate(points);
  std::set<std::pair<int, int>> edges;
  for (const Tet& t : tri.tets) {
    if (!t.alive || t.ghost()) continue;
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        const int a = std::min(t.v[static_cast<size_t>(i)], t.v[static_cast<size_t>(j)]);
        const int b = std::max(t.v[static_cast<size_t>(i)], t.v[static_cast<size_t>(j)]);
        edges.emplace(a, b);
      }
    }
  }
  EdgeSet out;
  out.n_vertices = static_cast<int>(points.rows());
  out.edges.assign(edges.begin(), edges.end());
  return out;
}

std::vector<std::array<int, 4>> delaunay_tetrahedra(const Eigen::MatrixX3d& points) {
  const Triangulation tri = triangulate(points);
  std::vector<std::array<int, 4>> out;
  for (const Tet& t : tri.tets) {
    if (!t.alive || t.ghost()) continue;
    std::array<int, 4> v = t.v;
    std::sort(v.begin(), v.end());
    out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace wamtopo
