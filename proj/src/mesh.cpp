#include "helfrich/mesh.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "helfrich/errors.h"

namespace helfrich {

namespace {

using Eigen::Vector2d;
using Eigen::Vector3d;

double cross2(const Vector2d& a, const Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

double tri_area2(const Vector2d& a, const Vector2d& b, const Vector2d& c) {
  return 0.5 * std::abs(cross2(b - a, c - a));
}

double tri_diam2(const Vector2d& a, const Vector2d& b, const Vector2d& c) {
  return std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
}

double polygon_area(const std::vector<Vector2d>& poly) {
  double s = 0;
  const int k = static_cast<int>(poly.size());
  for (int i = 0; i < k; ++i) s += cross2(poly[i], poly[(i + 1) % k]);
  return 0.5 * std::abs(s);
}

// Uniform bucket grid over the mesh bounding box; used to keep the pairwise
// validation geometry near-linear.
struct Grid2 {
  Vector2d lo;
  double inv_cell = 0;
  int nx = 1, ny = 1;
  std::vector<std::vector<int>> cells;

  Grid2(const Vector2d& box_lo, const Vector2d& box_hi, int n_items) {
    lo = box_lo;
    const Vector2d ext = (box_hi - box_lo).cwiseMax(1e-300);
    const int n = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n_items))));
    nx = ny = n;
    inv_cell = n / std::max(ext.x(), ext.y());
    cells.resize(static_cast<size_t>(nx) * ny);
  }
  int clampx(double v) const {
    return std::clamp(static_cast<int>((v - lo.x()) * inv_cell), 0, nx - 1);
  }
  int clampy(double v) const {
    return std::clamp(static_cast<int>((v - lo.y()) * inv_cell), 0, ny - 1);
  }
  void insert(int id, const Vector2d& blo, const Vector2d& bhi) {
    for (int j = clampy(blo.y()); j <= clampy(bhi.y()); ++j)
      for (int i = clampx(blo.x()); i <= clampx(bhi.x()); ++i)
        cells[static_cast<size_t>(j) * nx + i].push_back(id);
  }
  // Visits candidate ids (possibly repeated) whose cells overlap the box.
  template <class F>
  void candidates(const Vector2d& blo, const Vector2d& bhi, F&& f) const {
    for (int j = clampy(blo.y()); j <= clampy(bhi.y()); ++j)
      for (int i = clampx(blo.x()); i <= clampx(bhi.x()); ++i)
        for (int id : cells[static_cast<size_t>(j) * nx + i]) f(id);
  }
};

// Distance from p to segment [a, b] and the projection parameter.
std::pair<double, double> point_segment(const Vector2d& p, const Vector2d& a, const Vector2d& b) {
  const Vector2d d = b - a;
  const double dd = d.squaredNorm();
  double t = dd > 0 ? (p - a).dot(d) / dd : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return {(p - (a + t * d)).norm(), t};
}

// Strict proper crossing of segments [a1,b1], [a2,b2] sharing no endpoint:
// both segments straddle the other's supporting line.
bool segments_cross(const Vector2d& a1, const Vector2d& b1, const Vector2d& a2,
                    const Vector2d& b2, double eps) {
  const double d1 = cross2(b1 - a1, a2 - a1);
  const double d2 = cross2(b1 - a1, b2 - a1);
  const double d3 = cross2(b2 - a2, a1 - a2);
  const double d4 = cross2(b2 - a2, b1 - a2);
  return ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) &&
         ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps));
}

void validate_geometry(const Triangulation2D& t) {
  const int nv = static_cast<int>(t.vertices.size());
  const int nt = static_cast<int>(t.triangles.size());

  Vector2d blo = t.vertices.front(), bhi = blo;
  for (const auto& v : t.vertices) {
    blo = blo.cwiseMin(v);
    bhi = bhi.cwiseMax(v);
  }
  for (const auto& v : t.domain) {
    blo = blo.cwiseMin(v);
    bhi = bhi.cwiseMax(v);
  }
  const double scale = std::max((bhi - blo).norm(), 1e-300);
  const double eps_pt = 1e-12 * scale;      // coincidence tolerance
  const double eps_cross = 1e-14 * scale * scale;

  // Duplicate vertices.
  {
    Grid2 grid(blo, bhi, nv);
    for (int i = 0; i < nv; ++i) grid.insert(i, t.vertices[i], t.vertices[i]);
    for (int i = 0; i < nv; ++i) {
      const Vector2d pad(eps_pt, eps_pt);
      grid.candidates(t.vertices[i] - pad, t.vertices[i] + pad, [&](int j) {
        if (j > i && (t.vertices[i] - t.vertices[j]).norm() <= eps_pt)
          throw ComplexViolation("vertices " + std::to_string(i) + " and " + std::to_string(j) +
                                 " coincide");
      });
    }
  }

  // Duplicate triangles (as index sets).
  {
    std::set<std::array<int, 3>> seen;
    for (int k = 0; k < nt; ++k) {
      std::array<int, 3> key = t.triangles[k];
      std::sort(key.begin(), key.end());
      if (!seen.insert(key).second)
        throw ComplexViolation("triangle " + std::to_string(k) + " duplicates an earlier triangle");
    }
  }

  Grid2 edge_grid(blo, bhi, static_cast<int>(t.edges.size()));
  for (int e = 0; e < static_cast<int>(t.edges.size()); ++e) {
    const Vector2d &a = t.vertices[t.edges[e].a], &b = t.vertices[t.edges[e].b];
    edge_grid.insert(e, a.cwiseMin(b), a.cwiseMax(b));
  }

  // T-junctions: a vertex strictly inside another edge.
  for (int v = 0; v < nv; ++v) {
    const Vector2d pad(eps_pt, eps_pt);
    std::vector<int> cand;
    edge_grid.candidates(t.vertices[v] - pad, t.vertices[v] + pad,
                         [&](int e) { cand.push_back(e); });
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    for (int e : cand) {
      if (t.edges[e].a == v || t.edges[e].b == v) continue;
      auto [dist, s] = point_segment(t.vertices[v], t.vertices[t.edges[e].a],
                                     t.vertices[t.edges[e].b]);
      if (dist <= eps_pt)
        throw ComplexViolation("vertex " + std::to_string(v) + " lies inside edge (" +
                               std::to_string(t.edges[e].a) + "," + std::to_string(t.edges[e].b) +
                               ") at parameter " + std::to_string(s));
    }
  }

  // Proper edge crossings.
  for (int e = 0; e < static_cast<int>(t.edges.size()); ++e) {
    const Vector2d &a = t.vertices[t.edges[e].a], &b = t.vertices[t.edges[e].b];
    std::vector<int> cand;
    edge_grid.candidates(a.cwiseMin(b), a.cwiseMax(b), [&](int g) {
      if (g > e) cand.push_back(g);
    });
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    for (int g : cand) {
      const Edge &e1 = t.edges[e], &e2 = t.edges[g];
      if (e1.a == e2.a || e1.a == e2.b || e1.b == e2.a || e1.b == e2.b) continue;
      if (segments_cross(a, b, t.vertices[e2.a], t.vertices[e2.b], eps_cross))
        throw ComplexViolation("edges (" + std::to_string(e1.a) + "," + std::to_string(e1.b) +
                               ") and (" + std::to_string(e2.a) + "," + std::to_string(e2.b) +
                               ") cross");
    }
  }

  // A vertex strictly inside a triangle (containment overlaps).
  {
    Grid2 vgrid(blo, bhi, nv);
    for (int i = 0; i < nv; ++i) vgrid.insert(i, t.vertices[i], t.vertices[i]);
    for (int k = 0; k < nt; ++k) {
      const auto& tri = t.triangles[k];
      const Vector2d &p0 = t.vertices[tri[0]], &p1 = t.vertices[tri[1]], &p2 = t.vertices[tri[2]];
      const Vector2d tlo = p0.cwiseMin(p1).cwiseMin(p2), thi = p0.cwiseMax(p1).cwiseMax(p2);
      const double a2 = cross2(p1 - p0, p2 - p0);
      std::vector<int> cand;
      vgrid.candidates(tlo, thi, [&](int v) { cand.push_back(v); });
      std::sort(cand.begin(), cand.end());
      cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
      for (int v : cand) {
        if (v == tri[0] || v == tri[1] || v == tri[2]) continue;
        const Vector2d& p = t.vertices[v];
        const double l1 = cross2(p1 - p0, p - p0) / a2;
        const double l2 = cross2(p - p0, p2 - p0) / a2;
        const double margin = eps_pt * tri_diam2(p0, p1, p2) / std::abs(a2);
        if (l1 > margin && l2 > margin && (1.0 - l1 - l2) > margin)
          throw ComplexViolation("vertex " + std::to_string(v) + " lies inside triangle " +
                                 std::to_string(k));
      }
    }
  }

  // Coverage: triangle areas must sum to the domain polygon area.
  double sum = 0;
  for (const auto& tri : t.triangles)
    sum += tri_area2(t.vertices[tri[0]], t.vertices[tri[1]], t.vertices[tri[2]]);
  const double target = polygon_area(t.domain);
  if (std::abs(sum - target) > 1e-10 * std::max(target, 1e-30))
    throw CoverageGap("triangle areas sum to " + std::to_string(sum) + ", domain area is " +
                      std::to_string(target));
}

}  // namespace

int Triangulation2D::edge_index(int a, int b) const {
  if (a > b) std::swap(a, b);
  auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(a, b),
                             [](const Edge& e, const std::pair<int, int>& k) {
                               return std::make_pair(e.a, e.b) < k;
                             });
  if (it == edges.end() || it->a != a || it->b != b) return -1;
  return static_cast<int>(it - edges.begin());
}

Triangulation2D build_triangulation(std::vector<Vector2d> vertices,
                                    std::vector<std::array<int, 3>> triangles,
                                    std::vector<Vector2d> domain) {
  if (vertices.size() < 3) throw Error("triangulation needs at least 3 vertices");
  if (triangles.empty()) throw Error("triangulation needs at least 1 triangle");
  if (domain.size() < 3) throw Error("domain polygon needs at least 3 vertices");

  Triangulation2D t;
  t.vertices = std::move(vertices);
  t.triangles = std::move(triangles);
  t.domain = std::move(domain);

  const int nv = static_cast<int>(t.vertices.size());
  for (int k = 0; k < static_cast<int>(t.triangles.size()); ++k) {
    const auto& tri = t.triangles[k];
    for (int idx : tri)
      if (idx < 0 || idx >= nv)
        throw Error("triangle " + std::to_string(k) + " references vertex " + std::to_string(idx));
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw DegenerateTriangle("triangle " + std::to_string(k) + " repeats a vertex", k);
    const Vector2d &a = t.vertices[tri[0]], &b = t.vertices[tri[1]], &c = t.vertices[tri[2]];
    const double diam = tri_diam2(a, b, c);
    if (tri_area2(a, b, c) <= 1e-14 * diam * diam)
      throw DegenerateTriangle("triangle " + std::to_string(k) + " is (numerically) collinear", k);
  }

  // Edge table, sorted lexicographically by (min, max) vertex pair.
  std::map<std::pair<int, int>, std::array<int, 2>> incident;
  for (int k = 0; k < static_cast<int>(t.triangles.size()); ++k) {
    const auto& tri = t.triangles[k];
    for (int j = 0; j < 3; ++j) {
      int a = tri[(j + 1) % 3], b = tri[(j + 2) % 3];
      if (a > b) std::swap(a, b);
      auto [it, fresh] = incident.try_emplace({a, b}, std::array<int, 2>{k, -1});
      if (!fresh) {
        if (it->second[1] >= 0)
          throw ComplexViolation("edge (" + std::to_string(a) + "," + std::to_string(b) +
                                 ") has more than two incident triangles");
        it->second[1] = k;
      }
    }
  }
  t.edges.reserve(incident.size());
  for (const auto& [key, tris] : incident) {
    Edge e;
    e.a = key.first;
    e.b = key.second;
    e.tri = tris;
    t.edges.push_back(e);
  }
  t.midpoints.reserve(t.edges.size());
  for (const auto& e : t.edges) t.midpoints.push_back(0.5 * (t.vertices[e.a] + t.vertices[e.b]));

  t.triangle_edges.resize(t.triangles.size());
  for (int k = 0; k < static_cast<int>(t.triangles.size()); ++k)
    for (int j = 0; j < 3; ++j)
      t.triangle_edges[k][j] = t.edge_index(t.triangles[k][(j + 1) % 3], t.triangles[k][(j + 2) % 3]);

  validate_geometry(t);
  return t;
}

Triangulation2D structured_mesh(const Vector2d& lo, const Vector2d& hi, int n,
                                MeshPattern pattern) {
  if (n < 1) throw Error("structured_mesh: n must be >= 1");
  if (!(hi.x() > lo.x()) || !(hi.y() > lo.y()))
    throw Error("structured_mesh: rectangle corners must satisfy lo < hi");

  std::vector<Vector2d> v;
  std::vector<std::array<int, 3>> tris;
  auto at = [&](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      v.emplace_back(lo.x() + (hi.x() - lo.x()) * i / n, lo.y() + (hi.y() - lo.y()) * j / n);

  if (pattern == MeshPattern::right) {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        tris.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
        tris.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
      }
  } else {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int c = static_cast<int>(v.size());
        v.emplace_back(lo.x() + (hi.x() - lo.x()) * (2 * i + 1) / (2.0 * n),
                       lo.y() + (hi.y() - lo.y()) * (2 * j + 1) / (2.0 * n));
        tris.push_back({at(i, j), at(i + 1, j), c});
        tris.push_back({at(i + 1, j), at(i + 1, j + 1), c});
        tris.push_back({at(i + 1, j + 1), at(i, j + 1), c});
        tris.push_back({at(i, j + 1), at(i, j), c});
      }
  }

  std::vector<Vector2d> domain = {lo, {hi.x(), lo.y()}, hi, {lo.x(), hi.y()}};
  return build_triangulation(std::move(v), std::move(tris), std::move(domain));
}

Triangulation2D polygon_fan_mesh(const std::vector<Vector2d>& polygon) {
  const int k = static_cast<int>(polygon.size());
  if (k < 3) throw Error("polygon_fan_mesh: polygon needs at least 3 vertices");
  Vector2d center = Vector2d::Zero();
  for (const auto& p : polygon) center += p;
  center /= k;
  std::vector<Vector2d> v;
  v.push_back(center);
  v.insert(v.end(), polygon.begin(), polygon.end());
  std::vector<std::array<int, 3>> tris;
  for (int i = 0; i < k; ++i) tris.push_back({0, 1 + i, 1 + (i + 1) % k});
  return build_triangulation(std::move(v), std::move(tris), polygon);
}

Triangulation2D refine_uniform(const Triangulation2D& t) {
  const int nv = static_cast<int>(t.vertices.size());
  std::vector<Vector2d> v = t.vertices;
  v.reserve(nv + t.edges.size());
  for (const auto& m : t.midpoints) v.push_back(m);

  std::vector<std::array<int, 3>> tris;
  tris.reserve(4 * t.triangles.size());
  for (int k = 0; k < static_cast<int>(t.triangles.size()); ++k) {
    const auto& tri = t.triangles[k];
    const int m0 = nv + t.triangle_edges[k][0];  // midpoint of edge opposite v0
    const int m1 = nv + t.triangle_edges[k][1];
    const int m2 = nv + t.triangle_edges[k][2];
    tris.push_back({tri[0], m2, m1});
    tris.push_back({tri[1], m0, m2});
    tris.push_back({tri[2], m1, m0});
    tris.push_back({m0, m1, m2});
  }
  return build_triangulation(std::move(v), std::move(tris), t.domain);
}

RegularityReport regularity(const Triangulation2D& t, double threshold) {
  RegularityReport r;
  r.threshold = threshold;
  r.c_star = std::numeric_limits<double>::infinity();
  for (int k = 0; k < static_cast<int>(t.triangles.size()); ++k) {
    const auto& tri = t.triangles[k];
    const Vector2d &a = t.vertices[tri[0]], &b = t.vertices[tri[1]], &c = t.vertices[tri[2]];
    const double diam = tri_diam2(a, b, c);
    const double ratio = tri_area2(a, b, c) / (diam * diam);
    r.size_h = std::max(r.size_h, diam);
    if (ratio < r.c_star) {
      r.c_star = ratio;
      r.worst_triangle = k;
    }
  }
  r.below_threshold = r.c_star < threshold;
  return r;
}

RegularityReport regularity(const TriangularComplex3D& c, double threshold) {
  RegularityReport r;
  r.threshold = threshold;
  r.c_star = std::numeric_limits<double>::infinity();
  for (int k = 0; k < c.num_triangles(); ++k) {
    const double ratio = c.area3[k] / (c.diam3[k] * c.diam3[k]);
    r.size_h = std::max(r.size_h, c.diam3[k]);
    if (ratio < r.c_star) {
      r.c_star = ratio;
      r.worst_triangle = k;
    }
  }
  r.below_threshold = r.c_star < threshold;
  return r;
}

namespace {

TriangularComplex3D finish_complex(const Triangulation2D& t, std::vector<Vector3d> lifted,
                                   const std::optional<std::vector<Vector3d>>& normals,
                                   std::vector<double> nodal) {
  if (lifted.size() != t.vertices.size())
    throw Error("lift: one position per vertex required");
  if (normals && normals->size() != t.triangles.size())
    throw Error("lift: one normal per triangle required");

  TriangularComplex3D c;
  c.base = t;
  c.lifted = std::move(lifted);
  c.nodal_values = std::move(nodal);

  const int nt = c.num_triangles();
  c.normal.resize(nt);
  c.area3.resize(nt);
  c.diam3.resize(nt);
  c.jac.resize(nt);
  c.centroid3.resize(nt);
  c.bary_grad.resize(nt);

  for (int k = 0; k < nt; ++k) {
    const auto& tri = c.base.triangles[k];
    const Vector3d &A = c.lifted[tri[0]], &B = c.lifted[tri[1]], &C = c.lifted[tri[2]];
    const Vector3d cr = (B - A).cross(C - A);
    const double diam = std::max({(B - A).norm(), (C - B).norm(), (A - C).norm()});
    if (cr.norm() <= 1e-14 * diam * diam)
      throw DegenerateTriangle("lifted triangle " + std::to_string(k) + " is degenerate", k);
    c.area3[k] = 0.5 * cr.norm();
    c.diam3[k] = diam;
    c.centroid3[k] = (A + B + C) / 3.0;

    Vector3d n = cr.normalized();
    if (normals) {
      const Vector3d& user = (*normals)[k];
      if (std::abs(user.norm() - 1.0) > 1e-10)
        throw Error("lift: supplied normal of triangle " + std::to_string(k) + " is not unit");
      if (user.cross(n).norm() > 1e-8)
        throw Error("lift: supplied normal of triangle " + std::to_string(k) +
                    " is not normal to the facet");
      n = user;
    } else {
      if (std::abs(n.z()) <= 1e-12)
        throw Error("lift: facet " + std::to_string(k) +
                    " is vertical; orientation requires explicit normals");
      if (n.z() < 0) n = -n;
    }
    c.normal[k] = n;

    // Parametrization Jacobian and barycentric gradients from the base chart.
    const Vector2d &p0 = c.base.vertices[tri[0]], &p1 = c.base.vertices[tri[1]],
                   &p2 = c.base.vertices[tri[2]];
    Eigen::Matrix2d M;
    M.col(0) = p1 - p0;
    M.col(1) = p2 - p0;
    const Eigen::Matrix2d Minv = M.inverse();
    Eigen::Matrix<double, 3, 2> dV;
    dV.col(0) = B - A;
    dV.col(1) = C - A;
    c.jac[k] = dV * Minv;
    c.bary_grad[k][1] = Minv.row(0).transpose();
    c.bary_grad[k][2] = Minv.row(1).transpose();
    c.bary_grad[k][0] = -c.bary_grad[k][1] - c.bary_grad[k][2];
  }

  const int ne = c.num_edges();
  c.tangent.resize(ne);
  c.n0.resize(ne);
  c.edge_len3.resize(ne);
  c.edge_mid3.resize(ne);
  for (int e = 0; e < ne; ++e) {
    const Edge& ed = c.base.edges[e];
    const Vector3d d = c.lifted[ed.b] - c.lifted[ed.a];
    c.edge_len3[e] = d.norm();
    c.tangent[e] = d / c.edge_len3[e];
    c.edge_mid3[e] = 0.5 * (c.lifted[ed.a] + c.lifted[ed.b]);
    if (ed.interior()) {
      const Vector3d s = c.normal[ed.tri[0]] + c.normal[ed.tri[1]];
      if (s.norm() < 1e-8)
        throw FoldBack("adjacent facet normals at edge (" + std::to_string(ed.a) + "," +
                           std::to_string(ed.b) + ") are antipodal",
                       e);
      c.n0[e] = s.normalized();
    } else {
      c.n0[e] = c.normal[ed.tri[0]];
    }
  }
  return c;
}

}  // namespace

TriangularComplex3D push_forward(const Triangulation2D& t, const std::vector<double>& u) {
  if (u.size() != t.vertices.size()) throw Error("push_forward: one nodal value per vertex");
  std::vector<Vector3d> lifted(t.vertices.size());
  for (size_t i = 0; i < t.vertices.size(); ++i)
    lifted[i] = Vector3d(t.vertices[i].x(), t.vertices[i].y(), u[i]);
  return finish_complex(t, std::move(lifted), std::nullopt, u);
}

TriangularComplex3D make_complex(const Triangulation2D& t, std::vector<Vector3d> lifted,
                                 std::optional<std::vector<Vector3d>> normals) {
  return finish_complex(t, std::move(lifted), normals, {});
}

Vector3d circumcenter(const Vector3d& a, const Vector3d& b, const Vector3d& c) {
  const Vector3d u = b - a, v = c - a;
  const double uu = u.squaredNorm(), vv = v.squaredNorm(), uv = u.dot(v);
  const double det = uu * vv - uv * uv;  // |u x v|^2
  if (det <= 1e-28 * uu * vv)
    throw DegenerateTriangle("circumcenter of a (numerically) collinear triangle");
  const double s = 0.5 * vv * (uu - uv) / det;
  const double w = 0.5 * uu * (vv - uv) / det;
  return a + s * u + w * v;
}

}  // namespace helfrich
