#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "helfrich/errors.h"
#include "helfrich/mesh.h"
#include "helpers.h"

using namespace helfrich;
using Eigen::Vector2d;
using Eigen::Vector3d;

TEST_CASE("diagonal-split square: smallest triangulation") {
  const Triangulation2D t = test::square2();
  CHECK(t.triangles.size() == 2);
  CHECK(t.edges.size() == 5);
  int interior = 0;
  for (const Edge& e : t.edges) interior += e.interior() ? 1 : 0;
  CHECK(interior == 1);
  // edges sorted lexicographically by vertex pair
  for (size_t e = 1; e < t.edges.size(); ++e)
    CHECK(std::make_pair(t.edges[e - 1].a, t.edges[e - 1].b) <
          std::make_pair(t.edges[e].a, t.edges[e].b));
  CHECK(t.edge_index(2, 1) == t.edge_index(1, 2));  // unordered key
  CHECK(t.edge_index(0, 3) == -1);
}

TEST_CASE("structured mesh counts and regularity") {
  const Triangulation2D t1 = structured_mesh({0, 0}, {1, 1}, 1, MeshPattern::right);
  CHECK(t1.triangles.size() == 2);

  const Triangulation2D t2 = structured_mesh({0, 0}, {1, 1}, 2, MeshPattern::right);
  CHECK(t2.triangles.size() == 8);
  CHECK(regularity(t2).size_h == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-15));

  const Triangulation2D t4 = structured_mesh({0, 0}, {1, 1}, 4, MeshPattern::right);
  CHECK(t4.triangles.size() == 32);
  CHECK(t4.edges.size() == 56);
  CHECK(t4.vertices.size() == 25);
  // right isoceles cell halves: area (h^2/2) over diam^2 (2 h^2)
  CHECK(regularity(t4).c_star == doctest::Approx(0.25).epsilon(1e-14));

  const Triangulation2D c2 = structured_mesh({0, 0}, {1, 1}, 2, MeshPattern::crisscross);
  CHECK(c2.triangles.size() == 16);
  CHECK(c2.vertices.size() == 13);
  CHECK(c2.edges.size() == 28);

  CHECK_THROWS_AS(structured_mesh({0, 0}, {1, 1}, 0, MeshPattern::right), Error);
  CHECK_THROWS_AS(structured_mesh({1, 1}, {0, 0}, 2, MeshPattern::right), Error);
}

TEST_CASE("polygon fan mesh of a hexagon") {
  std::vector<Vector2d> hex;
  for (int i = 0; i < 6; ++i)
    hex.emplace_back(std::cos(i * std::acos(-1.0) / 3), std::sin(i * std::acos(-1.0) / 3));
  const Triangulation2D t = polygon_fan_mesh(hex);
  CHECK(t.triangles.size() == 6);
  CHECK(t.vertices.size() == 7);
  CHECK(t.edges.size() == 12);
}

TEST_CASE("uniform refinement: 4x triangles, half the size, same shape constant") {
  Triangulation2D t = test::square2();
  const RegularityReport before = regularity(t);
  const Triangulation2D f = refine_uniform(t);
  CHECK(f.triangles.size() == 8);
  const RegularityReport after = regularity(f);
  CHECK(std::abs(after.c_star - before.c_star) <= 1e-12 * before.c_star);
  CHECK(std::abs(after.size_h - 0.5 * before.size_h) <= 1e-12 * before.size_h);

  // same on an irregular mesh
  Triangulation2D irr = build_triangulation(
      {{0, 0}, {1.3, 0.1}, {0.2, 1.0}, {1.5, 1.4}}, {{0, 1, 2}, {1, 3, 2}},
      {{0, 0}, {1.3, 0.1}, {1.5, 1.4}, {0.2, 1.0}});
  const RegularityReport b2 = regularity(irr);
  const RegularityReport a2 = regularity(refine_uniform(irr));
  CHECK(std::abs(a2.c_star - b2.c_star) <= 1e-12 * b2.c_star);
  CHECK(std::abs(a2.size_h - 0.5 * b2.size_h) <= 1e-12 * b2.size_h);
}

TEST_CASE("triangle areas sum to the domain area") {
  for (const Triangulation2D& t :
       {structured_mesh({-0.5, -0.5}, {0.5, 0.5}, 5, MeshPattern::crisscross), test::square2()}) {
    double sum = 0;
    for (const auto& tri : t.triangles) {
      const Vector2d a = t.vertices[tri[0]], b = t.vertices[tri[1]], c = t.vertices[tri[2]];
      sum += 0.5 * std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
    }
    double dom = 0;
    for (size_t i = 0; i < t.domain.size(); ++i) {
      const Vector2d a = t.domain[i], b = t.domain[(i + 1) % t.domain.size()];
      dom += 0.5 * (a.x() * b.y() - b.x() * a.y());
    }
    CHECK(std::abs(sum - std::abs(dom)) <= 1e-10 * std::abs(dom));
  }
}

TEST_CASE("regularity ratios of canonical triangles") {
  const Triangulation2D eq = build_triangulation(
      {{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}}, {{0, 1, 2}},
      {{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}});
  CHECK(regularity(eq).c_star == doctest::Approx(std::sqrt(3.0) / 4).epsilon(1e-14));

  const Triangulation2D ri =
      build_triangulation({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {{0, 0}, {1, 0}, {0, 1}});
  CHECK(regularity(ri).c_star == doctest::Approx(0.25).epsilon(1e-14));

  const Triangulation2D thin = build_triangulation(
      {{0, 0}, {1, 0}, {0.5, 1e-3}}, {{0, 1, 2}}, {{0, 0}, {1, 0}, {0.5, 1e-3}});
  const RegularityReport r = regularity(thin);
  CHECK(r.c_star == doctest::Approx(5e-4).epsilon(1e-10));
  CHECK(r.below_threshold);
  CHECK(r.worst_triangle == 0);
}

TEST_CASE("invalid inputs are rejected with the offending entity") {
  // vertex repeated inside one triangle
  CHECK_THROWS_AS(build_triangulation({{0, 0}, {1, 0}, {0, 1}}, {{0, 0, 1}},
                                      {{0, 0}, {1, 0}, {0, 1}}),
                  DegenerateTriangle);
  // collinear triangle
  CHECK_THROWS_AS(build_triangulation({{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}},
                                      {{0, 0}, {1, 0}, {2, 0}}),
                  DegenerateTriangle);
  // out-of-range vertex index
  CHECK_THROWS_AS(build_triangulation({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 7}},
                                      {{0, 0}, {1, 0}, {0, 1}}),
                  Error);
  // duplicate vertices
  CHECK_THROWS_AS(build_triangulation({{0, 0}, {1, 0}, {0, 1}, {1, 0}}, {{0, 1, 2}, {0, 3, 2}},
                                      {{0, 0}, {1, 0}, {0, 1}}),
                  ComplexViolation);
  // second triangle's edge covers half an edge of the first (T-junction)
  CHECK_THROWS_AS(build_triangulation({{0, 0}, {1, 0}, {0, 1}, {0.5, 0}, {0.25, -1}},
                                      {{0, 1, 2}, {0, 3, 4}},
                                      {{0, 1}, {0, 0}, {0.25, -1}, {0.5, 0}, {1, 0}}),
                  ComplexViolation);
  // proper edge crossing
  CHECK_THROWS_AS(build_triangulation(
                      {{0, 0}, {2, 0}, {1, 2}, {0, 1.5}, {2, 1.5}, {1, -0.5}},
                      {{0, 1, 2}, {3, 4, 5}}, {{0, 0}, {2, 0}, {2, 1.5}, {0, 1.5}}),
                  ComplexViolation);
  // vertex strictly inside another triangle
  CHECK_THROWS_AS(build_triangulation(
                      {{0, 0}, {3, 0}, {0, 3}, {1, 1}, {1.2, 1}, {1, 1.2}},
                      {{0, 1, 2}, {3, 4, 5}}, {{0, 0}, {3, 0}, {0, 3}}),
                  ComplexViolation);
  // more than two triangles on one edge
  CHECK_THROWS_AS(build_triangulation({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {0.5, 0.5}},
                                      {{0, 1, 2}, {0, 1, 3}, {0, 1, 4}},
                                      {{0, 0}, {1, 0}, {1, 1}, {0, 1}}),
                  ComplexViolation);
  // domain larger than the covered region
  CHECK_THROWS_AS(build_triangulation({{0, 0}, {1, 0}, {0, 1}, {1, 1}}, {{0, 1, 2}, {1, 3, 2}},
                                      {{0, 0}, {2, 0}, {2, 1}, {0, 1}}),
                  CoverageGap);
}

TEST_CASE("push_forward of flat and tilted planes") {
  const Triangulation2D t = structured_mesh({0, 0}, {1, 1}, 2, MeshPattern::right);

  const TriangularComplex3D flat = push_forward(t, std::vector<double>(t.vertices.size(), 0.0));
  for (int k = 0; k < flat.num_triangles(); ++k)
    CHECK((flat.normal[k] - Vector3d(0, 0, 1)).norm() <= 1e-15);
  for (int e = 0; e < flat.num_edges(); ++e)
    CHECK((flat.n0[e] - Vector3d(0, 0, 1)).norm() <= 1e-15);

  // u(x, y) = x: every facet normal is (-1, 0, 1)/sqrt(2)
  std::vector<double> ux;
  for (const auto& v : t.vertices) ux.push_back(v.x());
  const TriangularComplex3D tilt = push_forward(t, ux);
  const Vector3d n(-1 / std::sqrt(2.0), 0, 1 / std::sqrt(2.0));
  for (int k = 0; k < tilt.num_triangles(); ++k) CHECK((tilt.normal[k] - n).norm() <= 1e-12);

  // generic affine u: normals constant across triangles
  std::vector<double> ua;
  for (const auto& v : t.vertices) ua.push_back(0.7 * v.x() - 1.3 * v.y() + 0.4);
  const TriangularComplex3D aff = push_forward(t, ua);
  for (int k = 1; k < aff.num_triangles(); ++k)
    CHECK((aff.normal[k] - aff.normal[0]).norm() <= 1e-12);

  CHECK_THROWS_AS(push_forward(t, std::vector<double>(3, 0.0)), Error);
}

TEST_CASE("lifted edge tangents are orthogonal to incident facet normals") {
  const TriangularComplex3D c = test::lift("paraboloid", 4);
  for (int e = 0; e < c.num_edges(); ++e) {
    const Edge& ed = c.base.edges[e];
    CHECK(std::abs(c.tangent[e].norm() - 1.0) <= 1e-14);
    for (int side = 0; side < (ed.interior() ? 2 : 1); ++side)
      CHECK(std::abs(c.tangent[e].dot(c.normal[ed.tri[side]])) <= 1e-12);
    // tangent points from the lower to the higher vertex index
    const Vector3d d = c.lifted[ed.b] - c.lifted[ed.a];
    CHECK(c.tangent[e].dot(d) > 0);
    // n0 is the normalized normal sum on interior edges
    if (ed.interior()) {
      const Vector3d s = (c.normal[ed.tri[0]] + c.normal[ed.tri[1]]).normalized();
      CHECK((c.n0[e] - s).norm() <= 1e-14);
    } else {
      CHECK((c.n0[e] - c.normal[ed.tri[0]]).norm() <= 1e-14);
    }
  }
  // facet normals honor the graph orientation
  for (int k = 0; k < c.num_triangles(); ++k) CHECK(c.normal[k].z() > 0);
}

TEST_CASE("make_complex: explicit normals, vertical facets, fold-back") {
  const Triangulation2D t = test::square2();
  std::vector<Vector3d> flat = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};

  // opposite explicit orientations across the diagonal are antipodal
  CHECK_THROWS_AS(
      make_complex(t, flat, std::vector<Vector3d>{{0, 0, 1}, {0, 0, -1}}),
      FoldBack);

  // explicit normals must be unit and parallel to the facet normal
  CHECK_THROWS_AS(make_complex(t, flat, std::vector<Vector3d>{{0, 0, 2}, {0, 0, 1}}), Error);
  CHECK_THROWS_AS(make_complex(t, flat, std::vector<Vector3d>{{1, 0, 0}, {0, 0, 1}}), Error);

  // vertical facet needs explicit normals
  const Triangulation2D one =
      build_triangulation({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {{0, 0}, {1, 0}, {0, 1}});
  std::vector<Vector3d> vertical = {{0, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  CHECK_THROWS_AS(make_complex(one, vertical), Error);
  const TriangularComplex3D ok =
      make_complex(one, vertical, std::vector<Vector3d>{{1, 0, 0}});
  CHECK((ok.normal[0] - Vector3d(1, 0, 0)).norm() <= 1e-15);
}

TEST_CASE("circumcenter is equidistant and matches hand-solved cases") {
  // right triangle: hypotenuse midpoint
  CHECK((circumcenter({0, 0, 0}, {1, 0, 0}, {0, 1, 0}) - Vector3d(0.5, 0.5, 0)).norm() <= 1e-14);

  // equilateral: centroid
  const Vector3d a(0, 0, 0), b(1, 0, 0), c(0.5, std::sqrt(3.0) / 2, 0);
  CHECK((circumcenter(a, b, c) - (a + b + c) / 3.0).norm() <= 1e-14);

  // generic case solved from the two bisector equations: center (1, 1/2)
  const Vector3d cc = circumcenter({0, 0, 0}, {2, 0, 0}, {0, 1, 0});
  CHECK((cc - Vector3d(1, 0.5, 0)).norm() <= 1e-14);

  // equidistance at random non-planar triangles
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int it = 0; it < 50; ++it) {
    const Vector3d p(u(rng), u(rng), u(rng)), q(u(rng), u(rng), u(rng)),
        r(u(rng), u(rng), u(rng));
    if ((q - p).cross(r - p).norm() < 1e-3) continue;
    const Vector3d z = circumcenter(p, q, r);
    const double d = (z - p).norm();
    CHECK(std::abs((z - q).norm() - d) <= 1e-12 * d);
    CHECK(std::abs((z - r).norm() - d) <= 1e-12 * d);
    // the center lies in the triangle's plane
    CHECK(std::abs((z - p).dot((q - p).cross(r - p).normalized())) <= 1e-12);
  }

  CHECK_THROWS_AS(circumcenter({0, 0, 0}, {1, 0, 0}, {2, 0, 0}), DegenerateTriangle);
}
