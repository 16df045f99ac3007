#include "helfrich/energy.h"

#include <cmath>

#include "helfrich/errors.h"
#include "helfrich/parallel.h"
#include "helfrich/quadrature.h"

namespace helfrich {

using Eigen::Matrix2d;
using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;
using Matrix32 = Eigen::Matrix<double, 3, 2>;
using Matrix23 = Eigen::Matrix<double, 2, 3>;

Vector3d gauss_map(const Vector2d& p) {
  const double s = std::sqrt(1.0 + p.squaredNorm());
  return Vector3d(-p.x(), -p.y(), 1.0) / s;
}

Matrix32 gauss_map_jacobian(const Vector2d& p) {
  const double s2 = 1.0 + p.squaredNorm();
  const double s = std::sqrt(s2), s3 = s2 * s;
  Matrix32 d;
  d(0, 0) = -1.0 / s + p.x() * p.x() / s3;
  d(0, 1) = p.x() * p.y() / s3;
  d(1, 0) = d(0, 1);
  d(1, 1) = -1.0 / s + p.y() * p.y() / s3;
  d(2, 0) = -p.x() / s3;
  d(2, 1) = -p.y() / s3;
  return d;
}

Matrix32 graph_jacobian(const Vector2d& p) {
  Matrix32 j;
  j << 1, 0, 0, 1, p.x(), p.y();
  return j;
}

Matrix23 left_pinv(const Matrix32& J) {
  const Matrix2d jtj = J.transpose() * J;
  return jtj.inverse() * J.transpose();
}

double graph_integrand_F(const Integrand& f, const Vector2d& x, double z, const Vector2d& p,
                         const Matrix32& xi) {
  const Matrix3d A = xi * left_pinv(graph_jacobian(p));
  return f.density(Vector3d(x.x(), x.y(), z), gauss_map(p), A) * std::sqrt(1.0 + p.squaredNorm());
}

EnergyReport discrete_energy(const DirectorField& field, const Integrand& f, int quad_order) {
  const TriangularComplex3D& c = *field.complex;
  const TriangleRule& rule = triangle_rule(quad_order);
  const int nt = c.num_triangles();

  EnergyReport rep;
  rep.integrand = f.name;
  rep.quad_order = quad_order;
  rep.per_triangle.assign(nt, 0.0);

  parallel_for(nt, [&](std::int64_t k) {
    const TriangleAffineField fld = cr_interpolate(field, static_cast<int>(k));
    const auto& tri = c.base.triangles[k];
    const Vector3d &A = c.lifted[tri[0]], &B = c.lifted[tri[1]], &C = c.lifted[tri[2]];
    double sum = 0;
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const double xi = rule.points[q].x(), eta = rule.points[q].y();
      const Vector3d x = (1.0 - xi - eta) * A + xi * B + eta * C;
      sum += rule.weights[q] * f.density(x, c.normal[k], fld.grad_shape);
    }
    rep.per_triangle[k] = c.area3[k] * sum;
  });

  for (double v : rep.per_triangle) rep.total += v;
  const RegularityReport reg = regularity(c);
  rep.size_h = reg.size_h;
  rep.c_star = reg.c_star;
  return rep;
}

EnergyReport continuous_energy(const AnalyticGraph& g, const Integrand& f, int quad_order,
                               const Triangulation2D& mesh) {
  const TriangleRule& rule = triangle_rule(quad_order);
  const int nt = static_cast<int>(mesh.triangles.size());

  EnergyReport rep;
  rep.integrand = f.name;
  rep.quad_order = quad_order;
  rep.per_triangle.assign(nt, 0.0);

  parallel_for(nt, [&](std::int64_t k) {
    const auto& tri = mesh.triangles[k];
    const Vector2d &a = mesh.vertices[tri[0]], &b = mesh.vertices[tri[1]],
                   &c = mesh.vertices[tri[2]];
    const double area = 0.5 * std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
    double sum = 0;
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const double xi = rule.points[q].x(), eta = rule.points[q].y();
      const Vector2d x = (1.0 - xi - eta) * a + xi * b + eta * c;
      const Vector2d p = g.grad(x);
      const Matrix32 grad_n = gauss_map_jacobian(p) * g.hess(x);
      sum += rule.weights[q] * graph_integrand_F(f, x, g.u(x), p, grad_n);
    }
    rep.per_triangle[k] = area * sum;
  });

  for (double v : rep.per_triangle) rep.total += v;
  const RegularityReport reg = regularity(mesh);
  rep.size_h = reg.size_h;
  rep.c_star = reg.c_star;
  return rep;
}

EnergyReport fd_energy(const TriangularComplex3D& c, double dual_tol) {
  EnergyReport rep;
  rep.integrand = "fd-willmore";
  rep.per_triangle.assign(c.num_triangles(), 0.0);

  auto center = [&](int k) {
    const auto& tri = c.base.triangles[k];
    return circumcenter(c.lifted[tri[0]], c.lifted[tri[1]], c.lifted[tri[2]]);
  };

  for (int e = 0; e < c.num_edges(); ++e) {
    const Edge& ed = c.base.edges[e];
    if (!ed.interior()) continue;
    const double d = (center(ed.tri[0]) - center(ed.tri[1])).norm();
    if (d <= dual_tol)
      throw DegenerateDual("circumcenters of triangles " + std::to_string(ed.tri[0]) + " and " +
                               std::to_string(ed.tri[1]) + " sharing edge (" +
                               std::to_string(ed.a) + "," + std::to_string(ed.b) + ") coincide",
                           e);
    const double term =
        0.5 * (c.edge_len3[e] / d) * (c.normal[ed.tri[0]] - c.normal[ed.tri[1]]).squaredNorm();
    rep.per_triangle[ed.tri[0]] += 0.5 * term;
    rep.per_triangle[ed.tri[1]] += 0.5 * term;
  }

  for (double v : rep.per_triangle) rep.total += v;
  const RegularityReport reg = regularity(c);
  rep.size_h = reg.size_h;
  rep.c_star = reg.c_star;
  return rep;
}

}  // namespace helfrich
