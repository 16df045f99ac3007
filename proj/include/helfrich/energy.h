#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "helfrich/directors.h"
#include "helfrich/integrand.h"
#include "helfrich/mesh.h"
#include "helfrich/surfaces.h"

namespace helfrich {

// Normal of the graph z = u at a point with gradient p:
//   gauss_map(p) = (-p1, -p2, 1) / sqrt(1 + |p|^2),
// the unique unit vector with positive e3 component orthogonal to every graph
// tangent (t, t . p).
Eigen::Vector3d gauss_map(const Eigen::Vector2d& p);

// Jacobian of gauss_map, 3x2; columns are d n / d p_j.
Eigen::Matrix<double, 3, 2> gauss_map_jacobian(const Eigen::Vector2d& p);

// J(p) = [[1,0],[0,1],[p1,p2]]: differential of x -> (x, u(x)) at gradient p.
Eigen::Matrix<double, 3, 2> graph_jacobian(const Eigen::Vector2d& p);

// Moore-Penrose left inverse (J^T J)^{-1} J^T of a full-rank 3x2 matrix.
Eigen::Matrix<double, 2, 3> left_pinv(const Eigen::Matrix<double, 3, 2>& J);

// Graph form of the density:
//   F(x, z, p, xi) = f((x, z), gauss_map(p), xi * left_pinv(J(p))) sqrt(1 + |p|^2),
// where xi is the 3x2 parameter-space gradient of the director field.
double graph_integrand_F(const Integrand& f, const Eigen::Vector2d& x, double z,
                         const Eigen::Vector2d& p, const Eigen::Matrix<double, 3, 2>& xi);

struct EnergyReport {
  std::string integrand;
  double total = 0;
  std::vector<double> per_triangle;  // total == sum (exact: total is this sum)
  double size_h = 0;
  double c_star = 0;
  int quad_order = 0;
};

// Discrete energy sum_kappa integral_kappa f(x, normal(kappa), Dn_kappa) dH^2
// with the Crouzeix-Raviart interpolant of the director field. Per-triangle
// contributions are quadrature sums over the lifted triangle (exact
// area(kappa) f(...) for x-independent f at any order).
EnergyReport discrete_energy(const DirectorField& field, const Integrand& f, int quad_order);

// Continuous energy of an analytic graph,
//   E0 = integral_U F(x, u, grad u, grad(gauss_map(grad u))) dx,
// integrated with Gauss rules over the given quadrature mesh of the domain.
EnergyReport continuous_energy(const AnalyticGraph& g, const Integrand& f, int quad_order,
                               const Triangulation2D& quadrature_mesh);

// Finite-difference baseline (mesh-sensitive; for comparison studies only):
//   E_FD = 1/2 sum_{interior e} (len(e) / dist(circumcenters)) |n(k) - n(k')|^2.
// Edge terms are attributed half/half to the incident triangles in
// per_triangle. Throws DegenerateDual when circumcenters collide.
EnergyReport fd_energy(const TriangularComplex3D& c, double dual_tol = 1e-12);

}  // namespace helfrich
