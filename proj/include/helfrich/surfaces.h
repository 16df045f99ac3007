#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "helfrich/mesh.h"

namespace helfrich {

// Analytic graph z = u(x) over a polygonal domain, with closed-form first and
// second derivatives and a declared Lipschitz bound for |grad u| on the
// domain.
struct AnalyticGraph {
  std::function<double(const Eigen::Vector2d&)> u;
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> grad;
  std::function<Eigen::Matrix2d(const Eigen::Vector2d&)> hess;
  std::vector<Eigen::Vector2d> domain;  // boundary polygon
  double lipschitz = 0;
};

// Consistency check of the declared derivatives against central finite
// differences at random interior points (grad to 1e-6, hess to 1e-5
// norm-relative). Throws Error on mismatch.
void check_derivatives(const AnalyticGraph& g, std::mt19937& rng, int samples = 20);

// Default mesh recipe for a catalog surface's domain.
struct MeshRecipe {
  bool fan = false;             // fan + refinement (polygonal domain)
  Eigen::Vector2d lo, hi;       // rectangle corners when !fan
  MeshPattern pattern = MeshPattern::right;
};

struct ReferenceEnergy {
  std::string integrand;
  double value = 0;
  std::string note;  // provenance / bracket semantics
};

struct SurfaceCatalogEntry {
  std::string name;
  AnalyticGraph graph;
  MeshRecipe recipe;
  std::vector<ReferenceEnergy> references;
};

// Built-in surfaces: plane, paraboloid, saddle, sphere_cap (over a 64-gon),
// gaussian_bump, cubic.
const std::vector<SurfaceCatalogEntry>& catalog();
const SurfaceCatalogEntry& catalog_entry(const std::string& name);

// Parametrized plane u = a . x + b over the unit square.
SurfaceCatalogEntry plane_entry(const Eigen::Vector2d& a, double b);

// Mesh of the entry's domain at subdivision n (rectangles: structured n x n;
// fan domains: the center fan refined log2(n) times, n a power of two).
Triangulation2D default_mesh(const SurfaceCatalogEntry& e, int n);

// Nodal values u(x_i). Throws OutOfDomain if a vertex leaves the domain
// polygon (boundary points are inside). Values at vertices are exact, so the
// piecewise-affine interpolant converges at rate h^2 in sup norm and its
// gradient at rate h in L^p.
std::vector<double> nodal_sample(const AnalyticGraph& g, const Triangulation2D& t,
                                 double tol = 1e-9);

// Point-in-polygon test (closed polygon, tolerance outward).
bool point_in_polygon(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& poly,
                      double tol = 1e-9);

}  // namespace helfrich
