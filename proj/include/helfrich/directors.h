#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "helfrich/mesh.h"
#include "helfrich/surfaces.h"

namespace helfrich {

enum class DirectorFamily { unit, pseudo_unit };

std::string to_string(DirectorFamily f);
DirectorFamily director_family_from_string(const std::string& s);

// One unit (or pseudo-unit) vector per edge of a complex, interpreted as the
// Crouzeix-Raviart midpoint values of a piecewise-affine director field.
//
// Constraints, checked by validate():
//   all edges:       values(e) . tangent(e) = 0
//   unit family:     |values(e)| = 1,  values(e) . normal(kappa) >= 0 for each
//                    incident kappa
//   pseudo_unit:     interior edges values(e) . n0(e) = 1; boundary edges
//                    carry the unit-family constraints.
struct DirectorField {
  const TriangularComplex3D* complex = nullptr;
  DirectorFamily family = DirectorFamily::unit;
  std::vector<Eigen::Vector3d> values;  // indexed like complex->base.edges
};

struct ConstraintViolation {
  int edge = -1;
  std::string constraint;  // which condition failed
  double magnitude = 0;    // violation size
};

// All constraint violations beyond tol (empty vector = valid field).
std::vector<ConstraintViolation> check_director_constraints(const DirectorField& f,
                                                            double tol = 1e-10);
// Throws Error listing the first violation (with its edge key).
void validate(const DirectorField& f, double tol = 1e-10);

// The affine interpolant of the three midpoint values on one triangle.
// grad_param is the gradient with respect to the 2D parameter x; grad_shape
// is the 3x3 extension Dn = grad_param * pinv(J(kappa)), whose null space
// contains the facet normal.
struct TriangleAffineField {
  int triangle = -1;
  Eigen::Vector2d centroid_param;
  Eigen::Vector3d value_centroid;
  Eigen::Matrix<double, 3, 2> grad_param;
  Eigen::Matrix3d grad_shape;

  Eigen::Vector3d value_at(const Eigen::Vector2d& x) const {
    return value_centroid + grad_param * (x - centroid_param);
  }
};

TriangleAffineField cr_interpolate(const DirectorField& f, int triangle);

// Recovery directors for a complex lifted from an analytic graph: for each
// edge, project the exact normal at the edge midpoint onto the plane
// orthogonal to the lifted edge and normalize. Exact for quadratic u; O(h^2)
// in general. Throws DegenerateProjection / OrientationViolation.
DirectorField recovery_director(const TriangularComplex3D& c, const AnalyticGraph& g);

// Ratio statistics for the comparison estimates below.
struct RatioStats {
  double max = 0, mean = 0;
  int count = 0;                // pairs entering the ratio
  int argmax_edge = -1, argmax_triangle = -1;
  int zero_pairs = 0;           // pairs with vanishing denominator
  int hypothesis_failures = 0;  // pseudo check only: smallness hypothesis failed
};

// Ratios |n(e) - normal(kappa)| / (diam(kappa) |Dn_kappa|) over all incident
// (edge, triangle) pairs of a unit-family field. Pairs with Dn_kappa = 0 must
// satisfy n(e) = normal(kappa) exactly (else EstimateViolation) and are excluded.
RatioStats check_normal_estimate(const DirectorField& f, double zero_tol = 1e-13);

// Pseudo-unit analogue on interior edges: denominators
// diam(kappa)(|Dn_kappa| + |Dn_kappa'|), both incident triangles evaluated.
// Pairs violating the smallness hypothesis
// diam(kappa)(|Dn_kappa| + |Dn_kappa'|) < hypothesis_threshold are counted
// separately, not as violations.
RatioStats check_pseudo_estimate(const DirectorField& f,
                                 double hypothesis_threshold = 0.5,
                                 double zero_tol = 1e-13);

// Orthonormal frame for the parameter line / arc through n0(e):
// pseudo-unit fields are n0 + s w, unit fields cos(theta) n0 + sin(theta) w.
struct EdgeFrame {
  Eigen::Vector3d n0, w;  // w = tangent(e) x n0(e)
};

EdgeFrame angle_parametrize(const TriangularComplex3D& c, int edge);

}  // namespace helfrich
