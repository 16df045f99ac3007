#pragma once

#include <stdexcept>
#include <string>

namespace helfrich {

// Base class for all library errors. Subclasses name the failed precondition;
// messages carry the offending entity (triangle/edge index) where one exists.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A triangle with (numerically) collinear vertices, or a degenerate
// circumcenter system.
struct DegenerateTriangle : Error {
  int triangle = -1;
  DegenerateTriangle(const std::string& msg, int tri = -1) : Error(msg), triangle(tri) {}
};

// Two triangles intersect in something other than the empty set, a single
// common vertex, or one entire common edge.
struct ComplexViolation : Error {
  using Error::Error;
};

// Triangle areas do not sum to the domain polygon area.
struct CoverageGap : Error {
  using Error::Error;
};

// Adjacent facet normals are (numerically) antipodal: n0(e) is undefined.
struct FoldBack : Error {
  int edge = -1;
  FoldBack(const std::string& msg, int e = -1) : Error(msg), edge(e) {}
};

// Recovery target is (numerically) parallel to the lifted edge.
struct DegenerateProjection : Error {
  int edge = -1;
  DegenerateProjection(const std::string& msg, int e = -1) : Error(msg), edge(e) {}
};

// A director points away from an incident facet normal.
struct OrientationViolation : Error {
  int edge = -1;
  OrientationViolation(const std::string& msg, int e = -1) : Error(msg), edge(e) {}
};

// A zero-gradient triangle whose edge director disagrees with the facet normal.
struct EstimateViolation : Error {
  int edge = -1;
  EstimateViolation(const std::string& msg, int e = -1) : Error(msg), edge(e) {}
};

// Requested quadrature order above the implemented maximum.
struct QuadratureUnavailable : Error {
  using Error::Error;
};

// Circumcenters of two adjacent triangles (numerically) coincide, so the
// finite-difference dual length l/d is undefined.
struct DegenerateDual : Error {
  int edge = -1;
  DegenerateDual(const std::string& msg, int e = -1) : Error(msg), edge(e) {}
};

// A sample point outside the declared domain of an analytic surface.
struct OutOfDomain : Error {
  using Error::Error;
};

// Iterative solver exceeded its iteration budget without reaching tolerance.
struct SolverStall : Error {
  using Error::Error;
};

// Malformed input file (mesh/director/config text formats).
struct ParseError : Error {
  using Error::Error;
};

}  // namespace helfrich
