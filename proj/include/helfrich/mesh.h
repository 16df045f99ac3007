#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <vector>

namespace helfrich {

// One edge of a triangulation. Vertex indices satisfy a < b; `tri` lists the
// one or two incident triangles (tri[1] == -1 on boundary edges). Edges are
// stored sorted lexicographically by (a, b), which fixes edge indices, DOF
// ordering and serialization order once and for all.
struct Edge {
  int a = -1, b = -1;
  std::array<int, 2> tri = {-1, -1};
  bool interior() const { return tri[1] >= 0; }
};

// Finite triangulation of a polygonal parameter domain U in R^2, satisfying
// the complex condition: two distinct closed triangles intersect in the empty
// set, a single common vertex, or one entire common edge, and the triangle
// areas sum to the polygon area.
struct Triangulation2D {
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 3>> triangles;  // vertex index triples, as given
  std::vector<Eigen::Vector2d> domain;        // boundary polygon, in order

  // Derived connectivity, filled by build_triangulation:
  std::vector<Edge> edges;                        // sorted by (a, b)
  std::vector<Eigen::Vector2d> midpoints;         // per edge
  std::vector<std::array<int, 3>> triangle_edges; // edge opposite local vertex k

  int edge_index(int a, int b) const;  // -1 if absent
};

// Validates vertex/triangle/domain data (complex condition, coverage,
// non-degeneracy) and derives the edge table. Throws DegenerateTriangle,
// ComplexViolation or CoverageGap.
Triangulation2D build_triangulation(std::vector<Eigen::Vector2d> vertices,
                                    std::vector<std::array<int, 3>> triangles,
                                    std::vector<Eigen::Vector2d> domain);

enum class MeshPattern { right, crisscross };

// Structured triangulation of the axis-aligned rectangle [x0,x1]x[y0,y1] with
// n subdivisions per side. `right` splits each cell along one diagonal
// (2 n^2 triangles); `crisscross` adds the cell centers (4 n^2 triangles).
Triangulation2D structured_mesh(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi,
                                int n, MeshPattern pattern);

// Center fan of a star-shaped polygon (one triangle per boundary edge).
// Companion generator to structured_mesh for non-rectangular domains; refine
// with refine_uniform.
Triangulation2D polygon_fan_mesh(const std::vector<Eigen::Vector2d>& polygon);

// Uniform 4-way refinement (one new vertex per edge). Children are similar to
// their parent, so c_star is preserved and the mesh size halves.
Triangulation2D refine_uniform(const Triangulation2D& t);

struct RegularityReport {
  double size_h = 0;       // max triangle diameter
  double c_star = 0;       // min over triangles of area / diam^2, in (0, sqrt(3)/4]
  int worst_triangle = -1;
  double threshold = 0;    // advisory threshold the report was made with
  bool below_threshold = false;
};

// Shape-regularity survey of the 2D triangulation (see also the overload for
// lifted complexes below). The threshold only sets the advisory flag.
RegularityReport regularity(const Triangulation2D& t, double threshold = 0.05);

// Discrete surface: a triangulation lifted to R^3 triangle-by-triangle, with
// oriented facet normals and per-edge frames. Immutable after construction.
struct TriangularComplex3D {
  Triangulation2D base;
  std::vector<Eigen::Vector3d> lifted;          // per vertex
  std::vector<double> nodal_values;             // empty unless built by push_forward

  // Per triangle:
  std::vector<Eigen::Vector3d> normal;          // unit facet normal n(kappa)
  std::vector<double> area3;                    // lifted area
  std::vector<double> diam3;                    // lifted diameter
  std::vector<Eigen::Matrix<double, 3, 2>> jac; // parametrization Jacobian J(kappa)
  std::vector<Eigen::Vector3d> centroid3;
  // Gradients of the barycentric coordinates on the base triangle; g[k] is
  // grad lambda_k, with g[0] = -g[1]-g[2] exactly.
  std::vector<std::array<Eigen::Vector2d, 3>> bary_grad;

  // Per edge:
  std::vector<Eigen::Vector3d> tangent;         // lifted unit tangent, low->high index
  std::vector<Eigen::Vector3d> n0;              // (n+n')/|n+n'|, or n(kappa) on boundary
  std::vector<double> edge_len3;                // lifted edge length
  std::vector<Eigen::Vector3d> edge_mid3;       // lifted edge midpoint

  int num_triangles() const { return static_cast<int>(base.triangles.size()); }
  int num_edges() const { return static_cast<int>(base.edges.size()); }
};

// Graph lift: vertex (x, y) -> (x, y, u(x, y)) for nodal values u. Facet
// normals are oriented with positive e3 component. Throws FoldBack if
// adjacent facet normals are antipodal (cannot happen for graphs; kept for
// the general entry point below).
TriangularComplex3D push_forward(const Triangulation2D& t, const std::vector<double>& u);

// General lift with explicit vertex positions. Facet normals are oriented
// with positive e3 component unless `normals` supplies an orientation (each
// entry must be the unit normal of its lifted facet up to sign).
TriangularComplex3D make_complex(const Triangulation2D& t,
                                 std::vector<Eigen::Vector3d> lifted,
                                 std::optional<std::vector<Eigen::Vector3d>> normals = {});

RegularityReport regularity(const TriangularComplex3D& c, double threshold = 0.05);

// Circumcenter of a (lifted) triangle, inside its plane. Equidistant from the
// three vertices to 1e-12 relative; throws DegenerateTriangle on collinear
// input.
Eigen::Vector3d circumcenter(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                             const Eigen::Vector3d& c);

}  // namespace helfrich
