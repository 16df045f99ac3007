#pragma once

#include <Eigen/Dense>
#include <string>

#include "helfrich/mesh.h"
#include "helfrich/surfaces.h"

namespace test {

// 2-triangle square [0,s]^2 split by its diagonal.
inline helfrich::Triangulation2D square2(double s = 1.0) {
  return helfrich::build_triangulation({{0, 0}, {s, 0}, {0, s}, {s, s}},
                                       {{0, 1, 2}, {1, 3, 2}},
                                       {{0, 0}, {s, 0}, {s, s}, {0, s}});
}

// Catalog surface lifted from its default mesh at subdivision n.
inline helfrich::TriangularComplex3D lift(const std::string& name, int n) {
  const auto& e = helfrich::catalog_entry(name);
  const auto mesh = helfrich::default_mesh(e, n);
  return helfrich::push_forward(mesh, helfrich::nodal_sample(e.graph, mesh));
}

}  // namespace test
