#pragma once

#include <Eigen/Dense>
#include <vector>

namespace helfrich {

// Symmetric Gauss rule on the reference triangle (0,0),(1,0),(0,1).
// Weights are normalized to sum to 1, so for a physical triangle K
//   integral_K f  ~=  area(K) * sum_q w_q f(x_q),
// with x_q mapped through the affine vertex map. All stored rules have
// strictly positive weights; `degree` is the highest total polynomial degree
// integrated exactly.
struct TriangleRule {
  int degree = 0;
  std::vector<Eigen::Vector2d> points;  // reference coordinates
  std::vector<double> weights;
};

// Rule for a requested order in [1, max_quadrature_order()]. Returns the
// lowest-degree positive rule with degree >= order (degree-3 and degree-7
// Dunavant rules carry negative weights and are skipped). Throws
// QuadratureUnavailable outside the supported range.
const TriangleRule& triangle_rule(int order);

int max_quadrature_order();  // 10

}  // namespace helfrich
