#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <optional>

#include "helfrich/directors.h"
#include "helfrich/energy.h"

namespace helfrich {

struct OptimizationProblem {
  const TriangularComplex3D* complex = nullptr;
  Integrand integrand;
  DirectorFamily family = DirectorFamily::pseudo_unit;
  DirectorField initial;       // feasible field of the requested family
  int quad_order = 4;          // unit-family objective quadrature
  double grad_tol = 0;         // 0 = family default (1e-10 pseudo, 1e-8 unit)
  double step_tol = 1e-14;
  int max_iters = 10000;
};

struct OptimizationResult {
  DirectorField field;
  double objective = 0;          // final objective (family semantics below)
  double initial_objective = 0;
  int iterations = 0;
  bool converged = false;
  double kkt_residual = 0;  // CG relative residual / projected-gradient sup norm
};

// Frames for every edge (boundary frames use n0 = normal(kappa)).
std::vector<EdgeFrame> edge_frames(const TriangularComplex3D& c);

// Quadratic objective of the pseudo-unit parametrization: boundary edges are
// pinned at n0(e); interior edges carry n(e) = n0(e) + s_e w(e). x-dependent
// integrands are lumped at the lifted centroid, so Willmore and weighted
// Willmore are exactly quadratic in s. Objective and gradient share one
// assembly:  E(s) = const + L . s + s . H s / 2.
struct PseudoQuadratic {
  Eigen::SparseMatrix<double> H;
  Eigen::VectorXd L;
  double constant = 0;
  std::vector<int> dof_edge;   // interior edge of each DOF
  std::vector<int> edge_dof;   // per edge, -1 for boundary

  double value(const Eigen::VectorXd& s) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& s) const;
};

PseudoQuadratic assemble_pseudo_quadratic(const TriangularComplex3D& c, const Integrand& f,
                                          const std::vector<EdgeFrame>& frames);

DirectorField pseudo_field_from_params(const TriangularComplex3D& c,
                                       const std::vector<EdgeFrame>& frames,
                                       const Eigen::VectorXd& s);
DirectorField unit_field_from_params(const TriangularComplex3D& c,
                                     const std::vector<EdgeFrame>& frames,
                                     const Eigen::VectorXd& theta);

// Objective gradients in the two parametrizations (unit objective = discrete
// energy at quad_order; pseudo objective = the lumped quadratic). Exact for
// quadratic integrands, per-triangle chain rule through Dn_kappa in general.
Eigen::VectorXd objective_gradient_pseudo(const TriangularComplex3D& c, const Integrand& f,
                                          const std::vector<EdgeFrame>& frames,
                                          const Eigen::VectorXd& s);
Eigen::VectorXd objective_gradient_unit(const TriangularComplex3D& c, const Integrand& f,
                                        const std::vector<EdgeFrame>& frames,
                                        const Eigen::VectorXd& theta, int quad_order);

// Global minimizer of the pseudo-unit quadratic by diagonally preconditioned
// conjugate gradient (seed s = 0, relative residual <= grad_tol). Requires a
// quadratic-in-A integrand. Throws SolverStall past max_iters.
OptimizationResult solve_pseudo_unit_quadratic(const OptimizationProblem& p);

// Projected gradient descent on the per-edge angles of the unit family, with
// Armijo backtracking (c1 = 1e-4, halving) and arc clamping to keep
// n . normal(kappa) >= 0. Monotone descent; converged when the projected
// gradient sup norm falls below grad_tol. Returns the best iterate with
// converged = false on iteration exhaustion.
OptimizationResult solve_unit_projected(const OptimizationProblem& p);

}  // namespace helfrich
