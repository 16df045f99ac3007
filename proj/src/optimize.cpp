#include "helfrich/optimize.h"

#include <Eigen/IterativeLinearSolvers>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "helfrich/errors.h"
#include "helfrich/mesh_io.h"
#include "helfrich/parallel.h"
#include "helfrich/quadrature.h"

namespace helfrich {

using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

constexpr double kDefaultGradTolPseudo = 1e-10;
constexpr double kDefaultGradTolUnit = 1e-8;

// Dn_kappa = sum_k value(e_k) a_k^T with a_k = -2 pinv(J)^T grad lambda_k.
std::array<Vector3d, 3> shape_coefficients(const TriangularComplex3D& c, int k) {
  const Eigen::Matrix<double, 2, 3> P = left_pinv(c.jac[k]);
  std::array<Vector3d, 3> a;
  for (int j = 0; j < 3; ++j) a[j] = -2.0 * (P.transpose() * c.bary_grad[k][j]);
  return a;
}

}  // namespace

std::vector<EdgeFrame> edge_frames(const TriangularComplex3D& c) {
  std::vector<EdgeFrame> fr(c.num_edges());
  for (int e = 0; e < c.num_edges(); ++e) fr[e] = angle_parametrize(c, e);
  return fr;
}

double PseudoQuadratic::value(const VectorXd& s) const {
  return constant + L.dot(s) + 0.5 * s.dot(H * s);
}

VectorXd PseudoQuadratic::gradient(const VectorXd& s) const { return L + H * s; }

PseudoQuadratic assemble_pseudo_quadratic(const TriangularComplex3D& c, const Integrand& f,
                                          const std::vector<EdgeFrame>& frames) {
  if (!f.quadratic_in_A)
    throw Error("pseudo-unit quadratic assembly requires a quadratic-in-A integrand, got '" +
                f.name + "'");

  PseudoQuadratic q;
  q.edge_dof.assign(c.num_edges(), -1);
  for (int e = 0; e < c.num_edges(); ++e)
    if (c.base.edges[e].interior()) {
      q.edge_dof[e] = static_cast<int>(q.dof_edge.size());
      q.dof_edge.push_back(e);
    }
  const int n = static_cast<int>(q.dof_edge.size());
  q.L = VectorXd::Zero(n);

  struct TriPiece {
    double constant = 0;
    std::array<double, 3> lin{};                       // per local interior edge
    std::array<std::array<double, 3>, 3> quad{};       // symmetric local block
    std::array<int, 3> dof = {-1, -1, -1};
  };
  std::vector<TriPiece> pieces(c.num_triangles());

  parallel_for(c.num_triangles(), [&](std::int64_t ki) {
    const int k = static_cast<int>(ki);
    TriPiece& pc = pieces[k];
    const auto a = shape_coefficients(c, k);
    const auto& te = c.base.triangle_edges[k];
    const Vector3d xbar = c.centroid3[k];
    const Vector3d& nbar = c.normal[k];
    const double area = c.area3[k];

    // Integrand frozen at the lifted centroid: exactly quadratic in s.
    auto q_at = [&](const Matrix3d& M) { return area * f.density(xbar, nbar, M); };

    Matrix3d D0 = Matrix3d::Zero();
    std::array<Matrix3d, 3> W;
    for (int j = 0; j < 3; ++j) {
      D0 += frames[te[j]].n0 * a[j].transpose();
      W[j] = frames[te[j]].w * a[j].transpose();
      pc.dof[j] = q.edge_dof[te[j]];
    }
    const double q0 = q_at(D0);
    pc.constant = q0;
    // Split q(D0 + M) = q0 + l(M) + q2(M) by even/odd parts (exact for
    // quadratic densities).
    auto lin_part = [&](const Matrix3d& M) { return 0.5 * (q_at(D0 + M) - q_at(D0 - M)); };
    auto quad_part = [&](const Matrix3d& M) {
      return 0.5 * (q_at(D0 + M) + q_at(D0 - M)) - q0;
    };
    for (int j = 0; j < 3; ++j) {
      if (pc.dof[j] < 0) continue;
      pc.lin[j] = lin_part(W[j]);
      pc.quad[j][j] = 2.0 * quad_part(W[j]);
      for (int m = j + 1; m < 3; ++m) {
        if (pc.dof[m] < 0) continue;
        const double cross = quad_part(W[j] + W[m]) - quad_part(W[j]) - quad_part(W[m]);
        pc.quad[j][m] = pc.quad[m][j] = cross;
      }
    }
  });

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(9 * pieces.size());
  for (const TriPiece& pc : pieces) {
    q.constant += pc.constant;
    for (int j = 0; j < 3; ++j) {
      if (pc.dof[j] < 0) continue;
      q.L[pc.dof[j]] += pc.lin[j];
      for (int m = 0; m < 3; ++m)
        if (pc.dof[m] >= 0 && pc.quad[j][m] != 0.0)
          trips.emplace_back(pc.dof[j], pc.dof[m], pc.quad[j][m]);
    }
  }
  q.H.resize(n, n);
  q.H.setFromTriplets(trips.begin(), trips.end());
  return q;
}

DirectorField pseudo_field_from_params(const TriangularComplex3D& c,
                                       const std::vector<EdgeFrame>& frames, const VectorXd& s) {
  DirectorField f;
  f.complex = &c;
  f.family = DirectorFamily::pseudo_unit;
  f.values.resize(c.num_edges());
  int dof = 0;
  for (int e = 0; e < c.num_edges(); ++e) {
    if (c.base.edges[e].interior())
      f.values[e] = frames[e].n0 + s[dof++] * frames[e].w;
    else
      f.values[e] = frames[e].n0;
  }
  return f;
}

DirectorField unit_field_from_params(const TriangularComplex3D& c,
                                     const std::vector<EdgeFrame>& frames, const VectorXd& theta) {
  DirectorField f;
  f.complex = &c;
  f.family = DirectorFamily::unit;
  f.values.resize(c.num_edges());
  for (int e = 0; e < c.num_edges(); ++e)
    f.values[e] = std::cos(theta[e]) * frames[e].n0 + std::sin(theta[e]) * frames[e].w;
  return f;
}

VectorXd objective_gradient_pseudo(const TriangularComplex3D& c, const Integrand& f,
                                   const std::vector<EdgeFrame>& frames, const VectorXd& s) {
  std::vector<int> edge_dof(c.num_edges(), -1);
  int n = 0;
  for (int e = 0; e < c.num_edges(); ++e)
    if (c.base.edges[e].interior()) edge_dof[e] = n++;
  if (s.size() != n) throw Error("objective_gradient_pseudo: wrong parameter count");

  std::vector<std::array<double, 3>> local(c.num_triangles());
  std::vector<std::array<int, 3>> dofs(c.num_triangles());
  parallel_for(c.num_triangles(), [&](std::int64_t ki) {
    const int k = static_cast<int>(ki);
    const auto a = shape_coefficients(c, k);
    const auto& te = c.base.triangle_edges[k];
    Matrix3d D = Matrix3d::Zero();
    for (int j = 0; j < 3; ++j) {
      const int d = edge_dof[te[j]];
      const Vector3d v =
          d >= 0 ? Vector3d(frames[te[j]].n0 + s[d] * frames[te[j]].w) : frames[te[j]].n0;
      D += v * a[j].transpose();
    }
    const Matrix3d G = density_grad_A(f, c.centroid3[k], c.normal[k], D);
    for (int j = 0; j < 3; ++j) {
      dofs[k][j] = edge_dof[te[j]];
      local[k][j] = dofs[k][j] >= 0 ? c.area3[k] * frames[te[j]].w.dot(G * a[j]) : 0.0;
    }
  });

  VectorXd g = VectorXd::Zero(n);
  for (int k = 0; k < c.num_triangles(); ++k)
    for (int j = 0; j < 3; ++j)
      if (dofs[k][j] >= 0) g[dofs[k][j]] += local[k][j];
  return g;
}

VectorXd objective_gradient_unit(const TriangularComplex3D& c, const Integrand& f,
                                 const std::vector<EdgeFrame>& frames, const VectorXd& theta,
                                 int quad_order) {
  if (theta.size() != c.num_edges()) throw Error("objective_gradient_unit: wrong parameter count");
  const TriangleRule& rule = triangle_rule(quad_order);

  std::vector<std::array<double, 3>> local(c.num_triangles());
  parallel_for(c.num_triangles(), [&](std::int64_t ki) {
    const int k = static_cast<int>(ki);
    const auto a = shape_coefficients(c, k);
    const auto& te = c.base.triangle_edges[k];
    const auto& tri = c.base.triangles[k];
    Matrix3d D = Matrix3d::Zero();
    for (int j = 0; j < 3; ++j) {
      const int e = te[j];
      const Vector3d v = std::cos(theta[e]) * frames[e].n0 + std::sin(theta[e]) * frames[e].w;
      D += v * a[j].transpose();
    }
    // Quadrature-averaged density gradient (x varies, Dn is constant).
    Matrix3d G = Matrix3d::Zero();
    const Vector3d &A = c.lifted[tri[0]], &B = c.lifted[tri[1]], &C = c.lifted[tri[2]];
    for (size_t qi = 0; qi < rule.points.size(); ++qi) {
      const double xi = rule.points[qi].x(), eta = rule.points[qi].y();
      const Vector3d x = (1.0 - xi - eta) * A + xi * B + eta * C;
      G += rule.weights[qi] * density_grad_A(f, x, c.normal[k], D);
    }
    G *= c.area3[k];
    for (int j = 0; j < 3; ++j) {
      const int e = te[j];
      const Vector3d dv = -std::sin(theta[e]) * frames[e].n0 + std::cos(theta[e]) * frames[e].w;
      local[k][j] = dv.dot(G * a[j]);
    }
  });

  VectorXd g = VectorXd::Zero(c.num_edges());
  for (int k = 0; k < c.num_triangles(); ++k)
    for (int j = 0; j < 3; ++j) g[c.base.triangle_edges[k][j]] += local[k][j];
  return g;
}

OptimizationResult solve_pseudo_unit_quadratic(const OptimizationProblem& p) {
  const TriangularComplex3D& c = *p.complex;
  const double tol = p.grad_tol > 0 ? p.grad_tol : kDefaultGradTolPseudo;
  const std::vector<EdgeFrame> frames = edge_frames(c);
  const PseudoQuadratic q = assemble_pseudo_quadratic(c, p.integrand, frames);
  const int n = static_cast<int>(q.dof_edge.size());

  OptimizationResult res;
  // Initial objective: the supplied field projected onto the parameter line,
  // or s = 0 when none is given.
  VectorXd s0 = VectorXd::Zero(n);
  if (!p.initial.values.empty()) {
    validate(p.initial);
    for (int d = 0; d < n; ++d) {
      const int e = q.dof_edge[d];
      s0[d] = (p.initial.values[e] - frames[e].n0).dot(frames[e].w);
    }
  }
  res.initial_objective = q.value(s0);

  VectorXd s = VectorXd::Zero(n);
  if (n > 0) {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(tol);
    cg.setMaxIterations(p.max_iters);
    cg.compute(q.H);
    s = cg.solveWithGuess(VectorXd(-q.L), VectorXd::Zero(n));
    if (cg.info() == Eigen::NoConvergence)
      throw SolverStall("conjugate gradient did not reach tolerance " + format_real(tol) +
                        " within " + std::to_string(p.max_iters) + " iterations");
    res.iterations = static_cast<int>(cg.iterations());
    const double lnorm = q.L.norm();
    res.kkt_residual = (q.H * s + q.L).norm() / (lnorm > 0 ? lnorm : 1.0);
  }
  res.converged = true;
  res.field = pseudo_field_from_params(c, frames, s);
  res.objective = q.value(s);
  return res;
}

OptimizationResult solve_unit_projected(const OptimizationProblem& p) {
  const TriangularComplex3D& c = *p.complex;
  const double tol = p.grad_tol > 0 ? p.grad_tol : kDefaultGradTolUnit;
  const std::vector<EdgeFrame> frames = edge_frames(c);
  const int ne = c.num_edges();

  // Feasible arcs: n(theta) . normal(kappa) >= 0 for every incident facet.
  VectorXd lo(ne), hi(ne);
  for (int e = 0; e < ne; ++e) {
    const Edge& ed = c.base.edges[e];
    double phi_max = -std::numbers::pi, phi_min = std::numbers::pi;
    for (int side = 0; side < (ed.interior() ? 2 : 1); ++side) {
      const Vector3d& nb = c.normal[ed.tri[side]];
      const double phi = std::atan2(frames[e].w.dot(nb), frames[e].n0.dot(nb));
      phi_max = std::max(phi_max, phi);
      phi_min = std::min(phi_min, phi);
    }
    lo[e] = phi_max - 0.5 * std::numbers::pi;
    hi[e] = phi_min + 0.5 * std::numbers::pi;
  }

  if (p.initial.values.empty()) throw Error("solve_unit_projected: initial field required");
  validate(p.initial);
  VectorXd theta(ne);
  for (int e = 0; e < ne; ++e) {
    const Vector3d& v = p.initial.values[e];
    theta[e] = std::clamp(std::atan2(v.dot(frames[e].w), v.dot(frames[e].n0)), lo[e], hi[e]);
  }

  auto objective = [&](const VectorXd& th) {
    return discrete_energy(unit_field_from_params(c, frames, th), p.integrand, p.quad_order).total;
  };
  auto projected = [&](const VectorXd& th, const VectorXd& g) {
    VectorXd pg = g;
    for (int e = 0; e < ne; ++e)
      if ((th[e] <= lo[e] + 1e-14 && g[e] > 0) || (th[e] >= hi[e] - 1e-14 && g[e] < 0)) pg[e] = 0;
    return pg;
  };

  OptimizationResult res;
  double E = objective(theta);
  res.initial_objective = E;
  constexpr double c1 = 1e-4;

  int it = 0;
  bool converged = false;
  double kkt = 0;
  VectorXd g_prev, theta_prev;
  for (; it < p.max_iters; ++it) {
    const VectorXd g = objective_gradient_unit(c, p.integrand, frames, theta, p.quad_order);
    kkt = projected(theta, g).lpNorm<Eigen::Infinity>();
    if (kkt <= tol) {
      converged = true;
      break;
    }
    // Barzilai-Borwein trial step, kept monotone by Armijo backtracking along
    // the clamped direction.
    double alpha = 1.0;
    if (it > 0) {
      const VectorXd dth = theta - theta_prev, dg = g - g_prev;
      const double denom = dth.dot(dg);
      if (denom > 0) alpha = std::clamp(dth.squaredNorm() / denom, 1e-6, 1e6);
    }
    theta_prev = theta;
    g_prev = g;
    bool accepted = false;
    while (alpha > 1e-20) {
      VectorXd cand = (theta - alpha * g).cwiseMax(lo).cwiseMin(hi);
      const VectorXd d = cand - theta;
      const double En = objective(cand);
      if (En <= E + c1 * g.dot(d)) {
        accepted = d.lpNorm<Eigen::Infinity>() >= p.step_tol;
        theta = cand;
        E = En;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // stalled at the certifiable-decrease floor: best iterate
  }

  res.field = unit_field_from_params(c, frames, theta);
  res.objective = E;
  res.iterations = it;
  res.converged = converged;
  res.kkt_residual = kkt;
  return res;
}

}  // namespace helfrich
