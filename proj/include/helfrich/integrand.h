#pragma once

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <string>

namespace helfrich {

// Energy density f(x, n, A): position on the surface, unit director, and the
// 3x3 shape-gradient extension A (A n = 0). Must be continuous and convex in
// A, with the coercivity bound f >= coercivity_c |A|^growth_p. Densities that
// violate those standing assumptions (e.g. spontaneous curvature) are only
// available behind the assumption_violating flag.
struct Integrand {
  std::string name;
  std::function<double(const Eigen::Vector3d& x, const Eigen::Vector3d& n,
                       const Eigen::Matrix3d& A)>
      density;
  // Analytic dA-gradient if available; otherwise gradients fall back to
  // central differences in the entries of A.
  std::function<Eigen::Matrix3d(const Eigen::Vector3d& x, const Eigen::Vector3d& n,
                                const Eigen::Matrix3d& A)>
      density_grad_A;
  double growth_p = 2;
  double coercivity_c = 1;
  bool x_dependent = false;
  bool n_dependent = false;
  bool convex_in_A = true;
  bool quadratic_in_A = false;
  bool assumption_violating = false;
};

// f = |A|_F^2 (Willmore).
Integrand willmore();
// f = |A|_F^p, p in (1, inf).
Integrand p_willmore(double p);
// f = w(x) |A|_F^2 with declared lower bound c = inf w > 0.
Integrand weighted_willmore(std::function<double(const Eigen::Vector3d&)> weight,
                            double weight_lower_bound, std::string name = "weighted-willmore");
// Built-in smooth weight w(x) = 1 + sin(x0) sin(x1) / 2 (c = 1/2).
Integrand weighted_willmore_builtin();
// f = (tr A - H0)^2. Violates coercivity at A with tr A = H0; flagged.
Integrand spontaneous_curvature(double h0);

Eigen::Matrix3d density_grad_A(const Integrand& f, const Eigen::Vector3d& x,
                               const Eigen::Vector3d& n, const Eigen::Matrix3d& A);

// Randomized spot checks of midpoint convexity in A and of the declared
// coercivity bound. Throws Error on a violated sample.
void spot_check_integrand(const Integrand& f, std::mt19937& rng, int samples = 100);

Integrand integrand_from_string(const std::string& spec, bool allow_assumption_violating);

}  // namespace helfrich
