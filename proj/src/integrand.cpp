#include "helfrich/integrand.h"

#include <cmath>
#include <cstdio>

#include "helfrich/errors.h"

namespace helfrich {

using Eigen::Matrix3d;
using Eigen::Vector3d;

Integrand willmore() {
  Integrand f;
  f.name = "willmore";
  f.density = [](const Vector3d&, const Vector3d&, const Matrix3d& A) { return A.squaredNorm(); };
  f.density_grad_A = [](const Vector3d&, const Vector3d&, const Matrix3d& A) {
    return Matrix3d(2.0 * A);
  };
  f.growth_p = 2;
  f.coercivity_c = 1;
  f.quadratic_in_A = true;
  return f;
}

Integrand p_willmore(double p) {
  if (!(p > 1.0)) throw Error("p_willmore: p must exceed 1");
  Integrand f;
  char ps[32];
  std::snprintf(ps, sizeof ps, "%g", p);
  f.name = std::string("p-willmore:") + ps;
  f.density = [p](const Vector3d&, const Vector3d&, const Matrix3d& A) {
    return std::pow(A.squaredNorm(), p / 2.0);
  };
  f.density_grad_A = [p](const Vector3d&, const Vector3d&, const Matrix3d& A) {
    const double a2 = A.squaredNorm();
    if (a2 == 0.0) return Matrix3d(Matrix3d::Zero());
    return Matrix3d(p * std::pow(a2, p / 2.0 - 1.0) * A);
  };
  f.growth_p = p;
  f.coercivity_c = 1;
  f.quadratic_in_A = (p == 2.0);
  return f;
}

Integrand weighted_willmore(std::function<double(const Vector3d&)> weight,
                            double weight_lower_bound, std::string name) {
  if (!(weight_lower_bound > 0)) throw Error("weighted_willmore: weight bound must be positive");
  Integrand f;
  f.name = std::move(name);
  f.density = [weight](const Vector3d& x, const Vector3d&, const Matrix3d& A) {
    return weight(x) * A.squaredNorm();
  };
  f.density_grad_A = [weight](const Vector3d& x, const Vector3d&, const Matrix3d& A) {
    return Matrix3d(2.0 * weight(x) * A);
  };
  f.growth_p = 2;
  f.coercivity_c = weight_lower_bound;
  f.x_dependent = true;
  f.quadratic_in_A = true;
  return f;
}

Integrand weighted_willmore_builtin() {
  return weighted_willmore(
      [](const Vector3d& x) { return 1.0 + 0.5 * std::sin(x.x()) * std::sin(x.y()); }, 0.5);
}

Integrand spontaneous_curvature(double h0) {
  Integrand f;
  char h0s[32];
  std::snprintf(h0s, sizeof h0s, "%g", h0);
  f.name = std::string("spontaneous:") + h0s;
  f.density = [h0](const Vector3d&, const Vector3d&, const Matrix3d& A) {
    const double d = A.trace() - h0;
    return d * d;
  };
  f.density_grad_A = [h0](const Vector3d&, const Vector3d&, const Matrix3d& A) {
    return Matrix3d(2.0 * (A.trace() - h0) * Matrix3d::Identity());
  };
  f.growth_p = 2;
  f.coercivity_c = 0;  // no |A|^p lower bound: (tr A - h0)^2 vanishes off A = 0
  f.quadratic_in_A = true;
  f.assumption_violating = true;
  return f;
}

Matrix3d density_grad_A(const Integrand& f, const Vector3d& x, const Vector3d& n,
                        const Matrix3d& A) {
  if (f.density_grad_A) return f.density_grad_A(x, n, A);
  // Central differences entry-by-entry.
  Matrix3d g;
  const double h = 1e-6 * std::max(1.0, A.norm());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Matrix3d Ap = A, Am = A;
      Ap(i, j) += h;
      Am(i, j) -= h;
      g(i, j) = (f.density(x, n, Ap) - f.density(x, n, Am)) / (2 * h);
    }
  return g;
}

void spot_check_integrand(const Integrand& f, std::mt19937& rng, int samples) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto rand_vec = [&] { return Vector3d(gauss(rng), gauss(rng), gauss(rng)); };
  auto rand_mat = [&] {
    Matrix3d m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = gauss(rng);
    return m;
  };
  for (int s = 0; s < samples; ++s) {
    const Vector3d x = rand_vec(), n = rand_vec().normalized();
    const Matrix3d A = rand_mat(), B = rand_mat();
    // Midpoint convexity in A.
    const double lhs = f.density(x, n, 0.5 * (A + B));
    const double rhs = 0.5 * (f.density(x, n, A) + f.density(x, n, B));
    if (lhs > rhs + 1e-10 * std::max(1.0, std::abs(rhs)))
      throw Error("integrand '" + f.name + "' failed midpoint convexity");
    // Declared coercivity bound.
    const double fa = f.density(x, n, A);
    const double bound = f.coercivity_c * std::pow(A.norm(), f.growth_p);
    if (fa < bound - 1e-10 * std::max(1.0, bound))
      throw Error("integrand '" + f.name + "' failed coercivity bound");
  }
}

Integrand integrand_from_string(const std::string& spec, bool allow_assumption_violating) {
  Integrand f;
  if (spec == "willmore") {
    f = willmore();
  } else if (spec.rfind("p-willmore:", 0) == 0) {
    f = p_willmore(std::stod(spec.substr(11)));
  } else if (spec == "weighted-willmore") {
    f = weighted_willmore_builtin();
  } else if (spec.rfind("spontaneous:", 0) == 0) {
    f = spontaneous_curvature(std::stod(spec.substr(12)));
  } else {
    throw Error("unknown integrand '" + spec + "'");
  }
  if (f.assumption_violating && !allow_assumption_violating)
    throw Error("integrand '" + spec +
                "' violates the standing coercivity assumption; pass "
                "--allow-assumption-violating to use it");
  return f;
}

}  // namespace helfrich
