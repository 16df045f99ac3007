#include "helfrich/directors.h"

#include <cmath>
#include <cstdio>

#include "helfrich/energy.h"
#include "helfrich/errors.h"
#include "helfrich/parallel.h"

namespace helfrich {

using Eigen::Vector2d;
using Eigen::Vector3d;

std::string to_string(DirectorFamily f) {
  return f == DirectorFamily::unit ? "unit" : "pseudo_unit";
}

DirectorFamily director_family_from_string(const std::string& s) {
  if (s == "unit") return DirectorFamily::unit;
  if (s == "pseudo_unit") return DirectorFamily::pseudo_unit;
  throw Error("unknown director family '" + s + "'");
}

std::vector<ConstraintViolation> check_director_constraints(const DirectorField& f, double tol) {
  if (!f.complex) throw Error("director field has no complex");
  const TriangularComplex3D& c = *f.complex;
  if (f.values.size() != static_cast<size_t>(c.num_edges()))
    throw Error("director field has " + std::to_string(f.values.size()) + " values for " +
                std::to_string(c.num_edges()) + " edges");

  std::vector<ConstraintViolation> out;
  auto report = [&](int e, const char* what, double mag) {
    if (mag > tol) out.push_back({e, what, mag});
  };

  for (int e = 0; e < c.num_edges(); ++e) {
    const Edge& ed = c.base.edges[e];
    const Vector3d& v = f.values[e];
    report(e, "tangent-orthogonality", std::abs(v.dot(c.tangent[e])));
    const bool unit_constraints = f.family == DirectorFamily::unit || !ed.interior();
    if (unit_constraints) {
      report(e, "unit-norm", std::abs(v.norm() - 1.0));
      for (int side = 0; side < (ed.interior() ? 2 : 1); ++side)
        report(e, "orientation", std::max(0.0, -v.dot(c.normal[ed.tri[side]])));
    } else {
      report(e, "pseudo-normalization", std::abs(v.dot(c.n0[e]) - 1.0));
    }
  }
  return out;
}

void validate(const DirectorField& f, double tol) {
  const auto bad = check_director_constraints(f, tol);
  if (!bad.empty()) {
    const Edge& ed = f.complex->base.edges[bad.front().edge];
    char mag[32];
    std::snprintf(mag, sizeof mag, "%.3g", bad.front().magnitude);
    throw Error("director constraint '" + bad.front().constraint + "' violated at edge (" +
                std::to_string(ed.a) + "," + std::to_string(ed.b) + ") by " + mag + " (and " +
                std::to_string(bad.size() - 1) + " more)");
  }
}

TriangleAffineField cr_interpolate(const DirectorField& f, int triangle) {
  const TriangularComplex3D& c = *f.complex;
  const auto& tri = c.base.triangles[triangle];
  const auto& te = c.base.triangle_edges[triangle];
  // Midpoint value at the edge opposite local vertex k belongs to the CR
  // basis function 1 - 2 lambda_k.
  const Vector3d &n0 = f.values[te[0]], &n1 = f.values[te[1]], &n2 = f.values[te[2]];
  const auto& g = c.bary_grad[triangle];

  TriangleAffineField out;
  out.triangle = triangle;
  out.centroid_param = (c.base.vertices[tri[0]] + c.base.vertices[tri[1]] +
                        c.base.vertices[tri[2]]) / 3.0;
  out.value_centroid = (n0 + n1 + n2) / 3.0;
  // grad = sum_k n_k (-2 g_k)^T; the difference form keeps constant fields at
  // exactly zero gradient.
  out.grad_param = -2.0 * ((n1 - n0) * g[1].transpose() + (n2 - n0) * g[2].transpose());
  out.grad_shape = out.grad_param * left_pinv(c.jac[triangle]);
  return out;
}

DirectorField recovery_director(const TriangularComplex3D& c, const AnalyticGraph& g) {
  DirectorField f;
  f.complex = &c;
  f.family = DirectorFamily::unit;
  f.values.resize(c.num_edges());

  for (int e = 0; e < c.num_edges(); ++e) {
    const Edge& ed = c.base.edges[e];
    const Vector3d& t = c.tangent[e];
    const Vector3d v = gauss_map(g.grad(c.base.midpoints[e]));
    const Vector3d w = v - v.dot(t) * t;
    if (w.norm() < 1e-8)
      throw DegenerateProjection("recovery target at edge (" + std::to_string(ed.a) + "," +
                                     std::to_string(ed.b) + ") is parallel to the edge",
                                 e);
    const Vector3d n = w.normalized();
    for (int side = 0; side < (ed.interior() ? 2 : 1); ++side)
      if (n.dot(c.normal[ed.tri[side]]) < -1e-10)
        throw OrientationViolation("recovered director at edge (" + std::to_string(ed.a) + "," +
                                       std::to_string(ed.b) +
                                       ") points away from an incident facet normal",
                                   e);
    f.values[e] = n;
  }
  return f;
}

namespace {

std::vector<double> shape_grad_norms(const DirectorField& f) {
  std::vector<double> norms(f.complex->num_triangles());
  parallel_for(f.complex->num_triangles(), [&](std::int64_t k) {
    norms[k] = cr_interpolate(f, static_cast<int>(k)).grad_shape.norm();
  });
  return norms;
}

}  // namespace

RatioStats check_normal_estimate(const DirectorField& f, double zero_tol) {
  const TriangularComplex3D& c = *f.complex;
  const std::vector<double> dn = shape_grad_norms(f);

  RatioStats st;
  double sum = 0;
  for (int e = 0; e < c.num_edges(); ++e) {
    const Edge& ed = c.base.edges[e];
    for (int side = 0; side < (ed.interior() ? 2 : 1); ++side) {
      const int k = ed.tri[side];
      const double num = (f.values[e] - c.normal[k]).norm();
      const double den = c.diam3[k] * dn[k];
      if (den <= zero_tol) {
        ++st.zero_pairs;
        if (num > 1e-10)
          throw EstimateViolation("edge (" + std::to_string(ed.a) + "," + std::to_string(ed.b) +
                                   ") differs from the normal of flat triangle " +
                                   std::to_string(k),
                               e);
        continue;
      }
      const double r = num / den;
      sum += r;
      ++st.count;
      if (r > st.max) {
        st.max = r;
        st.argmax_edge = e;
        st.argmax_triangle = k;
      }
    }
  }
  if (st.count > 0) st.mean = sum / st.count;
  return st;
}

RatioStats check_pseudo_estimate(const DirectorField& f, double hypothesis_threshold,
                                 double zero_tol) {
  const TriangularComplex3D& c = *f.complex;
  const std::vector<double> dn = shape_grad_norms(f);

  RatioStats st;
  double sum = 0;
  for (int e = 0; e < c.num_edges(); ++e) {
    const Edge& ed = c.base.edges[e];
    if (!ed.interior()) continue;
    const double dn_sum = dn[ed.tri[0]] + dn[ed.tri[1]];
    for (int side = 0; side < 2; ++side) {
      const int k = ed.tri[side];
      const double den = c.diam3[k] * dn_sum;
      if (den <= zero_tol) {
        ++st.zero_pairs;
        continue;
      }
      if (den >= hypothesis_threshold) {
        ++st.hypothesis_failures;  // smallness hypothesis failed; not a violation
        continue;
      }
      const double r = (f.values[e] - c.normal[k]).norm() / den;
      sum += r;
      ++st.count;
      if (r > st.max) {
        st.max = r;
        st.argmax_edge = e;
        st.argmax_triangle = k;
      }
    }
  }
  if (st.count > 0) st.mean = sum / st.count;
  return st;
}

EdgeFrame angle_parametrize(const TriangularComplex3D& c, int edge) {
  EdgeFrame fr;
  fr.n0 = c.n0[edge];
  fr.w = c.tangent[edge].cross(fr.n0).normalized();
  return fr;
}

}  // namespace helfrich
