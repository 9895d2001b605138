#include "conelab/cone.hpp"

#include <algorithm>
#include <cmath>

#include "conelab/errors.hpp"

namespace conelab {

namespace {
using Idx = Eigen::Index;
}

MetricField build_cone(const ConeSpec& spec) {
  if (spec.epsilon != 1 && spec.epsilon != -1) throw Error(ErrorCode::InvalidArgument, "epsilon must be +1 or -1");
  if (!(spec.r_range.lo >= 0.0)) throw Error(ErrorCode::InvalidArgument, "cone r-range must lie in (0, inf)");
  const std::size_t n = spec.base.dim();
  const std::size_t m = n + 1;
  const ChartFunction base = spec.base.components();
  const double eps = spec.epsilon;
  CoordinateChart chart = spec.base.chart().prepend("r", spec.r_range, spec.r_sampling);

  std::optional<Signature> hint;
  if (spec.base.signature_hint()) {
    hint = *spec.base.signature_hint();
    if (spec.epsilon > 0) ++hint->positive;
    else ++hint->negative;
  }
  ChartFunction comps(m, m * m, [base, n, m, eps](auto x) {
    using T = scalar_of<decltype(x)>;
    const std::vector<T> g = base(x.subspan(1, n));
    const T r2 = x[0] * x[0];
    std::vector<T> out(m * m, T(0.0));
    out[0] = T(eps);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out[(i + 1) * m + (j + 1)] = r2 * g[i * n + j];
    return out;
  });
  return MetricField(std::move(chart), std::move(comps), hint, spec.base.mode());
}

std::string to_string(ConeCase c) {
  switch (c) {
    case ConeCase::NullTangent: return "null-tangent";
    case ConeCase::PlusOne: return "c*eps=+1";
    case ConeCase::MinusOne: return "c*eps=-1";
  }
  return "?";
}

ConeGeodesic closed_form_geodesic(double r0, double a, int c, double L, int epsilon) {
  if (c < -1 || c > 1) throw Error(ErrorCode::InvalidCase, "c must be -1, 0 or 1");
  if (epsilon != 1 && epsilon != -1) throw Error(ErrorCode::InvalidArgument, "epsilon must be +1 or -1");
  if (!(r0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "r0 must be positive");
  if (c != 0 && !(L > 0.0)) throw Error(ErrorCode::InvalidArgument, "L must be positive when c != 0");

  ConeGeodesic g;
  g.r0 = r0;
  g.a = a;
  g.c = c;
  g.L = c == 0 ? 0.0 : L;
  g.epsilon = epsilon;
  const int ce = c * epsilon;
  g.case_tag = ce == 0 ? ConeCase::NullTangent : (ce > 0 ? ConeCase::PlusOne : ConeCase::MinusOne);
  if (ce >= 0) {
    g.T = a >= 0.0 ? kInf : -r0 / a;
    g.escape_time = ce == 0 ? g.T : kInf;
  } else {
    g.T = a >= g.L * r0 ? kInf : r0 / (g.L * r0 - a);
    g.escape_time = g.T;
  }
  return g;
}

double ConeGeodesic::rho(double t) const {
  const double lin = a * t + r0;
  const double ce = c * epsilon;
  return std::sqrt(lin * lin + ce * L * L * r0 * r0 * t * t);
}

double ConeGeodesic::rho_dot(double t) const {
  const double lin = a * t + r0;
  const double ce = c * epsilon;
  return (lin * a + ce * L * L * r0 * r0 * t) / rho(t);
}

double ConeGeodesic::f(double t) const {
  const double lin = a * t + r0;
  switch (case_tag) {
    case ConeCase::NullTangent: return r0 * t / lin;
    // atan2 keeps f continuous through a t + r0 = 0.
    case ConeCase::PlusOne: return std::atan2(L * r0 * t, lin) / L;
    case ConeCase::MinusOne: return std::atanh(L * r0 * t / lin) / L;
  }
  return 0.0;
}

double ConeGeodesic::f_dot(double t) const {
  const double p = rho(t);
  return r0 * r0 / (p * p);
}

ConeCurvatureResidual cone_curvature_residual(const ConeSpec& spec, std::span<const Point> samples) {
  const MetricField cone = build_cone(spec);
  const std::size_t n = spec.base.dim();
  const double eps = spec.epsilon;
  ConeCurvatureResidual out;
  for (const Point& q : samples) {
    const Point p = q.tail(static_cast<Idx>(n));
    const Riemann rb = riemann(spec.base, p);
    const Riemann rc = riemann(cone, q);
    const Matrix& g = rb.metric();
    // cone index = base index + 1
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
          // R^(d_i, d_j) d_k has components R^a_{k i j}
          out.radial = std::max(out.radial, std::abs(rc.up(0, k + 1, i + 1, j + 1)));
          for (std::size_t a = 0; a < n; ++a) {
            double expect = rb.up(a, k, i, j);
            expect -= eps * (g(static_cast<Idx>(j), static_cast<Idx>(k)) * (a == i ? 1.0 : 0.0) -
                             g(static_cast<Idx>(i), static_cast<Idx>(k)) * (a == j ? 1.0 : 0.0));
            out.relation = std::max(out.relation, std::abs(rc.up(a + 1, k + 1, i + 1, j + 1) - expect));
          }
        }
    for (std::size_t a = 0; a <= n; ++a)
      for (std::size_t b = 0; b <= n; ++b)
        for (std::size_t d = 0; d <= n; ++d) {
          out.radial = std::max({out.radial, std::abs(rc.up(a, b, 0, d)), std::abs(rc.up(a, b, d, 0)),
                                 std::abs(rc.up(a, 0, b, d))});
        }
  }
  return out;
}

ClosedFormComparison closed_form_vs_integrator(const ConeSpec& spec, double r0, const Point& p, double a,
                                               const Vector& X, double horizon, std::size_t checkpoints,
                                               double tol) {
  const MetricField cone = build_cone(spec);
  const Idx n = static_cast<Idx>(spec.base.dim());
  const Matrix gb = metric_eval(spec.base, p);
  const double gxx = inner(gb, X, X);
  int c = 0;
  double L = 0.0;
  if (std::abs(gxx) > 1e-14 * std::max(1.0, X.squaredNorm())) {
    c = gxx > 0.0 ? 1 : -1;
    L = std::sqrt(std::abs(gxx));
  }

  ClosedFormComparison out;
  out.closed_form = closed_form_geodesic(r0, a, c, L, spec.epsilon);
  out.checkpoints = checkpoints;
  const double t_end = std::min(horizon, 0.9 * out.closed_form.escape_time);
  out.horizon = t_end;

  std::vector<double> ts;
  for (std::size_t k = 1; k <= checkpoints; ++k)
    ts.push_back(t_end * static_cast<double>(k) / static_cast<double>(checkpoints));

  Point q(n + 1);
  q << r0, p;
  Vector v(n + 1);
  v << a, X;
  GeodesicOptions go;
  go.output_times = ts;
  go.record_steps = false;
  out.numeric = geodesic_integrate(cone, q, v, horizon, tol, go);

  // base geodesic sampled at f(t_k); tolerance split evenly with the cone run
  std::vector<double> fs;
  for (double t : ts) fs.push_back(out.closed_form.f(t));
  const double f_max = fs.empty() ? 0.0 : *std::max_element(fs.begin(), fs.end());
  std::vector<Point> beta(ts.size(), p);
  std::vector<Vector> beta_dot(ts.size(), X);
  if (X.norm() > 0.0 && f_max > 0.0) {
    GeodesicOptions bo;
    bo.output_times = fs;
    bo.record_steps = false;
    const GeodesicResult base = geodesic_integrate(spec.base, p, X, f_max, tol, bo);
    for (std::size_t k = 0; k < fs.size(); ++k) {
      auto it = std::find(base.times.begin(), base.times.end(), fs[k]);
      if (it == base.times.end()) throw Error(ErrorCode::OutOfDomain, "base geodesic did not reach f(t)");
      const auto idx = static_cast<std::size_t>(it - base.times.begin());
      beta[k] = base.positions[idx];
      beta_dot[k] = base.velocities[idx];
    }
  }

  for (std::size_t k = 0; k < ts.size(); ++k) {
    auto it = std::find(out.numeric.times.begin(), out.numeric.times.end(), ts[k]);
    if (it == out.numeric.times.end()) break;  // numeric run stopped early; escape reported separately
    const auto idx = static_cast<std::size_t>(it - out.numeric.times.begin());
    ++out.compared;
    const double t = ts[k];
    Vector ref(2 * (n + 1));
    ref << out.closed_form.rho(t), beta[k], out.closed_form.rho_dot(t), out.closed_form.f_dot(t) * beta_dot[k];
    Vector got(2 * (n + 1));
    got << out.numeric.positions[idx], out.numeric.velocities[idx];
    for (Idx i = 0; i < ref.size(); ++i)
      out.max_deviation = std::max(out.max_deviation, std::abs(got[i] - ref[i]) / std::max(1.0, std::abs(ref[i])));
  }
  return out;
}

}  // namespace conelab
