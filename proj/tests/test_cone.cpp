#include <cmath>

#include "conelab/cone.hpp"
#include "conelab/errors.hpp"
#include "conelab/stock.hpp"
#include "doctest.h"

using namespace conelab;

namespace {

Point pt(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

// Base vector on -dx^2 + dy^2 with g(X,X) = c L^2.
Vector minkowski_tangent(int c, double L) {
  Vector X(2);
  if (c > 0) X << 0.3 * L, std::sqrt(1.09) * L;
  else if (c < 0) X << std::sqrt(1.09) * L, 0.3 * L;
  else X << L, L;
  return X;
}

double first_escape(const ConeSpec& spec, double r0, double a, const Vector& X, double horizon) {
  const MetricField cone = build_cone(spec);
  Point q(3);
  q << r0, 0.0, 0.0;
  Vector v(3);
  v << a, X;
  const GeodesicResult r = geodesic_integrate(cone, q, v, horizon, 1e-10);
  if (r.verdict == GeodesicVerdict::ReachedHorizon) return kInf;
  return *r.escape_time_estimate;
}

}  // namespace

TEST_CASE("build_cone: flatness over constant curvature eps bases") {
  const MetricField s = build_cone(ConeSpec{1, stock::round_sphere()});
  Matrix g = metric_eval(s, pt({2.0, 0.0, 0.0}));
  CHECK(g(0, 0) == 1.0);
  CHECK(g(1, 1) == doctest::Approx(16.0));  // r^2 * 4 at the pole
  for (const auto& p : s.chart().samples(20, 1)) CHECK(riemann(s, p).max_abs_up() < 1e-6);

  const MetricField h = build_cone(ConeSpec{-1, stock::hyperbolic_halfplane()});
  for (const auto& p : h.chart().samples(20, 2)) CHECK(riemann(h, p).max_abs_up() < 1e-6);

  const MetricField horo = build_cone(ConeSpec{-1, stock::horosphere(stock::round_sphere())});
  double m = 0.0;
  for (const auto& p : horo.chart().samples(20, 3)) m = std::max(m, riemann(horo, p).max_abs_up());
  CHECK(m > 1e-2);
  CHECK(horo.signature_hint().has_value());
  CHECK(*horo.signature_hint() == Signature{1, 3});
}

TEST_CASE("closed_form_geodesic examples") {
  ConeGeodesic g = closed_form_geodesic(1.0, 1.0, 0, 0.0, 1);
  CHECK(g.T == kInf);
  CHECK(g.rho(3.0) == doctest::Approx(4.0));
  CHECK(g.f(3.0) == doctest::Approx(0.75));

  g = closed_form_geodesic(1.0, -1.0, 0, 0.0, 1);
  CHECK(g.T == doctest::Approx(1.0));

  g = closed_form_geodesic(1.0, 0.0, 1, 1.0, -1);
  CHECK(g.case_tag == ConeCase::MinusOne);
  CHECK(g.T == doctest::Approx(1.0));
  for (double t : {0.1, 0.5, 0.9}) CHECK(g.f(t) == doctest::Approx(std::atanh(t)));

  CHECK_THROWS_AS(closed_form_geodesic(1.0, 0.0, 2, 1.0, 1), Error);
  try {
    closed_form_geodesic(1.0, 0.0, -2, 1.0, 1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidCase);
  }
}

TEST_CASE("boundary a = L r in the c eps = -1 branch has T = inf") {
  const ConeGeodesic g = closed_form_geodesic(2.0, 3.0, -1, 1.5, 1);
  CHECK(g.T == kInf);
  const ConeGeodesic h = closed_form_geodesic(2.0, 3.0 - 1e-9, -1, 1.5, 1);
  CHECK(std::isfinite(h.T));
  // rho stays positive along the boundary case
  for (double t : {1.0, 10.0, 100.0}) CHECK(g.rho(t) > 0.0);
  CHECK(first_escape(ConeSpec{1, stock::minkowski2()}, 2.0, 3.0, minkowski_tangent(-1, 1.5), 50.0) == kInf);
}

TEST_CASE("closed forms solve the radial and base equations") {
  // rho'' = c eps L^2 rho f'^2 and 2 rho' f' + rho f'' = 0, checked by central differences
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    const int c = static_cast<int>(rng.index(3)) - 1;
    const int eps = rng.sign() > 0 ? 1 : -1;
    const double r0 = rng.uniform(0.3, 3.0);
    const double L = rng.uniform(0.2, 2.0);
    const double a = rng.uniform(-2.0, 2.0);
    const ConeGeodesic g = closed_form_geodesic(r0, a, c, L, eps);
    const double tmax = std::min(5.0, 0.8 * g.escape_time);
    CHECK(g.rho(0.0) == doctest::Approx(r0));
    CHECK(g.f(0.0) == 0.0);
    double prev = -1.0;
    for (int q = 1; q < 20; ++q) {
      const double t = tmax * q / 20.0;
      const double h = 1e-4;
      const double rpp = (g.rho(t + h) - 2 * g.rho(t) + g.rho(t - h)) / (h * h);
      const double fp = (g.f(t + h) - g.f(t - h)) / (2 * h);
      const double fpp = (g.f(t + h) - 2 * g.f(t) + g.f(t - h)) / (h * h);
      const double rp = (g.rho(t + h) - g.rho(t - h)) / (2 * h);
      const double ce = c * eps;
      CHECK(std::abs(rpp - ce * g.L * g.L * g.rho(t) * fp * fp) < 1e-4 * std::max(1.0, std::abs(rpp)));
      CHECK(std::abs(2 * rp * fp + g.rho(t) * fpp) < 1e-4 * std::max(1.0, std::abs(fpp)));
      CHECK(fp == doctest::Approx(g.f_dot(t)).epsilon(1e-5));
      CHECK(g.f(t) > prev);
      prev = g.f(t);
      CHECK(g.rho(t) > 0.0);
    }
  }
}

TEST_CASE("closed-form T matches the integrator's first boundary event") {
  Rng rng(2024);
  for (int k = 0; k < 40; ++k) {
    const int c = static_cast<int>(rng.index(3)) - 1;
    const int eps = rng.sign() > 0 ? 1 : -1;
    const double r0 = rng.uniform(0.5, 2.0);
    const double L = rng.uniform(0.5, 1.5);
    double a = rng.uniform(-1.5, 1.5);
    const ConeGeodesic g = closed_form_geodesic(r0, a, c, L, eps);
    CAPTURE(c);
    CAPTURE(eps);
    CAPTURE(a);
    const double te = first_escape(ConeSpec{eps, stock::minkowski2()}, r0, a, minkowski_tangent(c, L), 50.0);
    if (g.escape_time > 50.0) {
      CHECK(te == kInf);
    } else {
      CHECK(te == doctest::Approx(g.escape_time).epsilon(0.01));
    }
    if (c * eps == 1 && a < 0.0) CHECK(g.escape_time == kInf);
    else CHECK(g.escape_time == g.T);
  }
}

TEST_CASE("c eps = +1 with a < 0 continues past -r/a") {
  const ConeSpec spec{1, stock::circle()};
  Vector X(1);
  X << 1.0;
  const ClosedFormComparison cmp = closed_form_vs_integrator(spec, 1.0, pt({0.0}), -1.0, X, 5.0);
  CHECK(cmp.closed_form.T == doctest::Approx(1.0));
  CHECK(cmp.closed_form.escape_time == kInf);
  CHECK(cmp.numeric.verdict == GeodesicVerdict::ReachedHorizon);
  CHECK(cmp.compared == cmp.checkpoints);
  CHECK(cmp.max_deviation < 1e-6);
}

TEST_CASE("cone_curvature_residual") {
  const ConeSpec s{1, stock::round_sphere()};
  const MetricField cs = build_cone(s);
  const auto pts = cs.chart().samples(20, 4);
  ConeCurvatureResidual r = cone_curvature_residual(s, pts);
  CHECK(r.relation < 1e-6);
  CHECK(r.radial < 1e-6);

  const ConeSpec t{-1, stock::cosh_warped(stock::flat_torus())};
  const auto pts2 = build_cone(t).chart().samples(20, 5);
  r = cone_curvature_residual(t, pts2);
  CHECK(r.relation < 1e-6);
  CHECK(r.radial < 1e-6);

  const MetricField deg = MetricField::from_generic(CoordinateChart({"x"}, {Interval{}}), [](auto x) {
    using T = scalar_of<decltype(x)>;
    return std::vector<T>{x[0] * x[0]};
  });
  const ConeSpec d{1, deg};
  try {
    cone_curvature_residual(d, std::vector<Point>{pt({1.0, 0.0})});
    FAIL("expected DegenerateMetric");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateMetric);
  }
}

TEST_CASE("cone over a constant curvature base has curvature r^2 (kappa - eps)") {
  struct Case {
    MetricField base;
    double kappa;
  };
  const std::vector<Case> cases{{stock::round_sphere(), 1.0}, {stock::hyperbolic_halfplane(), -1.0},
                                {stock::euclidean(2), 0.0}};
  for (const auto& c : cases) {
    for (int eps : {1, -1}) {
      const MetricField cone = build_cone(ConeSpec{eps, c.base});
      for (const auto& q : cone.chart().samples(10, 8)) {
        const Riemann R = riemann(cone, q);
        const Matrix gb = metric_eval(c.base, q.tail(2));
        const double r2 = q[0] * q[0];
        // lowered cone tensor on base slots equals r^2 (kappa - eps) (g_ac g_bd - g_ad g_bc) r^2
        for (std::size_t a = 0; a < 2; ++a)
          for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t cc = 0; cc < 2; ++cc)
              for (std::size_t d = 0; d < 2; ++d) {
                const auto A = static_cast<Eigen::Index>(a), B = static_cast<Eigen::Index>(b);
                const auto C = static_cast<Eigen::Index>(cc), D = static_cast<Eigen::Index>(d);
                const double model = (c.kappa - eps) * r2 * (gb(A, C) * gb(B, D) - gb(A, D) * gb(B, C));
                CHECK(std::abs(R.low(a + 1, b + 1, cc + 1, d + 1) - model) < 1e-5 * std::max(1.0, std::abs(model)));
              }
      }
    }
  }
}

TEST_CASE("closed_form_vs_integrator examples") {
  const ConeSpec spec{1, stock::circle()};
  Vector X(1);
  X << 1.0;
  ClosedFormComparison c = closed_form_vs_integrator(spec, 1.0, pt({0.0}), 0.0, X);
  CHECK(c.closed_form.T == kInf);
  CHECK(c.numeric.verdict == GeodesicVerdict::ReachedHorizon);
  CHECK(c.compared == 100);
  CHECK(c.max_deviation < 1e-6);

  X << 0.0;
  c = closed_form_vs_integrator(spec, 1.0, pt({0.0}), -0.5, X);
  CHECK(c.closed_form.T == doctest::Approx(2.0));
  REQUIRE(c.numeric.escape_time_estimate.has_value());
  CHECK(*c.numeric.escape_time_estimate == doctest::Approx(2.0).epsilon(0.01));
  CHECK(c.max_deviation < 1e-6);

  c = closed_form_vs_integrator(spec, 1.0, pt({0.0}), 0.7, X);
  CHECK(c.max_deviation < 1e-9);
}
