#include <cmath>
#include <numbers>

#include "conelab/cone.hpp"
#include "conelab/errors.hpp"
#include "conelab/geodesic.hpp"
#include "conelab/metric.hpp"
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

MetricField circle_cone(int eps) { return build_cone(ConeSpec{eps, stock::circle()}); }

// Koszul formula for eps dr^2 + r^2 dtheta^2 done by hand:
// Gamma^theta_{r theta} = 1/r, Gamma^r_{theta theta} = -eps r, rest zero.
double circle_cone_gamma(int eps, double r, std::size_t k, std::size_t i, std::size_t j) {
  if (k == 1 && ((i == 0 && j == 1) || (i == 1 && j == 0))) return 1.0 / r;
  if (k == 0 && i == 1 && j == 1) return -eps * r;
  return 0.0;
}

}  // namespace

TEST_CASE("metric_eval on cone and warped examples") {
  const MetricField cone = circle_cone(1);
  Matrix g = metric_eval(cone, pt({2.0, 0.0}));
  CHECK(g(0, 0) == doctest::Approx(1.0));
  CHECK(g(1, 1) == doctest::Approx(4.0));
  CHECK(g(0, 1) == 0.0);
  g = metric_eval(cone, pt({1.0, 0.0}));
  CHECK(g.isApprox(Matrix::Identity(2, 2)));

  WarpedSpec ws;
  ws.epsilon = -1;
  ws.warp = warp_cosh();
  ws.base = stock::euclidean(1);
  g = metric_eval(build_warped(ws), pt({0.0, 0.3}));
  CHECK(g.isApprox(Matrix::Identity(2, 2)));
}

TEST_CASE("metric_eval errors") {
  const MetricField cone = circle_cone(1);
  CHECK_THROWS_AS(metric_eval(cone, pt({-1.0, 0.0})), Error);
  try {
    metric_eval(cone, pt({-1.0, 0.0}));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfDomain);
  }
  // degenerate: diag(1, x^2) at x = 0
  const MetricField deg = MetricField::from_generic(CoordinateChart({"t", "x"}, {Interval{}, Interval{}}), [](auto x) {
    using T = scalar_of<decltype(x)>;
    return std::vector<T>{T(1.0), T(0.0), T(0.0), x[1] * x[1]};
  });
  try {
    metric_eval(deg, pt({0.0, 0.0}));
    FAIL("expected DegenerateMetric");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateMetric);
  }
  const MetricField asym = MetricField::from_generic(CoordinateChart({"t", "x"}, {Interval{}, Interval{}}), [](auto x) {
    using T = scalar_of<decltype(x)>;
    return std::vector<T>{T(1.0), x[0], x[1], T(1.0)};
  });
  try {
    metric_eval(asym, pt({0.1, 0.2}));
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("christoffel of the cone over a circle matches the hand Koszul computation") {
  for (int eps : {1, -1}) {
    const MetricField cone = circle_cone(eps);
    for (double r : {0.5, 1.0, 2.0, 3.7}) {
      const Christoffel G = christoffel(cone, pt({r, 0.3}));
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t i = 0; i < 2; ++i)
          for (std::size_t j = 0; j < 2; ++j) CHECK(G(k, i, j) == doctest::Approx(circle_cone_gamma(eps, r, k, i, j)));
    }
  }
  const Christoffel G = christoffel(circle_cone(1), pt({2.0, 0.0}));
  CHECK(G(1, 0, 1) == doctest::Approx(0.5));
  CHECK(G(0, 1, 1) == doctest::Approx(-2.0));
}

TEST_CASE("flat plane has vanishing connection and curvature") {
  const MetricField e = stock::euclidean(2);
  CHECK(christoffel(e, pt({0.3, -0.7})).max_abs() == 0.0);
  CHECK(riemann(e, pt({0.3, -0.7})).max_abs_low() == 0.0);
}

TEST_CASE("cone over the round sphere is flat") {
  const MetricField cone = build_cone(ConeSpec{1, stock::round_sphere()});
  for (const auto& p : cone.chart().samples(30, 7)) CHECK(riemann(cone, p).max_abs_up() < 1e-6);
}

TEST_CASE("cone over the hyperbolic plane: R_1212 = r^2 (kappa - eps)") {
  // base point (0, 1) of the half plane: coordinates orthonormal there
  const MetricField cone = build_cone(ConeSpec{1, stock::hyperbolic_halfplane()});
  for (double r : {0.5, 1.0, 2.0}) {
    const Riemann R = riemann(cone, pt({r, 0.0, 1.0}));
    CHECK(R.low(1, 2, 1, 2) == doctest::Approx(-2.0 * r * r).epsilon(1e-9));
  }
  const MetricField tl = build_cone(ConeSpec{-1, stock::hyperbolic_halfplane()});
  for (const auto& p : tl.chart().samples(20, 3)) CHECK(riemann(tl, p).max_abs_up() < 1e-6);
}

TEST_CASE("derivative modes agree on Christoffels and curvature") {
  for (const auto& [name, field] : stock::cross_mode_suite()) {
    CAPTURE(name);
    for (const auto& p : field.chart().samples(100, 11)) {
      const double dG = christoffel(field, p, DerivativeMode::Dual)
                            .max_abs_diff(christoffel(field, p, DerivativeMode::FiniteDifference));
      CHECK(dG < 1e-5);
    }
    for (const auto& p : field.chart().samples(20, 12)) {
      const Riemann a = riemann(field, p, DerivativeMode::Dual);
      const Riemann b = riemann(field, p, DerivativeMode::FiniteDifference);
      double d = 0.0;
      const auto n = field.dim();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t k = 0; k < n; ++k)
            for (std::size_t l = 0; l < n; ++l) d = std::max(d, std::abs(a.up(i, j, k, l) - b.up(i, j, k, l)));
      CHECK(d < 1e-5);
    }
  }
}

TEST_CASE("finite-difference stencil leaving the domain is reported") {
  const MetricField cone = circle_cone(1).with_mode(DerivativeMode::FiniteDifference);
  try {
    riemann(cone, pt({5e-5, 0.0}));
    FAIL("expected DerivativeFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DerivativeFailure);
  }
}

TEST_CASE("curvature index symmetries and first Bianchi identity") {
  for (const auto& [name, field] : stock::cross_mode_suite()) {
    CAPTURE(name);
    for (const auto& p : field.chart().samples(25, 5)) {
      const Riemann R = riemann(field, p);
      CHECK(R.pair_symmetry_residual() < 1e-6);
      CHECK(R.bianchi_residual() < 1e-6);
    }
  }
}

TEST_CASE("constant curvature estimate") {
  const auto flat_line = stock::euclidean(1);
  const MetricField horo = stock::horosphere(flat_line);
  auto k = constant_curvature_estimate(horo, horo.chart().samples(12, 1));
  REQUIRE(k.has_value());
  CHECK(*k == doctest::Approx(-1.0).epsilon(1e-9));

  const MetricField e = stock::euclidean(2);
  k = constant_curvature_estimate(e, e.chart().samples(10, 1));
  REQUIRE(k.has_value());
  CHECK(*k == 0.0);

  const MetricField ex33 = stock::cosh_warped(stock::round_sphere());
  CHECK_FALSE(constant_curvature_estimate(ex33, ex33.chart().samples(20, 1)).has_value());

  CHECK_THROWS_AS(constant_curvature_estimate(e, e.chart().samples(5, 1)), Error);
}

TEST_CASE("sectional curvature of the sphere is one") {
  const MetricField s2 = stock::round_sphere();
  const Riemann R = riemann(s2, pt({0.4, -0.2}));
  Vector x(2), y(2);
  x << 1.0, 0.3;
  y << -0.2, 0.7;
  CHECK(R.sectional(x, y) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("geodesic_integrate on the cone over a circle") {
  const MetricField cone = circle_cone(1);
  Vector v(2);

  v << -1.0, 0.0;
  GeodesicResult r = geodesic_integrate(cone, pt({1.0, 0.0}), v, 10.0);
  CHECK(r.verdict == GeodesicVerdict::LeftDomain);
  REQUIRE(r.escape_time_estimate.has_value());
  CHECK(*r.escape_time_estimate == doctest::Approx(1.0).epsilon(0.01));

  v << 1.0, 0.0;
  GeodesicOptions o;
  o.output_times = {0.5, 1.0, 2.5, 7.0};
  r = geodesic_integrate(cone, pt({1.0, 0.0}), v, 10.0, 1e-9, o);
  CHECK(r.verdict == GeodesicVerdict::ReachedHorizon);
  for (std::size_t k = 0; k < r.times.size(); ++k) CHECK(r.positions[k][0] == doctest::Approx(r.times[k] + 1.0).epsilon(1e-12));
  CHECK(std::find(r.times.begin(), r.times.end(), 2.5) != r.times.end());

  // c eps = -1, L = 1, r = 1, a = 0: T = r / (L r - a) = 1
  const MetricField tl = circle_cone(-1);
  v << 0.0, 1.0;
  r = geodesic_integrate(tl, pt({1.0, 0.0}), v, 10.0);
  CHECK(r.verdict != GeodesicVerdict::ReachedHorizon);
  REQUIRE(r.escape_time_estimate.has_value());
  const ConeGeodesic cf = closed_form_geodesic(1.0, 0.0, -1, 1.0, 1);  // c = -1 against eps = 1 gives c eps = -1
  CHECK(cf.T == doctest::Approx(1.0));
  CHECK(*r.escape_time_estimate == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("geodesic speed is conserved") {
  Rng rng(99);
  for (const auto& [name, field] : stock::cross_mode_suite()) {
    CAPTURE(name);
    for (int k = 0; k < 5; ++k) {
      const Point p = field.chart().sample(rng);
      Vector v(static_cast<Eigen::Index>(field.dim()));
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-0.5, 0.5);
      const GeodesicResult r = geodesic_integrate(field, p, v, 3.0, 1e-9);
      CHECK(r.speed_drift < 10 * r.tol);
    }
  }
}

TEST_CASE("parallel transport around loops") {
  const MetricField e = stock::euclidean(2);
  const TransportResult flat = parallel_transport(e, Curve::rectangle(pt({0.0, 0.0}), 0, 1, 0.7, -1.3), Matrix::Identity(2, 2));
  CHECK((flat.frame - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);

  // sphere octant: pole -> equator along a meridian, a quarter of the equator, back to the pole
  const MetricField s2 = stock::round_sphere();
  Curve tri = Curve::polyline({pt({0.0, 0.0}), pt({1.0, 0.0})});
  tri.segments.emplace_back(1, 2, [](auto t) {
    using T = scalar_of<decltype(t)>;
    const T a = (std::numbers::pi / 2) * t[0];
    return std::vector<T>{cos(a), sin(a)};
  });
  tri.append(Curve::polyline({pt({0.0, 1.0}), pt({0.0, 0.0})}));
  const TransportResult hol = parallel_transport(s2, tri, Matrix::Identity(2, 2));
  const double angle = std::atan2(hol.frame(1, 0), hol.frame(0, 0));
  // oracle: rotation angle equals the enclosed area pi/2
  CHECK(std::abs(std::abs(angle) - std::numbers::pi / 2) < 1e-4);
  CHECK(hol.pairing_residual < 1e-7);

  Rng rng(5);
  for (int k = 0; k < 10; ++k) {
    const Point p = s2.chart().sample(rng);
    const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
    Matrix f = Matrix::Random(2, 2);
    const TransportResult t = parallel_transport(s2, Curve::rectangle(p, 0, 1, a, b), f);
    CHECK(t.pairing_residual < 1e-7);
  }
}

TEST_CASE("transport along a path leaving the chart fails") {
  const MetricField h = stock::hyperbolic_halfplane();
  try {
    parallel_transport(h, Curve::polyline({pt({0.0, 1.0}), pt({0.0, -1.0})}), Matrix::Identity(2, 2));
    FAIL("expected OutOfDomain");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfDomain);
  }
}

TEST_CASE("frame transported along a cone geodesic: F(t) = rho(t) d_r - t gamma'(t) is parallel") {
  const MetricField cone = build_cone(ConeSpec{1, stock::round_sphere()});
  Vector v(3);
  v << 0.3, 0.4, -0.2;
  GeodesicOptions o;
  o.frame = Matrix::Identity(3, 3);
  const Point p = pt({1.2, 0.1, 0.2});
  const GeodesicResult r = geodesic_integrate(cone, p, v, 2.0, 1e-11, o);
  REQUIRE(r.verdict == GeodesicVerdict::ReachedHorizon);
  // F(0) = r0 d_r; its transport is frame * F(0)
  Vector F0 = Vector::Zero(3);
  F0[0] = p[0];
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    Vector F = -r.times[k] * r.velocities[k];
    F[0] += r.positions[k][0];
    CHECK((r.frames[k] * F0 - F).cwiseAbs().maxCoeff() < 1e-7);
  }
}
