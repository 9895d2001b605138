#include <cmath>

#include "conelab/cone.hpp"
#include "conelab/errors.hpp"
#include "conelab/geodesic.hpp"
#include "conelab/split_fields.hpp"
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

// Cone coordinates (r, s, x, y) over -eps ds^2 + f(s)^2 (dx^2 + dy^2).
ConeSpec horosphere_cone() { return ConeSpec{-1, stock::horosphere(stock::flat_torus())}; }
ConeSpec cosh_cone() { return ConeSpec{-1, stock::cosh_warped(stock::flat_torus())}; }

ChartFunction null_field() {
  return ChartFunction(4, 4, [](auto x) {
    using T = scalar_of<decltype(x)>;
    const T e = exp(-x[1]);
    return std::vector<T>{e, e / x[0], T(0.0), T(0.0)};
  });
}

ChartFunction spacelike_field() {
  return ChartFunction(4, 4, [](auto x) {
    using T = scalar_of<decltype(x)>;
    return std::vector<T>{-sinh(x[1]), cosh(x[1]) / x[0], T(0.0), T(0.0)};
  });
}

Potential horosphere_u() { return make_potential(3, [](auto x) { return -exp(-x[0]); }); }
Potential cosh_u() { return make_potential(3, [](auto x) { return sinh(x[0]); }); }

// Constant vector c of R^{1,2} read on the unit hyperboloid (half-plane chart)
// and on de Sitter space (tau, theta): u = <c, position>.
Potential hyperboloid_u(double c0, double c1, double c2) {
  return make_potential(2, [=](auto x) {
    const auto q = 1.0 + x[0] * x[0] + x[1] * x[1];
    const auto X0 = q / (2.0 * x[1]);
    const auto X1 = x[0] / x[1];
    const auto X2 = (2.0 - q) / (2.0 * x[1]);
    return -c0 * X0 + c1 * X1 + c2 * X2;
  });
}

Potential de_sitter_u(double c0, double c1, double c2) {
  return make_potential(2, [=](auto x) {
    return -c0 * sinh(x[0]) + cosh(x[0]) * (c1 * cos(x[1]) + c2 * sin(x[1]));
  });
}

// Constant vector of R^3 read on the stereographic sphere.
Potential sphere_u(double c0, double c1, double c2) {
  return make_potential(2, [=](auto x) {
    const auto d = 1.0 + x[0] * x[0] + x[1] * x[1];
    return (c0 * 2.0 * x[0] + c1 * 2.0 * x[1] + c2 * (d - 2.0)) / d;
  });
}

}  // namespace

TEST_CASE("verify_parallel: the two example fields and a perturbation") {
  const MetricField h = build_cone(horosphere_cone());
  const MetricField c = build_cone(cosh_cone());
  CHECK(verify_parallel(h, null_field(), 30, 1) < 1e-8);
  CHECK(verify_parallel(c, spacelike_field(), 30, 2) < 1e-8);

  const ChartFunction V = null_field();
  const ChartFunction bent(4, 4, [V](auto x) {
    auto v = V(x);
    v[1] = v[1] + 0.01;
    return v;
  });
  const double res = verify_parallel(h, bent, 30, 3);
  CHECK(res >= 1e-3);
  CHECK(res <= 1.0);
}

TEST_CASE("potential_identities on the example fields") {
  const ConeSpec hs = horosphere_cone();
  const ConeSpec cs = cosh_cone();
  const auto hsamples = build_cone(hs).chart().samples(25, 4);
  const auto csamples = build_cone(cs).chart().samples(25, 5);

  const PotentialResiduals a = potential_identities(cs, spacelike_field(), csamples);
  CHECK(a.nu == 1.0);
  CHECK(a.vus < 1e-6);
  CHECK(a.nabu < 1e-6);
  CHECK(a.gvv < 1e-6);

  const PotentialResiduals b = potential_identities(hs, null_field(), hsamples);
  CHECK(b.nu == 0.0);
  CHECK(b.vus < 1e-6);
  CHECK(b.nabu < 1e-6);
  CHECK(b.gvv < 1e-6);

  // Direct values: u = sinh s with |grad u|^2 = cosh^2 s, u = -e^{-s} with |grad u|^2 = e^{-2s}.
  const Potential cu = potential_from_field(cs, spacelike_field());
  const Potential hu = potential_from_field(hs, null_field());
  for (double s : {-0.7, 0.0, 0.4}) {
    const Point p = pt({s, 1.0, 2.0});
    CHECK(cu.value(p) == doctest::Approx(std::sinh(s)).epsilon(1e-14));
    CHECK(hu.value(p) == doctest::Approx(-std::exp(-s)).epsilon(1e-14));
    const Vector dc = cu.differential(p);
    const Vector dh = hu.differential(p);
    CHECK(dc(0) * dc(0) == doctest::Approx(std::cosh(s) * std::cosh(s)).epsilon(1e-12));
    CHECK(dh(0) * dh(0) == doctest::Approx(std::exp(-2.0 * s)).epsilon(1e-12));
  }

  const ChartFunction zero(4, 4, [](auto x) {
    using T = scalar_of<decltype(x)>;
    return std::vector<T>(4, T(0.0));
  });
  CHECK_THROWS_AS(potential_identities(hs, zero, hsamples), Error);
  try {
    potential_identities(hs, zero, hsamples);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GradientVanishes);
  }
}

TEST_CASE("classify_parallel_case") {
  CHECK(classify_parallel_case(-1, -1.0) == ParallelCase::Flat);
  CHECK(classify_parallel_case(-1, 1.0) == ParallelCase::Cosh);
  CHECK(classify_parallel_case(1, 0.0) == ParallelCase::Exp);
  CHECK(classify_parallel_case(1, 1.0) == ParallelCase::Flat);
  CHECK(classify_parallel_case(1, -1.0) == ParallelCase::Cosh);
  try {
    classify_parallel_case(1, 0.5);
    FAIL("expected NotNormalised");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotNormalised);
  }
  CHECK_THROWS_AS(classify_parallel_case(2, 0.0), Error);
}

TEST_CASE("analyze_parallel_field normalises and classifies") {
  const ConeSpec cs = cosh_cone();
  const ChartFunction V = spacelike_field();
  const ChartFunction big(4, 4, [V](auto x) {
    auto v = V(x);
    for (auto& c : v) c = 3.0 * c;
    return v;
  });
  const ParallelFieldReport rep = analyze_parallel_field(cs, big, 20, 6);
  CHECK(rep.nu_raw == doctest::Approx(9.0).epsilon(1e-10));
  CHECK(rep.scale == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  CHECK(rep.nu == 1.0);
  CHECK(rep.parallel_case == ParallelCase::Cosh);
  CHECK(rep.accepted);
  CHECK(rep.radial_derivative_of_u < 1e-12);
  CHECK(rep.u.value(pt({0.3, 1.0, 1.0})) == doctest::Approx(std::sinh(0.3)).epsilon(1e-12));

  const ParallelFieldReport nr = analyze_parallel_field(horosphere_cone(), null_field(), 20, 7);
  CHECK(nr.nu == 0.0);
  CHECK(nr.scale == 1.0);
  CHECK(nr.parallel_case == ParallelCase::Exp);
}

TEST_CASE("flatness_certificate") {
  const ConeSpec sphere{1, stock::round_sphere()};
  const ChartFunction Vs = parallel_field_from_potential(sphere, sphere_u(0.0, 0.0, -1.0));
  CHECK(verify_parallel(build_cone(sphere), Vs, 20, 8) < 1e-8);
  CHECK(flatness_certificate(sphere, Vs, 20, 8) < 1e-6);

  const ConeSpec hyp{-1, stock::hyperbolic_halfplane()};
  const ChartFunction Vh = parallel_field_from_potential(hyp, hyperboloid_u(1.0, 0.0, 0.0));
  CHECK(verify_parallel(build_cone(hyp), Vh, 20, 9) < 1e-8);
  CHECK(flatness_certificate(hyp, Vh, 20, 9) < 1e-6);

  try {
    flatness_certificate(horosphere_cone(), null_field(), 10, 10);
    FAIL("expected CaseMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CaseMismatch);
  }
  CHECK_THROWS_AS(potential_identities(sphere, Vs, build_cone(sphere).chart().samples(5, 1)), Error);
}

TEST_CASE("split_reconstruct: cosh branch of the spacelike example") {
  const MetricField base = stock::cosh_warped(stock::flat_torus());
  const SplitReport rep = split_reconstruct(base, cosh_u(), -1, SplitBranch::Cosh);
  CHECK(rep.level_set.size() == 20);
  for (const auto& q : rep.level_set) CHECK(std::abs(q(0)) < 1e-9);  // {u = 0} = {s = 0}
  CHECK(rep.unit_residual < 1e-6);
  CHECK(rep.nabla_residual < 1e-5);
  CHECK(rep.geodesic_residual < 1e-6);
  CHECK(rep.level_residual < 1e-5);
  CHECK(rep.pullback_residual < 1e-5);
  CHECK(rep.lie_residual < 1e-4);
  CHECK_FALSE(rep.M0.has_value());

  // s = arcsinh(sinh s) recovers the input coordinate.
  CHECK(rep.s_field.value(pt({0.6, 1.0, 1.0}))(0) == doctest::Approx(0.6).epsilon(1e-12));
  const Point moved = rep.flow(0.5, pt({0.0, 1.0, 2.0}));
  CHECK(moved(0) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("split_reconstruct: exp-minus branch of the null example") {
  const MetricField base = stock::horosphere(stock::flat_torus());
  const SplitReport rep = split_reconstruct(base, horosphere_u(), -1, SplitBranch::ExpMinus);
  CHECK(rep.unit_residual < 1e-6);
  CHECK(rep.nabla_residual < 1e-5);
  CHECK(rep.pullback_residual < 1e-5);
  CHECK(rep.level_residual < 1e-5);
  CHECK(rep.lie_residual < 1e-4);
  // Definite base: u = -e^{-s} has no zero.
  CHECK_FALSE(rep.M0.has_value());
  // Orientation flip: the reconstructed s is minus the warping coordinate.
  CHECK(rep.s_field.value(pt({0.4, 1.0, 1.0}))(0) == doctest::Approx(-0.4).epsilon(1e-12));
}

TEST_CASE("split_reconstruct: Lorentzian exp branch detects a totally geodesic M0") {
  const MetricField ds = stock::de_sitter2();
  const Potential u = de_sitter_u(1.0, 1.0, 0.0);
  const ConeSpec cone{1, ds};
  CHECK(verify_parallel(build_cone(cone), parallel_field_from_potential(cone, u), 20, 11) < 1e-8);

  SplitOptions opts;
  opts.level_points = 8;
  const SplitReport rep = split_reconstruct(ds, u, 1, SplitBranch::ExpPlus, opts);
  CHECK(rep.unit_residual < 1e-6);
  CHECK(rep.pullback_residual < 1e-5);
  CHECK(rep.lie_residual < 1e-4);
  REQUIRE(rep.M0.has_value());
  CHECK_FALSE(rep.M0->points.empty());
  CHECK(rep.M0->geodesy_residual < 1e-6);
}

TEST_CASE("split_reconstruct: vanishing gradient") {
  const MetricField base = stock::cosh_warped(stock::flat_torus());
  const Potential zero = make_potential(3, [](auto x) { return 0.0 * x[0]; });
  try {
    split_reconstruct(base, zero, -1, SplitBranch::Cosh);
    FAIL("expected GradientVanishes");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GradientVanishes);
  }
}

TEST_CASE("u_profile_along_geodesic") {
  const MetricField hb = stock::horosphere(stock::euclidean(2));
  const Potential hu = horosphere_u();
  {
    const Point p = pt({0.2, 1.0, 1.0});
    const double up = hu.value(p);
    const Vector X = Vector(metric_eval(hb, p).ldlt().solve(hu.differential(p))) / up;
    const ProfileCheck pc = u_profile_along_geodesic(hb, hu, -1, p, X);
    CHECK(pc.max_residual < 1e-5);
    for (std::size_t i = 0; i < pc.times.size(); ++i)
      CHECK(std::abs(pc.f[i] - up * std::exp(pc.times[i])) / std::max(1.0, std::abs(up * std::exp(pc.times[i]))) <
            1e-5);
  }
  {
    // u = 0 and X orthogonal to grad u: f vanishes identically.
    const MetricField cb = stock::cosh_warped(stock::flat_torus());
    const ProfileCheck pc = u_profile_along_geodesic(cb, cosh_u(), -1, pt({0.0, 1.0, 1.0}), pt({0.0, 1.0, 0.0}));
    for (double f : pc.f) CHECK(std::abs(f) < 1e-10);
  }
  {
    // Generic start: compare with f'' = f integrated by classical RK4 on a fine grid.
    const Point p = pt({0.3, 1.0, 2.0});
    Vector X = pt({0.5, 0.4, -0.3});
    X /= std::sqrt(inner(metric_eval(hb, p), X, X));
    const ProfileCheck pc = u_profile_along_geodesic(hb, hu, -1, p, X, 5.0, 10);
    CHECK(pc.max_residual < 1e-5);
    double f = hu.value(p), fd = hu.differential(p).dot(X), t = 0.0;
    const double h = 1e-3;
    std::size_t k = 1;  // times[0] is the start point
    for (int step = 1; step <= 5000; ++step) {
      const double k1f = fd, k1d = f;
      const double k2f = fd + 0.5 * h * k1d, k2d = f + 0.5 * h * k1f;
      const double k3f = fd + 0.5 * h * k2d, k3d = f + 0.5 * h * k2f;
      const double k4f = fd + h * k3d, k4d = f + h * k3f;
      f += h / 6.0 * (k1f + 2 * k2f + 2 * k3f + k4f);
      fd += h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
      t = step * h;
      while (k < pc.times.size() && std::abs(pc.times[k] - t) < 1e-9) {
        CHECK(std::abs(pc.f[k] - f) / std::max(1.0, std::abs(f)) < 1e-5);
        ++k;
      }
    }
    CHECK(k == 11);
  }
  CHECK_THROWS_AS(u_profile_along_geodesic(hb, hu, -1, pt({0.0, 1.0, 1.0}), pt({2.0, 0.0, 0.0})), Error);
}

TEST_CASE("psi_isometry_check") {
  const Point y = psi_map(-1, pt({1.0, 0.0, 0.5, 0.5}));
  CHECK(y(0) == doctest::Approx(1.0));
  CHECK(y(1) == doctest::Approx(-0.5));
  CHECK(y(2) == 0.5);

  Rng rng(12);
  std::vector<Point> samples;
  for (int i = 0; i < 30; ++i)
    samples.push_back(pt({rng.uniform(0.3, 3.0), rng.uniform(-1.5, 1.5), rng.uniform(0.1, 6.0), rng.uniform(0.1, 6.0)}));
  for (int eps : {-1, 1}) {
    const PsiCheck c = psi_isometry_check(eps, stock::flat_torus(), samples);
    CHECK(c.total < 1e-10);
    CHECK(c.null_part < 1e-12);
  }
  const PsiCheck s = psi_isometry_check(-1, stock::round_sphere(), samples);
  CHECK(s.total < 1e-10);
}

namespace {

// D/dt F by central differences of F along a densely output geodesic.
double fd_transport_residual(const MetricField& cone, const Point& p, const Vector& v) {
  GeodesicOptions go;
  go.record_steps = false;
  const double h = 1e-4;
  std::vector<double> centres{0.3, 0.6, 0.9, 1.2};
  for (double c : centres) {
    go.output_times.push_back(c - h);
    go.output_times.push_back(c);
    go.output_times.push_back(c + h);
  }
  const GeodesicResult run = geodesic_integrate(cone, p, v, 1.3, 1e-12, go);
  auto F = [&](std::size_t i) {
    Vector f = -run.times[i] * run.velocities[i];
    f(0) += run.positions[i](0);
    return f;
  };
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < run.times.size(); ++i) {
    if (std::abs(run.times[i] - run.times[i - 1] - h) > 1e-12 || std::abs(run.times[i + 1] - run.times[i] - h) > 1e-12)
      continue;
    const Vector dF = (F(i + 1) - F(i - 1)) / (2.0 * h);
    const Vector D = dF + christoffel(cone, run.positions[i]).contract(run.velocities[i], F(i));
    worst = std::max(worst, D.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace

TEST_CASE("gallot_F_field_check") {
  const MetricField circ = build_cone(ConeSpec{1, stock::circle()});
  const GeodesicResult radial = geodesic_integrate(circ, pt({1.0, 0.3}), pt({0.7, 0.0}), 3.0);
  CHECK(gallot_F_field_check(circ, radial) < 1e-12);

  const MetricField sc = build_cone(ConeSpec{1, stock::round_sphere()});
  const GeodesicResult g1 = geodesic_integrate(sc, pt({1.0, 0.2, -0.3}), pt({0.3, 0.5, 0.4}), 2.0);
  CHECK(gallot_F_field_check(sc, g1) < 1e-6);
  CHECK(fd_transport_residual(sc, pt({1.0, 0.2, -0.3}), pt({0.3, 0.5, 0.4})) < 1e-6);

  const MetricField hc = build_cone(horosphere_cone());
  const GeodesicResult g2 = geodesic_integrate(hc, pt({1.0, 0.1, 1.0, 1.0}), pt({0.2, 0.3, 0.2, -0.1}), 2.0);
  CHECK(gallot_F_field_check(hc, g2) < 1e-6);
  CHECK(fd_transport_residual(hc, pt({1.0, 0.1, 1.0, 1.0}), pt({0.2, 0.3, 0.2, -0.1})) < 1e-6);
}

TEST_CASE("property: potential identities for random constant fields of R^{1,2}") {
  // Timelike and null constant vectors on the de Sitter cone, spacelike and null on the
  // hyperbolic cone: these give the cosh and exp cases.
  Rng rng(13);
  for (int trial = 0; trial < 6; ++trial) {
    const double a = rng.uniform(-1.0, 1.0), b = rng.uniform(-1.0, 1.0);
    const double nrm = std::hypot(a, b);
    const double c1 = a / nrm, c2 = b / nrm;
    const double c0 = trial % 2 == 0 ? 1.0 : rng.uniform(1.2, 2.0);  // null or timelike
    const ConeSpec ds{1, stock::de_sitter2()};
    const Potential u = de_sitter_u(c0, c1, c2);
    const ChartFunction V = parallel_field_from_potential(ds, u);
    const auto samples = build_cone(ds).chart().samples(15, 100 + trial);
    const ParallelFieldReport rep = analyze_parallel_field(ds, V, 15, 200 + trial);
    CHECK(rep.accepted);
    CHECK(rep.parallel_case == (trial % 2 == 0 ? ParallelCase::Exp : ParallelCase::Cosh));
    const PotentialResiduals r = potential_identities(ds, rep.V, samples);
    CHECK(r.vus < 1e-5);
    CHECK(r.nabu < 1e-5);
    CHECK(r.gvv < 1e-5);

    const ConeSpec hy{-1, stock::hyperbolic_halfplane()};
    const double s0 = trial % 2 == 0 ? 1.0 : rng.uniform(0.1, 0.8);  // null or spacelike
    const ChartFunction W = parallel_field_from_potential(hy, hyperboloid_u(s0, c1, c2));
    const ParallelFieldReport hr = analyze_parallel_field(hy, W, 15, 300 + trial);
    CHECK(hr.accepted);
    CHECK(hr.parallel_case == (trial % 2 == 0 ? ParallelCase::Exp : ParallelCase::Cosh));
    const PotentialResiduals q = potential_identities(hy, hr.V, build_cone(hy).chart().samples(15, 400 + trial));
    CHECK(q.vus < 1e-5);
    CHECK(q.nabu < 1e-5);
    CHECK(q.gvv < 1e-5);
  }
}

TEST_CASE("property: level sets move with the flow across seeds") {
  const MetricField base = stock::cosh_warped(stock::flat_torus());
  for (std::uint64_t seed : {21ULL, 22ULL, 23ULL}) {
    SplitOptions opts;
    opts.seed = seed;
    opts.level_points = 6;
    opts.flow_times = 5;
    const SplitReport rep = split_reconstruct(base, cosh_u(), -1, SplitBranch::Cosh, opts);
    CHECK(rep.level_residual < 1e-5);
    CHECK(rep.lie_residual < 1e-4);
    const SplitReport ex = split_reconstruct(stock::horosphere(stock::flat_torus()), horosphere_u(), -1,
                                             SplitBranch::ExpMinus, opts);
    CHECK(ex.level_residual < 1e-5);
    CHECK(ex.lie_residual < 1e-4);
  }
}
