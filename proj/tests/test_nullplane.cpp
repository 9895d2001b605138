#include <cmath>

#include "conelab/errors.hpp"
#include "conelab/nullplane.hpp"
#include "doctest.h"

using namespace conelab;

namespace {

Point pt(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

ChartFunction constant_1d(double c) {
  return scalar_function(1, [c](auto x) { return 0.0 * x[0] + c; });
}

// f1 = 1, f2 = x e^{-2s}, g0 = dx^2.
NullPlaneInputs simple_inputs() {
  NullPlaneInputs in;
  in.m0 = CoordinateChart({"x"}, {Interval{}});
  in.f1 = constant_1d(1.0);
  auto [f2, df2] = make_f2(1, [](auto y) { return y[0] * exp(-2.0 * y[1]); });
  in.f2 = f2;
  in.df2 = df2;
  in.g0 = ChartFunction(2, 1, [](auto y) {
    using T = scalar_of<decltype(y)>;
    return std::vector<T>{T(1.0)};
  });
  return in;
}

// Two-dimensional M0 with u-dependent g0 and a generic f2.
NullPlaneInputs generic_inputs(double a, double b) {
  NullPlaneInputs in;
  in.m0 = CoordinateChart({"x", "y"}, {Interval{}, Interval{}});
  in.f1 = scalar_function(1, [a](auto x) { return 2.0 + a * sin(x[0]); });
  auto [f2, df2] = make_f2(2, [b](auto y) { return y[0] * y[1] * sin(y[2]) + b * y[3] * cos(y[0]) + exp(y[2]) * y[1]; });
  in.f2 = f2;
  in.df2 = df2;
  in.g0 = ChartFunction(3, 4, [](auto y) {
    using T = scalar_of<decltype(y)>;
    return std::vector<T>{1.0 + y[2] * y[2], T(0.1) * y[0], T(0.1) * y[0], T(1.0)};
  });
  return in;
}

}  // namespace

TEST_CASE("generate_nullplane_metric: closed-form h for f2 = x e^{-2s}") {
  const GeneratedNullPlane gen = generate_nullplane_metric(simple_inputs());
  // h' + 2h = e^{-2s} with h(0) = 0 gives h = s e^{-2s}.
  for (double s : {-1.3, -0.2, 0.0, 0.7, 2.1}) {
    const double h = gen.spec.h.value(pt({0.4, s, 0.3}))(0);
    CHECK(h == doctest::Approx(s * std::exp(-2.0 * s)).epsilon(1e-12));
  }
  CHECK(h_ode_residual(gen.spec) < 1e-8);
  CHECK(eta_system_residuals(gen.spec).max() < 1e-6);
  CHECK(gen.metric.dim() == 4);
  CHECK(gen.metric.chart().names() == std::vector<std::string>{"x", "s", "u", "t"});

  // Exposed integration constant: h = (s + C) e^{-2s}.
  NullPlaneInputs in = simple_inputs();
  in.C = {0.5};
  const GeneratedNullPlane g2 = generate_nullplane_metric(in);
  CHECK(g2.spec.h.value(pt({0.0, 0.3, 0.0}))(0) == doctest::Approx(0.8 * std::exp(-0.6)).epsilon(1e-12));
}

TEST_CASE("generate_nullplane_metric: f2 = 0 and the metric entries") {
  NullPlaneInputs in = simple_inputs();
  auto [f2, df2] = make_f2(1, [](auto y) { return 0.0 * y[0]; });
  in.f2 = f2;
  in.df2 = df2;
  const GeneratedNullPlane gen = generate_nullplane_metric(in);
  const Point p = pt({0.3, 0.4, -0.2, 0.6});
  const Vector eta = gen.spec.eta.value(p);
  CHECK(eta(0) == 0.0);
  CHECK(eta(1) == doctest::Approx(2.0 * 0.6));  // 2 t f1
  CHECK(eta(2) == 0.0);
  CHECK(eta(3) == 1.0);
  const Matrix g = metric_eval(gen.metric, p);
  CHECK(g(0, 0) == doctest::Approx(std::exp(-0.8)));
  CHECK(g(1, 1) == 1.0);
  CHECK(g(2, 3) == 1.0);
  CHECK(g(3, 2) == 1.0);
  CHECK(g(2, 1) == doctest::Approx(1.2));
  CHECK(g(3, 3) == 0.0);
  CHECK(eta_system_residuals(gen.spec).max() < 1e-6);
}

TEST_CASE("generate_nullplane_metric: f1 with a zero") {
  NullPlaneInputs in = simple_inputs();
  in.f1 = scalar_function(1, [](auto x) { return x[0] - 0.25; });
  try {
    generate_nullplane_metric(in);
    FAIL("expected F1HasZero");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::F1HasZero);
  }
}

TEST_CASE("eta_system_residuals: dropping the 2 t f1 term") {
  const NullPlaneInputs in = simple_inputs();
  const GeneratedNullPlane gen = generate_nullplane_metric(in);
  const ChartFunction eta = gen.spec.eta;
  const ChartFunction broken(4, 4, [eta](auto y) {
    auto e = eta(y);
    e[1] = e[1] - 2.0 * y[3];  // f1 = 1
    return e;
  });
  const auto samples = nullplane_chart(in).samples(20, 3);
  const EtaResiduals r = eta_system_residuals(broken, 1, samples);
  CHECK(r.equations[4] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(r.equations[0] < 1e-8);
  CHECK(r.equations[5] < 1e-6);
}

TEST_CASE("vz_residuals: d_t and d_s on generated metrics") {
  const GeneratedNullPlane gen = generate_nullplane_metric(simple_inputs());
  const auto samples = gen.metric.chart().samples(20, 4);
  const VZPair pair = coordinate_pair(gen.spec);
  const VZResiduals r = vz_residuals(gen.metric, pair, samples);
  CHECK(r.algebraic < 1e-12);
  CHECK(r.nabla_V < 1e-5);
  CHECK(r.nabla_Z < 1e-5);
  REQUIRE(r.alpha.size() == samples.size());
  // nabla_{d_s} d_t = d_t, so alpha(d_s) = 1.
  CHECK(r.alpha[0](0, 1) == doctest::Approx(1.0).epsilon(1e-8));

  const ChartFunction Z = pair.Z;
  const VZPair doubled{pair.V, ChartFunction(4, 4, [Z](auto x) {
                         auto z = Z(x);
                         for (auto& c : z) c = 2.0 * c;
                         return z;
                       })};
  try {
    vz_residuals(gen.metric, doubled, samples);
    FAIL("expected PairNotAdmissible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PairNotAdmissible);
  }

  // Break the eta system: eta_s without the 2 t f1 term.
  const NullPlaneInputs in = simple_inputs();
  const ChartFunction eta = gen.spec.eta;
  const ChartFunction broken(4, 4, [eta](auto y) {
    auto e = eta(y);
    e[1] = e[1] - 2.0 * y[3];
    return e;
  });
  const MetricField bad = nullplane_metric_from_eta(in, broken);
  const VZResiduals rb = vz_residuals(bad, pair, samples);
  CHECK(std::max(rb.nabla_V, rb.nabla_Z) > 1e-2);
}

TEST_CASE("property: generic generated metrics satisfy the V, Z system") {
  Rng rng(5);
  for (int trial = 0; trial < 4; ++trial) {
    const double a = rng.uniform(-1.0, 1.0), b = rng.uniform(-1.0, 1.0);
    NullPlaneInputs in = generic_inputs(a, b);
    in.C = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const GeneratedNullPlane gen = generate_nullplane_metric(in, 6);
    CHECK(h_ode_residual(gen.spec) < 1e-8);
    CHECK(eta_system_residuals(gen.spec, 30, 10 + trial).max() < 1e-6);
    const auto samples = gen.metric.chart().samples(15, 20 + trial);
    const VZPair pair = coordinate_pair(gen.spec);
    const VZResiduals r = vz_residuals(gen.metric, pair, samples);
    CHECK(r.nabla_V < 1e-5);
    CHECK(r.nabla_Z < 1e-5);
    CHECK(v_perp_integrability(gen.metric, pair.V, samples) < 1e-5);
  }
}

TEST_CASE("v_perp_integrability detects a non-integrable plane field") {
  // On R^3 with the Euclidean metric, V = d_z + x d_y has V^perp containing d_x and d_y - x d_z:
  // their bracket is -d_z, with g(-d_z, V) = -1.
  const MetricField e = MetricField::from_generic(CoordinateChart({"x", "y", "z"}, {Interval{}, Interval{}, Interval{}}),
                                                  [](auto x) {
                                                    using T = scalar_of<decltype(x)>;
                                                    std::vector<T> g(9, T(0.0));
                                                    g[0] = g[4] = g[8] = T(1.0);
                                                    return g;
                                                  });
  const ChartFunction V(3, 3, [](auto x) {
    using T = scalar_of<decltype(x)>;
    return std::vector<T>{T(0.0), x[0], T(1.0)};
  });
  const auto samples = e.chart().samples(5, 1);
  CHECK(v_perp_integrability(e, V, samples) > 0.1);
}
