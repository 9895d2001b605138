#include "conelab/stock.hpp"

#include <numbers>

#include "conelab/cone.hpp"
#include "conelab/errors.hpp"

namespace conelab::stock {

MetricField euclidean(std::size_t n) {
  static const std::vector<std::string> defaults{"x", "y", "z", "w"};
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back(i < defaults.size() ? defaults[i] : "x" + std::to_string(i));
  CoordinateChart chart(names, std::vector<Interval>(n));
  return MetricField(chart, ChartFunction(n, n * n, [n](auto x) {
                       using T = scalar_of<decltype(x)>;
                       std::vector<T> g(n * n, T(0.0));
                       for (std::size_t i = 0; i < n; ++i) g[i * n + i] = T(1.0);
                       return g;
                     }),
                     Signature{0, static_cast<int>(n)});
}

MetricField minkowski2() {
  CoordinateChart chart({"x", "y"}, {Interval{}, Interval{}});
  return MetricField::from_generic(
      chart,
      [](auto x) {
        using T = scalar_of<decltype(x)>;
        return std::vector<T>{T(-1.0), T(0.0), T(0.0), T(1.0)};
      },
      Signature{1, 1});
}

MetricField circle() {
  CoordinateChart chart({"theta"}, {Interval{}}, {Interval{-std::numbers::pi, std::numbers::pi}});
  return MetricField::from_generic(
      chart,
      [](auto x) {
        using T = scalar_of<decltype(x)>;
        return std::vector<T>{T(1.0)};
      },
      Signature{0, 1});
}

MetricField round_sphere(std::vector<std::string> names) {
  CoordinateChart chart(std::move(names), {Interval{}, Interval{}}, {Interval{-1.5, 1.5}, Interval{-1.5, 1.5}});
  return MetricField::from_generic(
      chart,
      [](auto x) {
        using T = scalar_of<decltype(x)>;
        const T d = 1.0 + x[0] * x[0] + x[1] * x[1];
        const T c = 4.0 / (d * d);
        return std::vector<T>{c, T(0.0), T(0.0), c};
      },
      Signature{0, 2});
}

MetricField hyperbolic_halfplane(std::vector<std::string> names) {
  CoordinateChart chart(std::move(names), {Interval{}, Interval{0.0, kInf}}, {Interval{-1.5, 1.5}, Interval{0.4, 2.5}});
  return MetricField::from_generic(
      chart,
      [](auto x) {
        using T = scalar_of<decltype(x)>;
        const T c = 1.0 / (x[1] * x[1]);
        return std::vector<T>{c, T(0.0), T(0.0), c};
      },
      Signature{0, 2});
}

MetricField flat_torus(std::vector<std::string> names) {
  const double tau = 2.0 * std::numbers::pi;
  CoordinateChart chart(std::move(names), {Interval{0.0, tau}, Interval{0.0, tau}});
  return MetricField::from_generic(
      chart,
      [](auto x) {
        using T = scalar_of<decltype(x)>;
        return std::vector<T>{T(1.0), T(0.0), T(0.0), T(1.0)};
      },
      Signature{0, 2});
}

WarpedSpec horosphere_spec(const MetricField& gN) {
  WarpedSpec spec;
  spec.epsilon = -1;
  spec.warp = warp_custom("exp(-s)", scalar_function(1, [](auto x) { return exp(-x[0]); }));
  spec.base = gN;
  spec.s_sampling = Interval{-1.0, 1.0};
  return spec;
}

MetricField horosphere(const MetricField& gN) { return build_warped(horosphere_spec(gN)); }

WarpedSpec cosh_spec(const MetricField& gN) {
  WarpedSpec spec;
  spec.epsilon = -1;
  spec.warp = warp_cosh();
  spec.base = gN;
  spec.s_sampling = Interval{-1.0, 1.0};
  return spec;
}

MetricField cosh_warped(const MetricField& gN) { return build_warped(cosh_spec(gN)); }

MetricField de_sitter2() {
  WarpedSpec spec;
  spec.epsilon = 1;
  spec.warp = warp_cosh();
  spec.base = circle();
  spec.s_sampling = Interval{-1.0, 1.0};
  return build_warped(spec);
}

MetricField product(const MetricField& g1, const MetricField& g2) {
  const std::size_t n1 = g1.dim();
  const std::size_t n2 = g2.dim();
  const std::size_t m = n1 + n2;
  const ChartFunction a = g1.components();
  const ChartFunction b = g2.components();
  std::optional<Signature> hint;
  if (g1.signature_hint() && g2.signature_hint()) {
    hint = Signature{g1.signature_hint()->negative + g2.signature_hint()->negative,
                     g1.signature_hint()->positive + g2.signature_hint()->positive};
  }
  ChartFunction comps(m, m * m, [a, b, n1, n2, m](auto x) {
    using T = scalar_of<decltype(x)>;
    const std::vector<T> ga = a(x.subspan(0, n1));
    const std::vector<T> gb = b(x.subspan(n1, n2));
    std::vector<T> out(m * m, T(0.0));
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t j = 0; j < n1; ++j) out[i * m + j] = ga[i * n1 + j];
    for (std::size_t i = 0; i < n2; ++i)
      for (std::size_t j = 0; j < n2; ++j) out[(n1 + i) * m + n1 + j] = gb[i * n2 + j];
    return out;
  });
  return MetricField(g1.chart().concat(g2.chart()), std::move(comps), hint, g1.mode());
}

std::vector<Named> cross_mode_suite() {
  std::vector<Named> out;
  out.push_back({"round_sphere", round_sphere()});
  out.push_back({"hyperbolic_halfplane", hyperbolic_halfplane()});
  out.push_back({"cone_over_sphere", build_cone(ConeSpec{1, round_sphere()})});
  out.push_back({"horosphere_over_sphere", horosphere(round_sphere())});
  out.push_back({"cosh_over_sphere", cosh_warped(round_sphere())});
  out.push_back({"de_sitter2", de_sitter2()});
  return out;
}

}  // namespace conelab::stock
