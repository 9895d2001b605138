#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "conelab/metric.hpp"

namespace conelab {

// Data for ds^2 + e^{-2s} g0(u) + 2 du eta on coordinates (x^1..x^n0, s, u, t).
//   f1:  u -> f1(u), nowhere zero
//   f2:  (x, s, u) -> f2
//   df2: (x, s, u) -> (d_1 f2, ..., d_n0 f2)
//   g0:  (x, u) -> n0 x n0 row-major
struct NullPlaneInputs {
  CoordinateChart m0;                // chart of M0 (coordinates x^i)
  Interval u_range{-kInf, kInf};
  Interval u_sampling{-1.0, 1.0};
  ChartFunction f1;
  ChartFunction f2;
  ChartFunction df2;
  ChartFunction g0;
  std::vector<double> C;             // integration constants of h_i (default 0)
};

// Builds f2 and its x-partials from one generic callable f2(std::span<const T>) -> T
// over (x, s, u).
template <class F>
std::pair<ChartFunction, ChartFunction> make_f2(std::size_t n0, F f) {
  const std::size_t m = n0 + 2;
  ChartFunction value = scalar_function(m, f);
  ChartFunction partials(m, n0, [f, m, n0](auto x) {
    using T = scalar_of<decltype(x)>;
    std::vector<T> out(n0, T(0.0));
    std::vector<Dual<T>> y(m);
    for (std::size_t k = 0; k < n0; ++k) {
      for (std::size_t i = 0; i < m; ++i) y[i] = Dual<T>(x[i], T(i == k ? 1.0 : 0.0));
      out[k] = f(std::span<const Dual<T>>(y)).d;
    }
    return out;
  });
  return {std::move(value), std::move(partials)};
}

struct NullPlaneMetricSpec {
  NullPlaneInputs inputs;
  std::size_t n0 = 0;
  ChartFunction eta;   // components (eta_1..eta_n0, eta_s, eta_u, eta_t) on the full chart
  ChartFunction h;     // (x, s, u) -> (h_1..h_n0)
  std::size_t grid = 20;

  std::size_t dim() const { return n0 + 3; }
  std::size_t s_index() const { return n0; }
  std::size_t u_index() const { return n0 + 1; }
  std::size_t t_index() const { return n0 + 2; }
};

struct GeneratedNullPlane {
  MetricField metric;
  NullPlaneMetricSpec spec;
};

// Chart (x, s, u, t) with s, t sampled on (-1, 1).
CoordinateChart nullplane_chart(const NullPlaneInputs& inputs);

// ds^2 + e^{-2s} g0(u) + 2 du eta for any eta with components (eta_1..eta_n0, eta_s, eta_u, eta_t).
MetricField nullplane_metric_from_eta(const NullPlaneInputs& inputs, const ChartFunction& eta);

// eta_t = f1, eta_s = 2 t f1 + f2, eta(d_i) = h_i with
// h_i = e^{-2s} (C_i + int_0^s e^{2 sigma} d_i f2 d sigma), eta_u = 0.
// F1HasZero if f1 vanishes on the sampled u window; ODESolveFailure on a non-finite h.
GeneratedNullPlane generate_nullplane_metric(const NullPlaneInputs& inputs, std::size_t grid = 20);

// max |d_s h_i + 2 h_i - d_i f2| over the grid^3 box of (x, s, u) sampling windows.
double h_ode_residual(const NullPlaneMetricSpec& spec);

struct EtaResiduals {
  // d_t eta_t, d_s eta_t, X eta_t, d_t eta(X), d_t eta_s - 2 eta_t, d_s eta(X) - X eta_s + 2 eta(X)
  std::array<double, 6> equations{};
  double max() const;
};

// Central differences of the eta components at samples of the full chart.
EtaResiduals eta_system_residuals(const ChartFunction& eta, std::size_t n0, std::span<const Point> samples);
EtaResiduals eta_system_residuals(const NullPlaneMetricSpec& spec, std::size_t n_samples = 50,
                                  std::uint64_t seed = kDefaultSeed);

struct VZPair {
  ChartFunction V;
  ChartFunction Z;
};

// Coordinate fields d_t and d_s of the generated chart.
VZPair coordinate_pair(const NullPlaneMetricSpec& spec);

struct VZResiduals {
  double algebraic = 0.0;   // g(V,V), g(Z,Z) - 1, g(V,Z)
  double nabla_V = 0.0;     // nabla_X V - g(X,V) Z modulo V
  double nabla_Z = 0.0;     // nabla_X Z + X - g(X,Z) Z modulo V
  std::vector<Matrix> alpha;  // per sample: 1 x n, alpha(d_j)
  std::vector<Matrix> beta;
};

// PairNotAdmissible if the algebraic conditions fail by more than 1e-8.
VZResiduals vz_residuals(const MetricField& field, const VZPair& pair, std::span<const Point> samples);

// Largest |g([E_a, E_b], V)| over frames E_a of V^perp built by projecting coordinate fields.
double v_perp_integrability(const MetricField& field, const ChartFunction& V, std::span<const Point> samples);

}  // namespace conelab
