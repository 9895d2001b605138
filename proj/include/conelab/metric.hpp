#pragma once

#include <optional>
#include <span>
#include <vector>

#include "conelab/chart.hpp"
#include "conelab/chart_function.hpp"

namespace conelab {

enum class DerivativeMode { Dual, FiniteDifference };

// Counts of negative and positive eigenvalues.
struct Signature {
  int negative = 0;
  int positive = 0;
  friend bool operator==(const Signature&, const Signature&) = default;
  bool definite() const { return negative == 0 || positive == 0; }
};

Signature signature_of(const Matrix& g);

inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kDegeneracyTol = 1e-10;

// A symmetric bilinear form field on one chart. Components are stored row-major
// (n*n outputs) in a ChartFunction so they evaluate on doubles and dual numbers.
class MetricField {
 public:
  MetricField() = default;
  MetricField(CoordinateChart chart, ChartFunction components, std::optional<Signature> hint = std::nullopt,
              DerivativeMode mode = DerivativeMode::Dual);

  // f(std::span<const T>) -> std::vector<T> of n*n row-major entries.
  template <class F>
  static MetricField from_generic(CoordinateChart chart, F f, std::optional<Signature> hint = std::nullopt) {
    const std::size_t n = chart.dim();
    return MetricField(std::move(chart), ChartFunction(n, n * n, f), hint);
  }

  const CoordinateChart& chart() const { return chart_; }
  std::size_t dim() const { return chart_.dim(); }
  const ChartFunction& components() const { return components_; }
  DerivativeMode mode() const { return mode_; }
  const std::optional<Signature>& signature_hint() const { return hint_; }

  MetricField with_mode(DerivativeMode mode) const;
  MetricField with_chart(CoordinateChart chart) const;

  // No domain or degeneracy checks.
  Matrix raw(const Point& p) const;

 private:
  CoordinateChart chart_;
  ChartFunction components_;
  std::optional<Signature> hint_;
  DerivativeMode mode_ = DerivativeMode::Dual;
};

// Checked evaluation: OutOfDomain, DegenerateMetric, InvalidArgument (asymmetric).
Matrix metric_eval(const MetricField& field, const Point& p);

// Metric with its first (and optionally second) partial derivatives at a point.
struct MetricJet {
  Matrix g;
  Matrix ginv;
  std::vector<Matrix> dg;                 // dg[k] = d_k g
  std::vector<std::vector<Matrix>> ddg;   // ddg[k][l] = d_k d_l g (order 2 only)
};

MetricJet metric_jet(const MetricField& field, const Point& p, int order, DerivativeMode mode);

// Gamma^k_{ij}.
class Christoffel {
 public:
  explicit Christoffel(std::size_t n = 0) : n_(n), data_(n * n * n, 0.0) {}

  std::size_t dim() const { return n_; }
  double& operator()(std::size_t k, std::size_t i, std::size_t j) { return data_[(k * n_ + i) * n_ + j]; }
  double operator()(std::size_t k, std::size_t i, std::size_t j) const { return data_[(k * n_ + i) * n_ + j]; }

  // Gamma(u, w)^k = Gamma^k_{ij} u^i w^j
  Vector contract(const Vector& u, const Vector& w) const;
  // M^k_j = Gamma^k_{ij} u^i, so that D/dt W = dW/dt + M W along a curve with velocity u.
  Matrix along(const Vector& u) const;

  double max_abs() const;
  double max_abs_diff(const Christoffel& other) const;

 private:
  std::size_t n_;
  std::vector<double> data_;
};

Christoffel christoffel(const MetricField& field, const Point& p, std::optional<DerivativeMode> mode = std::nullopt);
Christoffel christoffel_from_jet(const MetricJet& jet);

// R^a_{bcd} with R(d_c, d_d) d_b = R^a_{bcd} d_a and R_{abcd} = g_{ae} R^e_{bcd}.
class Riemann {
 public:
  explicit Riemann(std::size_t n = 0) : n_(n), up_(n * n * n * n, 0.0), low_(n * n * n * n, 0.0) {}

  std::size_t dim() const { return n_; }
  double up(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const { return up_[idx(a, b, c, d)]; }
  double low(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const { return low_[idx(a, b, c, d)]; }
  const Matrix& metric() const { return g_; }

  // (R(X,Y))^a_b = R^a_{bcd} X^c Y^d
  Matrix endomorphism(const Vector& x, const Vector& y) const;
  // g(R(X,Y)Y, X) / (g(X,X)g(Y,Y) - g(X,Y)^2)
  double sectional(const Vector& x, const Vector& y) const;

  double max_abs_up() const;
  double max_abs_low() const;
  // Largest violation of R_abcd = -R_bacd = -R_abdc = R_cdab.
  double pair_symmetry_residual() const;
  // Largest |R_abcd + R_acdb + R_adbc|.
  double bianchi_residual() const;

  friend Riemann riemann_from_jet(const MetricJet& jet);

 private:
  std::size_t idx(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const {
    return ((a * n_ + b) * n_ + c) * n_ + d;
  }
  std::size_t n_;
  std::vector<double> up_;
  std::vector<double> low_;
  Matrix g_;
};

Riemann riemann(const MetricField& field, const Point& p, std::optional<DerivativeMode> mode = std::nullopt);
Riemann riemann_from_jet(const MetricJet& jet);

// Least-squares fit of R_abcd = k (g_ac g_bd - g_ad g_bc) over the samples.
// Returns k iff the model residual is below tol at every sample.
struct ConstantCurvatureFit {
  double kappa = 0.0;
  double max_residual = 0.0;
};
ConstantCurvatureFit fit_constant_curvature(const MetricField& field, std::span<const Point> samples);
std::optional<double> constant_curvature_estimate(const MetricField& field, std::span<const Point> samples,
                                                  double tol = 1e-5);

// Covariant derivative of a vector field: result(i, j) = (nabla_{d_j} V)^i.
Matrix covariant_derivative(const MetricField& field, const ChartFunction& vector_field, const Point& p);

double inner(const Matrix& g, const Vector& u, const Vector& w);

}  // namespace conelab
