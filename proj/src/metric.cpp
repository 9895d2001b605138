#include "conelab/metric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "conelab/errors.hpp"

namespace conelab {

namespace {

using Idx = Eigen::Index;

Idx ix(std::size_t i) { return static_cast<Idx>(i); }

Matrix to_matrix(const std::vector<double>& flat, std::size_t n) {
  Matrix m(ix(n), ix(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(ix(i), ix(j)) = flat[i * n + j];
  return m;
}

double fd_step(double x) { return 1e-5 * std::max(1.0, std::abs(x)); }
double fd_step2(double x) { return 1e-4 * std::max(1.0, std::abs(x)); }

Matrix raw_checked_stencil(const MetricField& field, const Point& p) {
  if (!field.chart().contains(p)) {
    throw Error(ErrorCode::DerivativeFailure, "finite-difference stencil leaves the chart domain");
  }
  return field.raw(p);
}

}  // namespace

Signature signature_of(const Matrix& g) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
  Signature sig;
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  for (Idx i = 0; i < es.eigenvalues().size(); ++i) {
    double ev = es.eigenvalues()[i];
    if (ev < -1e-14 * scale) ++sig.negative;
    else if (ev > 1e-14 * scale) ++sig.positive;
  }
  return sig;
}

MetricField::MetricField(CoordinateChart chart, ChartFunction components, std::optional<Signature> hint,
                         DerivativeMode mode)
    : chart_(std::move(chart)), components_(std::move(components)), hint_(hint), mode_(mode) {
  if (components_.in_dim() != chart_.dim() || components_.out_dim() != chart_.dim() * chart_.dim()) {
    throw Error(ErrorCode::InvalidArgument, "metric components do not match chart dimension");
  }
}

MetricField MetricField::with_mode(DerivativeMode mode) const {
  MetricField copy = *this;
  copy.mode_ = mode;
  return copy;
}

MetricField MetricField::with_chart(CoordinateChart chart) const {
  if (chart.dim() != dim()) throw Error(ErrorCode::InvalidArgument, "chart dimension mismatch");
  MetricField copy = *this;
  copy.chart_ = std::move(chart);
  return copy;
}

Matrix MetricField::raw(const Point& p) const {
  return to_matrix(components_(as_span(p)), dim());
}

Matrix metric_eval(const MetricField& field, const Point& p) {
  field.chart().require(p);
  Matrix g = field.raw(p);
  const double asym = (g - g.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * std::max(1.0, g.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::InvalidArgument, "metric components are not symmetric");
  }
  if (!(std::abs(g.determinant()) > kDegeneracyTol)) {
    std::ostringstream os;
    os << "|det g| = " << std::abs(g.determinant()) << " <= " << kDegeneracyTol;
    throw Error(ErrorCode::DegenerateMetric, os.str());
  }
  return g;
}

MetricJet metric_jet(const MetricField& field, const Point& p, int order, DerivativeMode mode) {
  const std::size_t n = field.dim();
  MetricJet jet;
  jet.g = metric_eval(field, p);
  jet.ginv = jet.g.inverse();
  jet.dg.assign(n, Matrix::Zero(ix(n), ix(n)));
  if (order >= 2) jet.ddg.assign(n, std::vector<Matrix>(n, Matrix::Zero(ix(n), ix(n))));

  const auto& f = field.components();
  if (mode == DerivativeMode::Dual) {
    if (order < 2) {
      std::vector<Dual1> arg(n);
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) arg[i] = Dual1(p[ix(i)], i == k ? 1.0 : 0.0);
        auto y = f(std::span<const Dual1>(arg));
        for (std::size_t a = 0; a < n; ++a)
          for (std::size_t b = 0; b < n; ++b) jet.dg[k](ix(a), ix(b)) = y[a * n + b].d;
      }
      return jet;
    }
    std::vector<Dual2> arg(n);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t l = k; l < n; ++l) {
        for (std::size_t i = 0; i < n; ++i) {
          arg[i] = Dual2(Dual1(p[ix(i)], i == l ? 1.0 : 0.0), Dual1(i == k ? 1.0 : 0.0, 0.0));
        }
        auto y = f(std::span<const Dual2>(arg));
        for (std::size_t a = 0; a < n; ++a) {
          for (std::size_t b = 0; b < n; ++b) {
            const Dual2& e = y[a * n + b];
            jet.ddg[k][l](ix(a), ix(b)) = e.d.d;
            jet.ddg[l][k](ix(a), ix(b)) = e.d.d;
            if (l == k) jet.dg[k](ix(a), ix(b)) = e.d.v;
          }
        }
      }
    }
    return jet;
  }

  // Central differences.
  for (std::size_t k = 0; k < n; ++k) {
    const double h = fd_step(p[ix(k)]);
    Point xp = p, xm = p;
    xp[ix(k)] += h;
    xm[ix(k)] -= h;
    jet.dg[k] = (raw_checked_stencil(field, xp) - raw_checked_stencil(field, xm)) / (2.0 * h);
  }
  if (order >= 2) {
    for (std::size_t k = 0; k < n; ++k) {
      const double hk = fd_step2(p[ix(k)]);
      {
        Point xp = p, xm = p;
        xp[ix(k)] += hk;
        xm[ix(k)] -= hk;
        jet.ddg[k][k] =
            (raw_checked_stencil(field, xp) - 2.0 * jet.g + raw_checked_stencil(field, xm)) / (hk * hk);
      }
      for (std::size_t l = k + 1; l < n; ++l) {
        const double hl = fd_step2(p[ix(l)]);
        Point pp = p, pm = p, mp = p, mm = p;
        pp[ix(k)] += hk; pp[ix(l)] += hl;
        pm[ix(k)] += hk; pm[ix(l)] -= hl;
        mp[ix(k)] -= hk; mp[ix(l)] += hl;
        mm[ix(k)] -= hk; mm[ix(l)] -= hl;
        Matrix d = (raw_checked_stencil(field, pp) - raw_checked_stencil(field, pm) -
                    raw_checked_stencil(field, mp) + raw_checked_stencil(field, mm)) /
                   (4.0 * hk * hl);
        jet.ddg[k][l] = d;
        jet.ddg[l][k] = d;
      }
    }
  }
  return jet;
}

Vector Christoffel::contract(const Vector& u, const Vector& w) const {
  Vector out = Vector::Zero(ix(n_));
  for (std::size_t k = 0; k < n_; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (u[ix(i)] == 0.0) continue;
      for (std::size_t j = 0; j < n_; ++j) s += (*this)(k, i, j) * u[ix(i)] * w[ix(j)];
    }
    out[ix(k)] = s;
  }
  return out;
}

Matrix Christoffel::along(const Vector& u) const {
  Matrix m = Matrix::Zero(ix(n_), ix(n_));
  for (std::size_t k = 0; k < n_; ++k)
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) m(ix(k), ix(j)) += (*this)(k, i, j) * u[ix(i)];
  return m;
}

double Christoffel::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Christoffel::max_abs_diff(const Christoffel& other) const {
  double m = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) m = std::max(m, std::abs(data_[i] - other.data_[i]));
  return m;
}

Christoffel christoffel_from_jet(const MetricJet& jet) {
  const auto n = static_cast<std::size_t>(jet.g.rows());
  // first kind: lower(e, i, j) = 1/2 (d_i g_ej + d_j g_ei - d_e g_ij)
  std::vector<double> lower(n * n * n);
  for (std::size_t e = 0; e < n; ++e)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        lower[(e * n + i) * n + j] =
            0.5 * (jet.dg[i](ix(e), ix(j)) + jet.dg[j](ix(e), ix(i)) - jet.dg[e](ix(i), ix(j)));
  Christoffel gamma(n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t e = 0; e < n; ++e) s += jet.ginv(ix(k), ix(e)) * lower[(e * n + i) * n + j];
        gamma(k, i, j) = s;
      }
  return gamma;
}

Christoffel christoffel(const MetricField& field, const Point& p, std::optional<DerivativeMode> mode) {
  return christoffel_from_jet(metric_jet(field, p, 1, mode.value_or(field.mode())));
}

Riemann riemann_from_jet(const MetricJet& jet) {
  const auto n = static_cast<std::size_t>(jet.g.rows());
  const Christoffel gamma = christoffel_from_jet(jet);

  // dgamma[c](a, d, b) = d_c Gamma^a_{db}
  std::vector<Christoffel> dgamma(n, Christoffel(n));
  std::vector<double> lower(n * n * n);
  for (std::size_t e = 0; e < n; ++e)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        lower[(e * n + i) * n + j] =
            0.5 * (jet.dg[i](ix(e), ix(j)) + jet.dg[j](ix(e), ix(i)) - jet.dg[e](ix(i), ix(j)));
  for (std::size_t c = 0; c < n; ++c) {
    const Matrix dginv = -jet.ginv * jet.dg[c] * jet.ginv;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t d = 0; d < n; ++d)
        for (std::size_t b = 0; b < n; ++b) {
          double s = 0.0;
          for (std::size_t e = 0; e < n; ++e) {
            const double dlower = 0.5 * (jet.ddg[c][d](ix(e), ix(b)) + jet.ddg[c][b](ix(e), ix(d)) -
                                         jet.ddg[c][e](ix(d), ix(b)));
            s += dginv(ix(a), ix(e)) * lower[(e * n + d) * n + b] + jet.ginv(ix(a), ix(e)) * dlower;
          }
          dgamma[c](a, d, b) = s;
        }
  }

  Riemann r(n);
  r.g_ = jet.g;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t d = 0; d < n; ++d) {
          double s = dgamma[c](a, d, b) - dgamma[d](a, c, b);
          for (std::size_t e = 0; e < n; ++e) s += gamma(a, c, e) * gamma(e, d, b) - gamma(a, d, e) * gamma(e, c, b);
          r.up_[r.idx(a, b, c, d)] = s;
        }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t d = 0; d < n; ++d) {
          double s = 0.0;
          for (std::size_t e = 0; e < n; ++e) s += jet.g(ix(a), ix(e)) * r.up_[r.idx(e, b, c, d)];
          r.low_[r.idx(a, b, c, d)] = s;
        }
  return r;
}

Riemann riemann(const MetricField& field, const Point& p, std::optional<DerivativeMode> mode) {
  return riemann_from_jet(metric_jet(field, p, 2, mode.value_or(field.mode())));
}

Matrix Riemann::endomorphism(const Vector& x, const Vector& y) const {
  Matrix m = Matrix::Zero(ix(n_), ix(n_));
  for (std::size_t a = 0; a < n_; ++a)
    for (std::size_t b = 0; b < n_; ++b) {
      double s = 0.0;
      for (std::size_t c = 0; c < n_; ++c)
        for (std::size_t d = 0; d < n_; ++d) s += up(a, b, c, d) * x[ix(c)] * y[ix(d)];
      m(ix(a), ix(b)) = s;
    }
  return m;
}

double Riemann::sectional(const Vector& x, const Vector& y) const {
  const Vector ry = endomorphism(x, y) * y;
  const double num = inner(g_, ry, x);
  const double den = inner(g_, x, x) * inner(g_, y, y) - std::pow(inner(g_, x, y), 2);
  return num / den;
}

double Riemann::max_abs_up() const {
  double m = 0.0;
  for (double v : up_) m = std::max(m, std::abs(v));
  return m;
}

double Riemann::max_abs_low() const {
  double m = 0.0;
  for (double v : low_) m = std::max(m, std::abs(v));
  return m;
}

double Riemann::pair_symmetry_residual() const {
  double m = 0.0;
  for (std::size_t a = 0; a < n_; ++a)
    for (std::size_t b = 0; b < n_; ++b)
      for (std::size_t c = 0; c < n_; ++c)
        for (std::size_t d = 0; d < n_; ++d) {
          const double v = low(a, b, c, d);
          m = std::max({m, std::abs(v + low(b, a, c, d)), std::abs(v + low(a, b, d, c)), std::abs(v - low(c, d, a, b))});
        }
  return m;
}

double Riemann::bianchi_residual() const {
  double m = 0.0;
  for (std::size_t a = 0; a < n_; ++a)
    for (std::size_t b = 0; b < n_; ++b)
      for (std::size_t c = 0; c < n_; ++c)
        for (std::size_t d = 0; d < n_; ++d)
          m = std::max(m, std::abs(low(a, b, c, d) + low(a, c, d, b) + low(a, d, b, c)));
  return m;
}

ConstantCurvatureFit fit_constant_curvature(const MetricField& field, std::span<const Point> samples) {
  // Accumulate sum(model*R) / sum(model^2) across all samples and components.
  std::vector<Riemann> curv;
  curv.reserve(samples.size());
  double num = 0.0, den = 0.0;
  for (const auto& p : samples) {
    curv.push_back(riemann(field, p));
    const Riemann& r = curv.back();
    const Matrix& g = r.metric();
    const std::size_t n = r.dim();
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < n; ++c)
          for (std::size_t d = 0; d < n; ++d) {
            const double model = g(ix(a), ix(c)) * g(ix(b), ix(d)) - g(ix(a), ix(d)) * g(ix(b), ix(c));
            num += model * r.low(a, b, c, d);
            den += model * model;
          }
  }
  ConstantCurvatureFit fit;
  fit.kappa = den > 0.0 ? num / den : 0.0;
  for (const auto& r : curv) {
    const Matrix& g = r.metric();
    const std::size_t n = r.dim();
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < n; ++c)
          for (std::size_t d = 0; d < n; ++d) {
            const double model = g(ix(a), ix(c)) * g(ix(b), ix(d)) - g(ix(a), ix(d)) * g(ix(b), ix(c));
            fit.max_residual = std::max(fit.max_residual, std::abs(r.low(a, b, c, d) - fit.kappa * model));
          }
  }
  return fit;
}

std::optional<double> constant_curvature_estimate(const MetricField& field, std::span<const Point> samples,
                                                  double tol) {
  if (samples.size() < 10) throw Error(ErrorCode::InvalidArgument, "constant curvature estimate needs >= 10 samples");
  const auto fit = fit_constant_curvature(field, samples);
  if (fit.max_residual < tol) return fit.kappa;
  return std::nullopt;
}

Matrix covariant_derivative(const MetricField& field, const ChartFunction& vector_field, const Point& p) {
  const Christoffel gamma = christoffel(field, p);
  const Vector v = vector_field.value(p);
  Matrix out = vector_field.jacobian(p);  // out(i, j) = d_j V^i
  const auto n = field.dim();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += gamma(i, j, k) * v[ix(k)];
      out(ix(i), ix(j)) += s;
    }
  return out;
}

double inner(const Matrix& g, const Vector& u, const Vector& w) { return u.dot(g * w); }

}  // namespace conelab
