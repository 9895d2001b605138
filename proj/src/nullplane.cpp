#include "conelab/nullplane.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "conelab/errors.hpp"

namespace conelab {

namespace {

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
struct GaussLegendre {
  std::vector<double> x, w;
  explicit GaussLegendre(int n) {
    for (int i = 1; i <= n; ++i) {
      double z = std::cos(std::numbers::pi * (i - 0.25) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x.push_back(z);
      w.push_back(2.0 / ((1.0 - z * z) * dp * dp));
    }
  }
};

const GaussLegendre& rule() {
  static const GaussLegendre gl(12);
  return gl;
}

constexpr double kPanel = 0.25;

// h_i(x, s, u) = e^{-2s} (C_i + int_0^s e^{2 sigma} d_i f2(x, sigma, u) d sigma)
ChartFunction make_h(std::size_t n0, ChartFunction df2, std::vector<double> C) {
  return ChartFunction(n0 + 2, n0, [n0, df2, C](auto y) {
    using T = scalar_of<decltype(y)>;
    const T s = y[n0];
    const auto& gl = rule();
    const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(primal(s)) / kPanel)));
    std::vector<T> acc(n0, T(0.0));
    std::vector<T> z(y.begin(), y.end());
    for (int k = 0; k < panels; ++k) {
      const T a = s * (static_cast<double>(k) / panels);
      const T b = s * (static_cast<double>(k + 1) / panels);
      const T mid = 0.5 * (a + b);
      const T half = 0.5 * (b - a);
      for (std::size_t q = 0; q < gl.x.size(); ++q) {
        const T sigma = mid + half * gl.x[q];
        z[n0] = sigma;
        const std::vector<T> d = df2(std::span<const T>(z));
        const T wt = half * gl.w[q] * exp(2.0 * sigma);
        for (std::size_t i = 0; i < n0; ++i) acc[i] = acc[i] + wt * d[i];
      }
    }
    const T decay = exp(-2.0 * s);
    std::vector<T> out(n0);
    for (std::size_t i = 0; i < n0; ++i) out[i] = decay * (C[i] + acc[i]);
    return out;
  });
}

void require_nonzero_f1(const NullPlaneInputs& in) {
  const Interval w = in.u_range.bounded() ? in.u_range : in.u_sampling;
  constexpr int kScan = 2000;
  double prev = 0.0;
  for (int i = 0; i <= kScan; ++i) {
    double u = w.lo + w.width() * i / kScan;
    if (!in.u_range.contains(u)) continue;
    const double f = in.f1.value(Vector::Constant(1, u))(0);
    if (std::abs(f) < 1e-12 || (i > 0 && prev * f < 0.0))
      throw Error(ErrorCode::F1HasZero, "f1 vanishes near u = " + std::to_string(u));
    prev = f;
  }
}

double fd_partial(const ChartFunction& f, const Point& p, std::size_t out, std::size_t k) {
  const double h = 1e-5 * std::max(1.0, std::abs(p(ix(k))));
  Point a = p, b = p;
  a(ix(k)) += h;
  b(ix(k)) -= h;
  return (f.value(a)(ix(out)) - f.value(b)(ix(out))) / (2.0 * h);
}

}  // namespace

double EtaResiduals::max() const { return *std::max_element(equations.begin(), equations.end()); }

CoordinateChart nullplane_chart(const NullPlaneInputs& in) {
  return in.m0.concat(CoordinateChart({"s", "u", "t"}, {Interval{}, in.u_range, Interval{}},
                                      {Interval{-1.0, 1.0}, in.u_sampling, Interval{-1.0, 1.0}}));
}

MetricField nullplane_metric_from_eta(const NullPlaneInputs& inputs, const ChartFunction& eta) {
  const std::size_t n0 = inputs.m0.dim();
  const std::size_t n = n0 + 3;
  const ChartFunction g0 = inputs.g0;
  ChartFunction comps(n, n * n, [n0, n, g0, eta](auto y) {
    using T = scalar_of<decltype(y)>;
    std::vector<T> xu(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n0));
    xu.push_back(y[n0 + 1]);
    const std::vector<T> g0v = g0(std::span<const T>(xu));
    const std::vector<T> e = eta(y);
    const T decay = exp(-2.0 * y[n0]);
    std::vector<T> g(n * n, T(0.0));
    for (std::size_t i = 0; i < n0; ++i)
      for (std::size_t j = 0; j < n0; ++j) g[i * n + j] = decay * g0v[i * n0 + j];
    g[n0 * n + n0] = T(1.0);
    // 2 du eta
    const std::size_t ku = n0 + 1;
    for (std::size_t a = 0; a < n; ++a) {
      if (a == ku) continue;
      g[ku * n + a] = g[ku * n + a] + e[a];
      g[a * n + ku] = g[a * n + ku] + e[a];
    }
    g[ku * n + ku] = 2.0 * e[ku];
    return g;
  });
  return MetricField(nullplane_chart(inputs), std::move(comps));
}

GeneratedNullPlane generate_nullplane_metric(const NullPlaneInputs& inputs, std::size_t grid) {
  const std::size_t n0 = inputs.m0.dim();
  if (n0 == 0) throw Error(ErrorCode::InvalidArgument, "M0 needs at least one coordinate");
  if (!inputs.f1.valid() || !inputs.f2.valid() || !inputs.df2.valid() || !inputs.g0.valid())
    throw Error(ErrorCode::InvalidArgument, "f1, f2, d f2 and g0 are all required");
  require_nonzero_f1(inputs);

  NullPlaneMetricSpec spec;
  spec.inputs = inputs;
  if (spec.inputs.C.empty()) spec.inputs.C.assign(n0, 0.0);
  if (spec.inputs.C.size() != n0) throw Error(ErrorCode::InvalidArgument, "one integration constant per x^i");
  spec.n0 = n0;
  spec.grid = grid;
  spec.h = make_h(n0, inputs.df2, spec.inputs.C);

  const std::size_t n = n0 + 3;
  const ChartFunction f1 = inputs.f1, f2 = inputs.f2, h = spec.h;
  spec.eta = ChartFunction(n, n, [n0, f1, f2, h](auto y) {
    using T = scalar_of<decltype(y)>;
    const auto xsu = y.subspan(0, n0 + 2);
    const T u = y[n0 + 1];
    const T t = y[n0 + 2];
    const T a = f1(std::span<const T>(&u, 1))[0];
    const std::vector<T> hi = h(xsu);
    std::vector<T> eta(n0 + 3, T(0.0));
    for (std::size_t i = 0; i < n0; ++i) eta[i] = hi[i];
    eta[n0] = 2.0 * t * a + f2(xsu)[0];
    eta[n0 + 2] = a;
    return eta;
  });

  GeneratedNullPlane out{nullplane_metric_from_eta(inputs, spec.eta), spec};

  // Probe h once on the sampling box so a broken f2 fails here rather than later.
  for (const auto& p : out.metric.chart().samples(5, kDefaultSeed)) {
    const Vector hv = spec.h.value(p.head(ix(n0 + 2)));
    if (!hv.allFinite()) throw Error(ErrorCode::ODESolveFailure, "h_i is not finite on the sampling box");
  }
  return out;
}

double h_ode_residual(const NullPlaneMetricSpec& spec) {
  const std::size_t n0 = spec.n0;
  std::vector<Interval> box = spec.inputs.m0.sampling();
  box.push_back(Interval{-1.0, 1.0});
  box.push_back(spec.inputs.u_sampling);
  std::vector<Point> pts;
  const std::size_t g = std::max<std::size_t>(spec.grid, 2);
  if (n0 == 1) {
    for (std::size_t a = 0; a < g; ++a)
      for (std::size_t b = 0; b < g; ++b)
        for (std::size_t c = 0; c < g; ++c) {
          Point p(3);
          const std::size_t idx[3] = {a, b, c};
          for (int k = 0; k < 3; ++k) p(k) = box[k].lo + box[k].width() * static_cast<double>(idx[k]) / (g - 1);
          pts.push_back(p);
        }
  } else {
    Rng rng(kDefaultSeed);
    for (std::size_t i = 0; i < g * g * g; ++i) {
      Point p(ix(n0 + 2));
      for (std::size_t k = 0; k < n0 + 2; ++k) p(ix(k)) = rng.uniform(box[k].lo, box[k].hi);
      pts.push_back(p);
    }
  }
  double worst = 0.0;
  for (const auto& p : pts) {
    const Vector hv = spec.h.value(p);
    const Matrix J = spec.h.jacobian(p);
    const Vector d = spec.inputs.df2.value(p);
    for (std::size_t i = 0; i < n0; ++i)
      worst = std::max(worst, std::abs(J(ix(i), ix(n0)) + 2.0 * hv(ix(i)) - d(ix(i))));
  }
  return worst;
}

EtaResiduals eta_system_residuals(const ChartFunction& eta, std::size_t n0, std::span<const Point> samples) {
  const std::size_t ks = n0, kt = n0 + 2;
  EtaResiduals r;
  auto bump = [&](int k, double v) { r.equations[k] = std::max(r.equations[k], std::abs(v)); };
  for (const auto& p : samples) {
    const Vector e = eta.value(p);
    bump(0, fd_partial(eta, p, kt, kt));
    bump(1, fd_partial(eta, p, kt, ks));
    for (std::size_t i = 0; i < n0; ++i) {
      bump(2, fd_partial(eta, p, kt, i));
      bump(3, fd_partial(eta, p, i, kt));
      bump(5, fd_partial(eta, p, i, ks) - fd_partial(eta, p, ks, i) + 2.0 * e(ix(i)));
    }
    bump(4, fd_partial(eta, p, ks, kt) - 2.0 * e(ix(kt)));
  }
  return r;
}

EtaResiduals eta_system_residuals(const NullPlaneMetricSpec& spec, std::size_t n_samples, std::uint64_t seed) {
  const auto samples = nullplane_chart(spec.inputs).samples(n_samples, seed);
  return eta_system_residuals(spec.eta, spec.n0, samples);
}

namespace {

ChartFunction constant_field(std::size_t n, std::size_t k) {
  return ChartFunction(n, n, [n, k](auto x) {
    using T = scalar_of<decltype(x)>;
    std::vector<T> v(n, T(0.0));
    v[k] = T(1.0);
    return v;
  });
}

}  // namespace

VZPair coordinate_pair(const NullPlaneMetricSpec& spec) {
  return VZPair{constant_field(spec.dim(), spec.t_index()), constant_field(spec.dim(), spec.s_index())};
}

VZResiduals vz_residuals(const MetricField& field, const VZPair& pair, std::span<const Point> samples) {
  VZResiduals out;
  const auto n = ix(field.dim());
  for (const auto& p : samples) {
    const Matrix g = metric_eval(field, p);
    const Vector V = pair.V.value(p);
    const Vector Z = pair.Z.value(p);
    const double alg = std::max({std::abs(inner(g, V, V)), std::abs(inner(g, Z, Z) - 1.0), std::abs(inner(g, V, Z))});
    if (alg > 1e-8)
      throw Error(ErrorCode::PairNotAdmissible,
                  "g(V,V) = 0, g(Z,Z) = 1, g(V,Z) = 0 violated by " + std::to_string(alg));
    out.algebraic = std::max(out.algebraic, alg);

    const Matrix DV = covariant_derivative(field, pair.V, p);
    const Matrix DZ = covariant_derivative(field, pair.Z, p);
    const Vector gV = g * V;
    const Vector gZ = g * Z;
    Matrix alpha(1, n), beta(1, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const Vector A = DV.col(j) - gV(j) * Z;
      Vector B = DZ.col(j) - gZ(j) * Z;
      B(j) += 1.0;
      alpha(0, j) = A.dot(V) / V.squaredNorm();
      beta(0, j) = B.dot(V) / V.squaredNorm();
      out.nabla_V = std::max(out.nabla_V, (A - alpha(0, j) * V).cwiseAbs().maxCoeff());
      out.nabla_Z = std::max(out.nabla_Z, (B - beta(0, j) * V).cwiseAbs().maxCoeff());
    }
    out.alpha.push_back(alpha);
    out.beta.push_back(beta);
  }
  return out;
}

double v_perp_integrability(const MetricField& field, const ChartFunction& V, std::span<const Point> samples) {
  if (samples.empty()) return 0.0;
  const std::size_t n = field.dim();
  // Transversal coordinate direction: largest |g(e_k, V)| at the first sample.
  const Vector gV0 = metric_eval(field, samples[0]) * V.value(samples[0]);
  Eigen::Index kmax = 0;
  gV0.cwiseAbs().maxCoeff(&kmax);
  const auto k = static_cast<std::size_t>(kmax);
  const ChartFunction comps = field.components();

  std::vector<ChartFunction> frame;
  for (std::size_t a = 0; a < n; ++a) {
    if (a == k) continue;
    frame.emplace_back(n, n, [comps, V, n, a, k](auto x) {
      using T = scalar_of<decltype(x)>;
      const std::vector<T> g = comps(x);
      const std::vector<T> v = V(x);
      T ga(0.0), gk(0.0);
      for (std::size_t j = 0; j < n; ++j) {
        ga = ga + g[a * n + j] * v[j];
        gk = gk + g[k * n + j] * v[j];
      }
      std::vector<T> e(n, T(0.0));
      e[a] = T(1.0);
      e[k] = -ga / gk;
      return e;
    });
  }
  double worst = 0.0;
  for (const auto& p : samples) {
    const Vector gV = metric_eval(field, p) * V.value(p);
    std::vector<Vector> E;
    std::vector<Matrix> J;
    for (const auto& f : frame) {
      E.push_back(f.value(p));
      J.push_back(f.jacobian(p));
    }
    for (std::size_t a = 0; a < E.size(); ++a)
      for (std::size_t b = a + 1; b < E.size(); ++b) {
        const Vector br = J[b] * E[a] - J[a] * E[b];
        worst = std::max(worst, std::abs(br.dot(gV)));
      }
  }
  return worst;
}

}  // namespace conelab
