#include "conelab/warped.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "conelab/errors.hpp"

namespace conelab {

namespace {

using Idx = Eigen::Index;

template <class G>
Warp named(WarpKind kind, std::string name, G g) {
  return Warp{kind, std::move(name), scalar_function(1, [g](auto x) { return g(x[0]); })};
}

// Smallest zero of the named warp inside the open interval, if any.
std::optional<double> zero_inside(WarpKind kind, const Interval& iv) {
  const double pi = std::numbers::pi;
  // zeros offset + k*pi; the first one above lo (or the last one below hi)
  auto periodic = [&](double offset) -> std::optional<double> {
    double z = offset;
    if (std::isfinite(iv.lo)) z = offset + (std::floor((iv.lo - offset) / pi) + 1.0) * pi;
    else if (std::isfinite(iv.hi)) z = offset + (std::ceil((iv.hi - offset) / pi) - 1.0) * pi;
    return iv.contains(z) ? std::optional<double>(z) : std::nullopt;
  };
  switch (kind) {
    case WarpKind::Sinh:
      if (iv.contains(0.0)) return 0.0;
      return std::nullopt;
    case WarpKind::Sin:
      return periodic(0.0);
    case WarpKind::Cos:
      return periodic(pi / 2);
    default:
      return std::nullopt;
  }
}

void require_nonvanishing(const Warp& w, const Interval& range, const Interval& sampling) {
  if (auto z = zero_inside(w.kind, range)) {
    throw Error(ErrorCode::DomainContainsWarpZero,
                w.name + " vanishes at s = " + std::to_string(*z) + " inside the s-range");
  }
  for (int k = 0; k <= 200; ++k) {
    const double s = sampling.lo + (sampling.hi - sampling.lo) * k / 200.0;
    if (!range.contains(s)) continue;
    if (!(std::abs(w(s)) > 0.0)) {
      throw Error(ErrorCode::DomainContainsWarpZero, w.name + " vanishes at s = " + std::to_string(s));
    }
  }
}

Interval sampling_for(const Interval& range, const std::optional<Interval>& s) {
  return s ? *s : default_sampling(range);
}

}  // namespace

double Warp::operator()(double s) const { return f.value(Vector::Constant(1, s))[0]; }
double Warp::derivative(double s) const { return f.jacobian(Vector::Constant(1, s))(0, 0); }
double Warp::second_derivative(double s) const { return f.hessians(Vector::Constant(1, s))[0](0, 0); }

Warp warp_cosh() { return named(WarpKind::Cosh, "cosh", [](auto s) { return cosh(s); }); }
Warp warp_exp() { return named(WarpKind::Exp, "exp", [](auto s) { return exp(s); }); }
Warp warp_sinh() { return named(WarpKind::Sinh, "sinh", [](auto s) { return sinh(s); }); }
Warp warp_cos() { return named(WarpKind::Cos, "cos", [](auto s) { return cos(s); }); }
Warp warp_sin() { return named(WarpKind::Sin, "sin", [](auto s) { return sin(s); }); }
Warp warp_custom(std::string name, ChartFunction f) {
  if (f.in_dim() != 1 || f.out_dim() != 1) throw Error(ErrorCode::InvalidArgument, "warp must map s to one value");
  return Warp{WarpKind::Custom, std::move(name), std::move(f)};
}

std::string to_string(Completeness c) {
  switch (c) {
    case Completeness::Complete: return "complete";
    case Completeness::Incomplete: return "incomplete";
    case Completeness::Undetermined: return "undetermined";
  }
  return "?";
}

std::string to_string(CompletenessClause c) {
  switch (c) {
    case CompletenessClause::Cosh: return "cosh-clause";
    case CompletenessClause::ExpDefinite: return "exp-definite-clause";
    case CompletenessClause::ExpIndefinite: return "exp-indefinite-clause";
    case CompletenessClause::BaseIncomplete: return "base-incomplete";
  }
  return "?";
}

MetricField build_warped(const WarpedSpec& spec) {
  if (spec.epsilon != 1 && spec.epsilon != -1) throw Error(ErrorCode::InvalidArgument, "epsilon must be +1 or -1");
  const Interval sampling = sampling_for(spec.s_range, spec.s_sampling);
  require_nonvanishing(spec.warp, spec.s_range, sampling);
  const std::size_t n = spec.base.dim();
  const std::size_t m = n + 1;
  const ChartFunction base = spec.base.components();
  const ChartFunction warp = spec.warp.f;
  const double eps = spec.epsilon;

  std::optional<Signature> hint;
  if (spec.base.signature_hint()) {
    hint = *spec.base.signature_hint();
    if (eps > 0) ++hint->negative;
    else ++hint->positive;
  }
  ChartFunction comps(m, m * m, [base, warp, n, m, eps](auto x) {
    using T = scalar_of<decltype(x)>;
    const std::vector<T> g = base(x.subspan(1, n));
    const T f = warp(x.subspan(0, 1))[0];
    const T f2 = f * f;
    std::vector<T> out(m * m, T(0.0));
    out[0] = T(-eps);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out[(i + 1) * m + (j + 1)] = f2 * g[i * n + j];
    return out;
  });
  return MetricField(spec.base.chart().prepend("s", spec.s_range, sampling), std::move(comps), hint,
                     spec.base.mode());
}

double warped_connection_residual(const WarpedSpec& spec, std::span<const Point> samples) {
  const MetricField m = build_warped(spec);
  const std::size_t n = spec.base.dim();
  const double eps = spec.epsilon;
  double res = 0.0;
  for (const Point& q : samples) {
    const double s = q[0];
    const Point p = q.tail(static_cast<Idx>(n));
    const Christoffel G = christoffel(m, q);
    const Christoffel GN = christoffel(spec.base, p);
    const Matrix gN = metric_eval(spec.base, p);
    const double f = spec.warp(s);
    const double fp = spec.warp.derivative(s);
    auto upd = [&](double got, double want) { res = std::max(res, std::abs(got - want)); };
    // nabla_{d_s} d_s = 0
    for (std::size_t k = 0; k <= n; ++k) upd(G(k, 0, 0), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      // nabla_X d_s = (f'/f) X
      upd(G(0, i + 1, 0), 0.0);
      for (std::size_t k = 0; k < n; ++k) upd(G(k + 1, i + 1, 0), k == i ? fp / f : 0.0);
      // nabla_X Y = nabla^N_X Y + eps f' f g_N(X,Y) d_s
      for (std::size_t j = 0; j < n; ++j) {
        upd(G(0, i + 1, j + 1), eps * fp * f * gN(static_cast<Idx>(i), static_cast<Idx>(j)));
        for (std::size_t k = 0; k < n; ++k) upd(G(k + 1, i + 1, j + 1), GN(k, i, j));
      }
    }
  }
  return res;
}

CompletenessVerdict completeness_verdict(const WarpedSpec& spec, bool base_complete, std::uint64_t seed) {
  if (spec.warp.kind != WarpKind::Cosh && spec.warp.kind != WarpKind::Exp) {
    throw Error(ErrorCode::UnsupportedWarp, "completeness clauses cover cosh and exp warps only, got " + spec.warp.name);
  }
  const MetricField m = build_warped(spec);
  const auto pts = m.chart().samples(50, seed);
  const Signature sig0 = signature_of(metric_eval(m, pts.front()));
  for (const auto& q : pts) {
    if (!(signature_of(metric_eval(m, q)) == sig0)) {
      throw Error(ErrorCode::InvalidArgument, "signature is not constant over the sampled region");
    }
  }
  CompletenessVerdict out;
  out.definite = sig0.definite();
  if (!base_complete) {
    // A complete warped product forces a complete base.
    out.verdict = Completeness::Incomplete;
    out.reason = CompletenessClause::BaseIncomplete;
    return out;
  }
  if (spec.warp.kind == WarpKind::Cosh) {
    out.verdict = Completeness::Complete;
    out.reason = CompletenessClause::Cosh;
    return out;
  }
  if (out.definite) {
    out.verdict = Completeness::Complete;
    out.reason = CompletenessClause::ExpDefinite;
    return out;
  }

  // Light-like witness: s' = -1 and a base vector with e^{2s} g_N(X,X) = eps.
  // Along it e^s is affine and reaches 0 at t = 1.
  out.verdict = Completeness::Incomplete;
  out.reason = CompletenessClause::ExpIndefinite;
  const std::size_t n = spec.base.dim();
  const Point q = pts.front();
  const double s0 = q[0];
  const Point p = q.tail(static_cast<Idx>(n));
  Eigen::SelfAdjointEigenSolver<Matrix> es(metric_eval(spec.base, p));
  Idx pick = -1;
  for (Idx k = 0; k < es.eigenvalues().size(); ++k) {
    if (es.eigenvalues()[k] * spec.epsilon > 0.0) {
      pick = k;
      break;
    }
  }
  if (pick < 0) throw Error(ErrorCode::InvalidArgument, "indefinite metric without a base direction of sign eps");
  Vector X = es.eigenvectors().col(pick);
  X *= std::exp(-s0) / std::sqrt(std::abs(es.eigenvalues()[pick]));
  GeodesicWitness w;
  w.p = q;
  w.v = Vector(n + 1);
  w.v << -1.0, X;
  w.run = geodesic_integrate(m, w.p, w.v, 1e3, 1e-10);
  if (w.run.verdict != GeodesicVerdict::ReachedHorizon && w.run.escape_time_estimate) {
    w.escape_time = *w.run.escape_time_estimate;
  }
  // xi = e^s should follow e^{s0} (1 - t)
  for (std::size_t k = 0; k < w.run.times.size(); ++k) {
    const double t = w.run.times[k];
    if (t > 0.9) break;
    const double xi = std::exp(w.run.positions[k][0]);
    w.affine_residual = std::max(w.affine_residual, std::abs(xi - std::exp(s0) * (1.0 - t)) / std::exp(s0));
  }
  out.witness = std::move(w);
  return out;
}

SpotCheck completeness_spot_check(const WarpedSpec& spec, std::size_t n_geodesics, double horizon,
                                  std::uint64_t seed) {
  const MetricField m = build_warped(spec);
  Rng rng(seed);
  SpotCheck out;
  const auto dim = static_cast<Idx>(m.dim());
  for (std::size_t k = 0; k < n_geodesics; ++k) {
    const Point q = m.chart().sample(rng);
    Vector v(dim);
    for (Idx i = 0; i < dim; ++i) v[i] = rng.uniform(-1.0, 1.0);
    // unit speed unless null
    const double sp = inner(metric_eval(m, q), v, v);
    if (std::abs(sp) > 1e-12) v /= std::sqrt(std::abs(sp));
    const GeodesicResult r = geodesic_integrate(m, q, v, horizon, 1e-9);
    ++out.runs;
    if (r.verdict != GeodesicVerdict::ReachedHorizon) ++out.escaped;
    out.max_speed_drift = std::max(out.max_speed_drift, r.speed_drift);
  }
  return out;
}

double slice_pregeodesic_residual(const WarpedSpec& spec, const Point& p, const Vector& X, double horizon) {
  const MetricField m = build_warped(spec);
  const auto n = static_cast<Idx>(spec.base.dim());
  Vector v(n + 1);
  v << 0.0, X;
  const GeodesicResult r = geodesic_integrate(m, p, v, horizon, 1e-10);
  double res = 0.0;
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    const Point& q = r.positions[k];
    const Vector& vel = r.velocities[k];
    const Vector acc = -christoffel(m, q).contract(vel, vel);
    const Vector gp = vel.tail(n);
    const Vector nabla = acc.tail(n) + christoffel(spec.base, q.tail(n)).contract(gp, gp);
    const double s = q[0];
    const Vector want = -2.0 * spec.warp.derivative(s) / spec.warp(s) * vel[0] * gp;
    res = std::max(res, (nabla - want).cwiseAbs().maxCoeff() / std::max(1.0, gp.squaredNorm()));
  }
  return res;
}

MetricField build_doubly_warped(DoublyWarpedForm form, const MetricField& g1, const MetricField& g2,
                                Interval s_range, std::optional<Interval> s_sampling) {
  const bool plus = form == DoublyWarpedForm::Plus;
  const Warp w1 = plus ? warp_cos() : warp_cosh();
  const Warp w2 = plus ? warp_sin() : warp_sinh();
  const Interval sampling = sampling_for(s_range, s_sampling);
  require_nonvanishing(w1, s_range, sampling);
  require_nonvanishing(w2, s_range, sampling);

  const std::size_t n1 = g1.dim();
  const std::size_t n2 = g2.dim();
  const std::size_t m = 1 + n1 + n2;
  const ChartFunction a = g1.components();
  const ChartFunction b = g2.components();
  ChartFunction comps(m, m * m, [a, b, n1, n2, m, plus](auto x) {
    using T = scalar_of<decltype(x)>;
    const std::vector<T> ga = a(x.subspan(1, n1));
    const std::vector<T> gb = b(x.subspan(1 + n1, n2));
    const T s = x[0];
    const T c = plus ? cos(s) : cosh(s);
    const T d = plus ? sin(s) : sinh(s);
    std::vector<T> out(m * m, T(0.0));
    out[0] = T(plus ? 1.0 : -1.0);
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t j = 0; j < n1; ++j) out[(1 + i) * m + 1 + j] = c * c * ga[i * n1 + j];
    for (std::size_t i = 0; i < n2; ++i)
      for (std::size_t j = 0; j < n2; ++j) out[(1 + n1 + i) * m + 1 + n1 + j] = d * d * gb[i * n2 + j];
    return out;
  });
  CoordinateChart chart = CoordinateChart({"s"}, {s_range}, {sampling}).concat(g1.chart()).concat(g2.chart());
  return MetricField(std::move(chart), std::move(comps), std::nullopt, g1.mode());
}

}  // namespace conelab
