#include "conelab/split_fields.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "conelab/geodesic.hpp"

namespace conelab {

namespace {

constexpr double kGradientFloor = 1e-10;
constexpr double kAcceptTol = 1e-6;

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Mean and spread of g^(V,V) over cone samples.
std::pair<double, double> field_norm_stats(const MetricField& cone, const ChartFunction& V,
                                           std::span<const Point> samples) {
  std::vector<double> vals;
  for (const auto& y : samples) {
    const Vector v = V.value(y);
    vals.push_back(inner(metric_eval(cone, y), v, v));
  }
  double mean = 0.0;
  for (double x : vals) mean += x;
  mean /= static_cast<double>(vals.size());
  double spread = 0.0;
  for (double x : vals) spread = std::max(spread, std::abs(x - mean));
  return {mean, spread};
}

double snap_nu(double nu) {
  if (std::abs(nu) < kAcceptTol) return 0.0;
  return nu > 0 ? 1.0 : -1.0;
}

bool near_unit(double nu, double target) { return std::abs(nu - target) < kAcceptTol; }

// s and ds/du for the branch.
template <class T>
T s_of_u(SplitBranch b, int eps, const T& u) {
  switch (b) {
    case SplitBranch::Cosh: return -static_cast<double>(eps) * asinh(u);
    case SplitBranch::ExpPlus: return -static_cast<double>(eps) * log(u);
    case SplitBranch::ExpMinus: return -static_cast<double>(eps) * log(-u);
  }
  return u;
}

template <class T>
T ds_du(SplitBranch b, int eps, const T& u) {
  if (b == SplitBranch::Cosh) return -static_cast<double>(eps) / sqrt(1.0 + u * u);
  return -static_cast<double>(eps) / u;
}

double level_target(SplitBranch b) {
  switch (b) {
    case SplitBranch::Cosh: return 0.0;
    case SplitBranch::ExpPlus: return 1.0;
    case SplitBranch::ExpMinus: return -1.0;
  }
  return 0.0;
}

bool in_branch(SplitBranch b, double u) {
  if (b == SplitBranch::ExpPlus) return u > 0.0;
  if (b == SplitBranch::ExpMinus) return u < 0.0;
  return true;
}

// Zeros of u - target found by scanning coordinate lines through random points
// and bisecting each sign change.
std::vector<Point> scan_level_set(const MetricField& base, const Potential& pot, double target, std::size_t want,
                                  std::uint64_t seed) {
  const auto& chart = base.chart();
  const std::size_t n = chart.dim();
  constexpr std::size_t kGrid = 40;
  std::vector<Point> out;
  Rng rng(seed);
  for (std::size_t attempt = 0; attempt < 50 * want && out.size() < want; ++attempt) {
    const Point p = chart.sample(rng);
    const std::size_t k = attempt % n;
    const Interval win = chart.sampling()[k];
    auto at = [&](double x) {
      Point q = p;
      q(ix(k)) = x;
      return q;
    };
    auto lv = [&](double x) { return pot.value(at(x)) - target; };
    double x0 = win.lo;
    double f0 = lv(x0);
    for (std::size_t i = 1; i <= kGrid && out.size() < want; ++i) {
      const double x1 = win.lo + win.width() * static_cast<double>(i) / kGrid;
      const double f1 = lv(x1);
      if (f0 == 0.0 || f0 * f1 < 0.0) {
        double a = x0, b = x1, fa = f0;
        while (b - a > 1e-10 && fa != 0.0) {
          const double m = 0.5 * (a + b);
          const double fm = lv(m);
          if ((fa < 0.0) == (fm < 0.0)) {
            a = m;
            fa = fm;
          } else {
            b = m;
          }
        }
        const Point q = at(fa == 0.0 ? a : 0.5 * (a + b));
        if (chart.contains(q)) out.push_back(q);
        break;  // one root per line keeps the sample spread out
      }
      x0 = x1;
      f0 = f1;
    }
  }
  return out;
}

// Basis of ker(du) at p (Euclidean complement of du).
Matrix tangent_basis(const Vector& du) {
  const auto n = du.size();
  Eigen::JacobiSVD<Matrix> svd(du.transpose(), Eigen::ComputeFullV);
  return svd.matrixV().rightCols(n - 1);
}

// Newton projection onto {u = target} along du.
Point project_to_level(const Potential& pot, double target, Point q) {
  for (int it = 0; it < 8; ++it) {
    const double r = pot.value(q) - target;
    const Vector du = pot.differential(q);
    q -= r * du / du.squaredNorm();
    if (std::abs(r) < 1e-15) break;
  }
  return q;
}

struct FlowSample {
  Point x;
  Vector v;
};

// Flow of S from p at the given times (any sign), each time exactly.
std::map<double, FlowSample> flow_at(const MetricField& base, const ChartFunction& S, const Point& p,
                                     const std::vector<double>& times, double tol) {
  std::map<double, FlowSample> out;
  const Vector s0 = S.value(p);
  for (double sign : {1.0, -1.0}) {
    std::vector<double> outs;
    for (double t : times)
      if (sign * t > 0.0) outs.push_back(sign * t);
    if (outs.empty()) continue;
    const double horizon = *std::max_element(outs.begin(), outs.end());
    GeodesicOptions go;
    go.output_times = outs;
    go.record_steps = false;
    const GeodesicResult run = geodesic_integrate(base, p, sign * s0, horizon, tol, go);
    if (run.verdict != GeodesicVerdict::ReachedHorizon)
      throw Error(ErrorCode::FlowLeftDomain, "flow line from a level set point " + to_string(run.verdict));
    for (std::size_t i = 0; i < run.times.size(); ++i)
      out[sign * run.times[i]] = FlowSample{run.positions[i], sign * run.velocities[i]};
  }
  for (double t : times)
    if (t == 0.0) out[0.0] = FlowSample{p, s0};
  return out;
}

double model_factor(SplitBranch b, double t) {
  if (b == SplitBranch::Cosh) return std::cosh(t) * std::cosh(t);
  return std::exp(2.0 * t);
}

double model_rate(SplitBranch b, double t) { return b == SplitBranch::Cosh ? 2.0 * std::tanh(t) : 2.0; }

}  // namespace

ChartFunction parallel_field_from_potential(const ConeSpec& spec, const Potential& pot) {
  const std::size_t n = spec.base.dim();
  const ChartFunction g = spec.base.components();
  const ChartFunction u = pot.u;
  const ChartFunction du = pot.du;
  const double eps = spec.epsilon;
  return ChartFunction(n + 1, n + 1, [g, u, du, n, eps](auto x) {
    using T = scalar_of<decltype(x)>;
    const auto p = x.subspan(1, n);
    const std::vector<T> grad = solve_small(g(p), du(p), n);
    std::vector<T> out(n + 1);
    out[0] = eps * u(p)[0];
    for (std::size_t i = 0; i < n; ++i) out[i + 1] = grad[i] / x[0];
    return out;
  });
}

Potential potential_from_field(const ConeSpec& spec, const ChartFunction& V) {
  const std::size_t n = spec.base.dim();
  const ChartFunction g = spec.base.components();
  const double eps = spec.epsilon;
  auto lift = [n](auto p) {
    using T = scalar_of<decltype(p)>;
    std::vector<T> y(n + 1);
    y[0] = T(1.0);
    for (std::size_t i = 0; i < n; ++i) y[i + 1] = p[i];
    return y;
  };
  Potential pot;
  pot.u = ChartFunction(n, 1, [V, eps, lift](auto p) {
    using T = scalar_of<decltype(p)>;
    const std::vector<T> y = lift(p);
    return std::vector<T>{eps * V(std::span<const T>(y))[0]};
  });
  pot.du = ChartFunction(n, n, [V, g, n, lift](auto p) {
    using T = scalar_of<decltype(p)>;
    const std::vector<T> y = lift(p);
    const std::vector<T> v = V(std::span<const T>(y));
    const std::vector<T> gm = g(p);
    std::vector<T> out(n, T(0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out[i] = out[i] + gm[i * n + j] * v[j + 1];
    return out;
  });
  return pot;
}

double verify_parallel(const MetricField& cone_field, const ChartFunction& V, std::size_t n_samples,
                       std::uint64_t seed) {
  double worst = 0.0;
  for (const auto& y : cone_field.chart().samples(n_samples, seed))
    worst = std::max(worst, max_abs(covariant_derivative(cone_field, V, y)));
  return worst;
}

std::string to_string(ParallelCase c) {
  switch (c) {
    case ParallelCase::Flat: return "flat";
    case ParallelCase::Cosh: return "cosh";
    case ParallelCase::Exp: return "exp";
  }
  return "?";
}

std::string to_string(SplitBranch b) {
  switch (b) {
    case SplitBranch::Cosh: return "cosh";
    case SplitBranch::ExpPlus: return "exp-plus";
    case SplitBranch::ExpMinus: return "exp-minus";
  }
  return "?";
}

ParallelCase classify_parallel_case(int epsilon, double nu) {
  if (epsilon != 1 && epsilon != -1) throw Error(ErrorCode::NotNormalised, "epsilon must be +1 or -1");
  if (nu != 0.0 && nu != 1.0 && nu != -1.0)
    throw Error(ErrorCode::NotNormalised, "g(V,V) = " + std::to_string(nu) + " is not in {-1, 0, 1}");
  if (nu == epsilon) return ParallelCase::Flat;
  if (nu == -epsilon) return ParallelCase::Cosh;
  return ParallelCase::Exp;
}

ParallelFieldReport analyze_parallel_field(const ConeSpec& spec, const ChartFunction& V, std::size_t n_samples,
                                           std::uint64_t seed) {
  const MetricField cone = build_cone(spec);
  const auto samples = cone.chart().samples(n_samples, seed);
  ParallelFieldReport rep;
  const auto [mean, spread] = field_norm_stats(cone, V, samples);
  rep.nu_raw = mean;
  rep.scale = std::abs(mean) < kAcceptTol ? 1.0 : 1.0 / std::sqrt(std::abs(mean));
  const double scale = rep.scale;
  rep.V = ChartFunction(V.in_dim(), V.out_dim(), [V, scale](auto x) {
    auto v = V(x);
    for (auto& c : v) c = c * scale;
    return v;
  });
  rep.nu_spread = spread * scale * scale;
  rep.nu = snap_nu(mean * scale * scale);
  for (const auto& y : samples) rep.residual = std::max(rep.residual, max_abs(covariant_derivative(cone, rep.V, y)));
  // d_r of g^(V, d_r) = eps V^r along the radial line
  for (const auto& y : samples) {
    const Matrix J = rep.V.jacobian(y);
    rep.radial_derivative_of_u = std::max(rep.radial_derivative_of_u, std::abs(J(0, 0)));
  }
  rep.u = potential_from_field(spec, rep.V);
  rep.parallel_case = classify_parallel_case(spec.epsilon, rep.nu);
  rep.accepted = rep.residual < kAcceptTol && rep.nu_spread < kAcceptTol && rep.radial_derivative_of_u < kAcceptTol;
  return rep;
}

PotentialResiduals potential_identities(const ConeSpec& spec, const ChartFunction& V, std::span<const Point> samples) {
  const MetricField cone = build_cone(spec);
  const std::size_t n = spec.base.dim();
  const double eps = spec.epsilon;
  PotentialResiduals res;
  res.nu = snap_nu(field_norm_stats(cone, V, samples).first);
  if (near_unit(res.nu, eps))
    throw Error(ErrorCode::CaseMismatch, "g(V,V) = eps: the potential identities do not apply");

  // u as a base function straight from the definition g^(V, d_r) at r = 1.
  const ChartFunction gc = cone.components();
  const ChartFunction u(n, 1, [V, gc, n](auto p) {
    using T = scalar_of<decltype(p)>;
    std::vector<T> y(n + 1);
    y[0] = T(1.0);
    for (std::size_t i = 0; i < n; ++i) y[i + 1] = p[i];
    const std::vector<T> g = gc(std::span<const T>(y));
    const std::vector<T> v = V(std::span<const T>(y));
    T acc(0.0);
    for (std::size_t j = 0; j <= n; ++j) acc = acc + g[j] * v[j];
    return std::vector<T>{acc};
  });

  for (const auto& y : samples) {
    const double r = y(0);
    const Point p = y.tail(ix(n));
    const double uv = u.value(p)(0);
    const Vector du = u.jacobian(p).row(0).transpose();
    if (du.norm() < kGradientFloor)
      throw Error(ErrorCode::GradientVanishes, "du = 0 at a sample; u has a critical point");
    const Matrix g = metric_eval(spec.base, p);
    const Vector grad = g.ldlt().solve(du);

    Vector expect(ix(n + 1));
    expect(0) = eps * uv;
    expect.tail(ix(n)) = grad / r;
    res.vus = std::max(res.vus, (V.value(y) - expect).cwiseAbs().maxCoeff());

    const Matrix H = u.hessians(p)[0];
    const Christoffel gam = christoffel(spec.base, p);
    Matrix hess = H;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) hess(ix(i), ix(j)) -= gam(k, i, j) * du(ix(k));
    res.nabu = std::max(res.nabu, max_abs(hess + eps * uv * g));

    const double norm = du.dot(grad);
    const double expected = res.nu == 0.0 ? -eps * uv * uv : -eps * (1.0 + uv * uv);
    res.gvv = std::max(res.gvv, std::abs(norm - expected));
  }
  return res;
}

double flatness_certificate(const ConeSpec& spec, const ChartFunction& V, std::size_t n_samples,
                            std::uint64_t seed) {
  const MetricField cone = build_cone(spec);
  const auto samples = cone.chart().samples(n_samples, seed);
  const double nu = field_norm_stats(cone, V, samples).first;
  if (!near_unit(nu, spec.epsilon))
    throw Error(ErrorCode::CaseMismatch, "flatness certificate needs g(V,V) = eps, got " + std::to_string(nu));
  double worst = 0.0;
  for (const auto& y : samples) worst = std::max(worst, riemann(cone, y).max_abs_up());
  return worst;
}

Point SplitReport::flow(double t, const Point& p) const {
  if (t == 0.0) return p;
  return flow_at(base, S_field, p, {t}, 1e-12).at(t).x;
}

SplitReport split_reconstruct(const MetricField& base_field, const Potential& pot, int epsilon, SplitBranch branch,
                              const SplitOptions& opts) {
  if (epsilon != 1 && epsilon != -1) throw Error(ErrorCode::NotNormalised, "epsilon must be +1 or -1");
  const std::size_t n = base_field.dim();
  const ChartFunction g = base_field.components();
  const ChartFunction u = pot.u;
  const ChartFunction du = pot.du;

  SplitReport rep;
  rep.branch = branch;
  rep.epsilon = epsilon;
  rep.base = base_field;
  rep.s_field = ChartFunction(n, 1, [u, branch, epsilon](auto x) {
    using T = scalar_of<decltype(x)>;
    return std::vector<T>{s_of_u(branch, epsilon, u(x)[0])};
  });
  rep.S_field = ChartFunction(n, n, [g, u, du, n, branch, epsilon](auto x) {
    using T = scalar_of<decltype(x)>;
    const T c = ds_du(branch, epsilon, u(x)[0]);
    std::vector<T> ds = du(x);
    for (auto& d : ds) d = d * c;
    return solve_small(g(x), ds, n);
  });

  // Checks at sampled points of the branch region.
  const auto& chart = base_field.chart();
  Rng rng(opts.seed);
  std::size_t checked = 0;
  for (std::size_t attempt = 0; attempt < 20 * opts.check_samples && checked < opts.check_samples; ++attempt) {
    const Point p = chart.sample(rng);
    const double uv = pot.value(p);
    if (pot.differential(p).norm() < kGradientFloor)
      throw Error(ErrorCode::GradientVanishes, "du = 0 at a sampled point");
    if (!in_branch(branch, uv)) continue;
    ++checked;
    const Matrix gm = metric_eval(base_field, p);
    const Vector S = rep.S_field.value(p);
    rep.unit_residual = std::max(rep.unit_residual, std::abs(inner(gm, S, S) + epsilon));
    const double s = rep.s_field.value(p)(0);
    const double c = branch == SplitBranch::Cosh ? std::tanh(-epsilon * s) : 1.0;
    const Matrix model = c * (Matrix::Identity(ix(n), ix(n)) + epsilon * S * (gm * S).transpose());
    rep.nabla_residual = std::max(rep.nabla_residual, max_abs(covariant_derivative(base_field, rep.S_field, p) - model));
  }
  if (checked == 0)
    throw Error(ErrorCode::InvalidArgument, "no sampled point lies in the " + to_string(branch) + " region");

  const double target = level_target(branch);
  rep.level_set = scan_level_set(base_field, pot, target, opts.level_points, opts.seed ^ 0x9e3779b97f4a7c15ULL);
  if (rep.level_set.empty()) throw Error(ErrorCode::InvalidArgument, "level set {s = 0} not found in sampling box");

  const std::size_t nt = std::max<std::size_t>(opts.flow_times, 2);
  for (std::size_t i = 0; i < nt; ++i)
    rep.flow_times.push_back(-opts.flow_extent + 2.0 * opts.flow_extent * static_cast<double>(i) / (nt - 1));
  constexpr double kDelta = 1e-3;  // time step for the Lie derivative
  constexpr double kSpread = 1e-4; // offset for pushing tangent vectors
  std::vector<double> times;
  for (double t : rep.flow_times) {
    times.push_back(t);
    times.push_back(t - kDelta);
    times.push_back(t + kDelta);
  }
  constexpr double kFlowTol = 1e-12;

  for (const Point& q : rep.level_set) {
    const Vector dq = pot.differential(q);
    if (dq.norm() < kGradientFloor) throw Error(ErrorCode::GradientVanishes, "du = 0 on the level set");
    const Matrix Y = tangent_basis(dq);
    const Matrix gq = metric_eval(base_field, q);
    const Matrix gN = Y.transpose() * gq * Y;
    const double s0 = rep.s_field.value(q)(0);

    const auto centre = flow_at(base_field, rep.S_field, q, times, kFlowTol);
    std::vector<std::map<double, FlowSample>> plus, minus;
    for (Eigen::Index a = 0; a < Y.cols(); ++a) {
      plus.push_back(flow_at(base_field, rep.S_field, project_to_level(pot, target, q + kSpread * Y.col(a)), times,
                             kFlowTol));
      minus.push_back(flow_at(base_field, rep.S_field, project_to_level(pot, target, q - kSpread * Y.col(a)), times,
                              kFlowTol));
    }
    auto pushed = [&](double t) {
      Matrix W(ix(n), Y.cols());
      for (Eigen::Index a = 0; a < Y.cols(); ++a)
        W.col(a) = (plus[static_cast<std::size_t>(a)].at(t).x - minus[static_cast<std::size_t>(a)].at(t).x) /
                   (2.0 * kSpread);
      return W;
    };
    auto tangential = [&](double t) {
      const Matrix W = pushed(t);
      return Matrix(W.transpose() * metric_eval(base_field, centre.at(t).x) * W);
    };

    for (double t : rep.flow_times) {
      const FlowSample& fs = centre.at(t);
      const Matrix gx = metric_eval(base_field, fs.x);
      const Vector Sx = rep.S_field.value(fs.x);
      rep.geodesic_residual = std::max(rep.geodesic_residual, (fs.v - Sx).cwiseAbs().maxCoeff());
      rep.level_residual =
          std::max(rep.level_residual, std::abs(rep.s_field.value(fs.x)(0) - (-epsilon * t + s0)));

      const Matrix W = pushed(t);
      const double f2 = model_factor(branch, t);
      double dev = std::abs(inner(gx, fs.v, fs.v) + epsilon);
      dev = std::max(dev, (W.transpose() * gx * fs.v).cwiseAbs().maxCoeff());
      const Matrix h = W.transpose() * gx * W;
      dev = std::max(dev, max_abs(h - f2 * gN) / std::max(1.0, f2));
      rep.pullback_residual = std::max(rep.pullback_residual, dev);

      const Matrix rate = (tangential(t + kDelta) - tangential(t - kDelta)) / (2.0 * kDelta);
      rep.lie_residual =
          std::max(rep.lie_residual, max_abs(rate - model_rate(branch, t) * h) / std::max(1.0, max_abs(h)));
    }
  }

  if (branch != SplitBranch::Cosh) {
    const auto zeros = scan_level_set(base_field, pot, 0.0, 10, opts.seed ^ 0x51ed2705a4e3c1f3ULL);
    if (!zeros.empty()) {
      M0Report m0;
      m0.points = zeros;
      for (const Point& q : zeros) {
        const Matrix Y = tangent_basis(pot.differential(q));
        for (Eigen::Index a = 0; a < Y.cols(); ++a) {
          GeodesicOptions go;
          const GeodesicResult run = geodesic_integrate(base_field, q, Y.col(a), 1.0, 1e-11, go);
          for (const auto& x : run.positions) m0.geodesy_residual = std::max(m0.geodesy_residual, std::abs(pot.value(x)));
        }
      }
      rep.M0 = std::move(m0);
    }
  }
  return rep;
}

ProfileCheck u_profile_along_geodesic(const MetricField& base_field, const Potential& pot, int epsilon, const Point& p,
                                      const Vector& X, double horizon, std::size_t checkpoints) {
  const Matrix g0 = metric_eval(base_field, p);
  if (std::abs(inner(g0, X, X) + epsilon) > 1e-8)
    throw Error(ErrorCode::InvalidArgument, "initial velocity must satisfy g(X,X) = -eps");
  ProfileCheck out;
  GeodesicOptions go;
  go.record_steps = false;
  for (std::size_t i = 1; i <= checkpoints; ++i) go.output_times.push_back(horizon * static_cast<double>(i) / checkpoints);
  const GeodesicResult run = geodesic_integrate(base_field, p, X, horizon, 1e-12, go);
  const double u0 = pot.value(p);
  const double du0 = pot.differential(p).dot(X);
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    const double t = run.times[i];
    const double f = pot.value(run.positions[i]);
    const double pred = u0 * std::cosh(t) + du0 * std::sinh(t);
    out.times.push_back(t);
    out.f.push_back(f);
    out.predicted.push_back(pred);
    out.max_residual = std::max(out.max_residual, std::abs(f - pred) / std::max(1.0, std::abs(pred)));
  }
  if (run.verdict != GeodesicVerdict::ReachedHorizon)
    throw Error(ErrorCode::FlowLeftDomain, "geodesic stopped before the horizon: " + run.detail);
  return out;
}

Point psi_map(int epsilon, const Point& x) {
  Point y = x;
  y(0) = x(0) * std::exp(x(1));
  y(1) = 0.5 * epsilon * x(0) * std::exp(-x(1));
  return y;
}

PsiCheck psi_isometry_check(int epsilon, const MetricField& base_N, std::span<const Point> samples) {
  const std::size_t m = base_N.dim();
  const std::size_t n = m + 2;
  const double eps = epsilon;
  const ChartFunction psi(n, n, [eps](auto x) {
    using T = scalar_of<decltype(x)>;
    std::vector<T> y(x.begin(), x.end());
    y[0] = x[0] * exp(x[1]);
    y[1] = 0.5 * eps * x[0] * exp(-x[1]);
    return y;
  });
  PsiCheck out;
  for (const auto& x : samples) {
    const double r = x(0), s = x(1);
    const Point p = x.tail(ix(m));
    const Matrix gN = metric_eval(base_N, p);
    const Matrix J = psi.jacobian(x);
    const Point y = psi.value(x);

    Matrix wave = Matrix::Zero(ix(n), ix(n));
    wave(0, 1) = wave(1, 0) = 1.0;  // 2 du dv
    Matrix null_only = wave;
    wave.bottomRightCorner(ix(m), ix(m)) = y(0) * y(0) * gN;

    Matrix cone = Matrix::Zero(ix(n), ix(n));
    cone(0, 0) = eps;
    cone(1, 1) = -eps * r * r;
    Matrix null_model = cone;
    cone.bottomRightCorner(ix(m), ix(m)) = r * r * std::exp(2.0 * s) * gN;

    out.total = std::max(out.total, max_abs(J.transpose() * wave * J - cone));
    out.null_part = std::max(out.null_part, max_abs(J.transpose() * null_only * J - null_model));
  }
  return out;
}

double gallot_F_field_check(const MetricField& cone_field, const GeodesicResult& geo) {
  // D/dt F = rho' d_r - gamma' + rho Gamma(gamma', d_r): the t gamma'' term cancels
  // against t Gamma(gamma', gamma') by the geodesic equation.
  double worst = 0.0;
  for (std::size_t i = 0; i < geo.times.size(); ++i) {
    const Point& x = geo.positions[i];
    const Vector& v = geo.velocities[i];
    const double t = geo.times[i];
    const double rho = x(0);
    Vector F = -t * v;
    F(0) += rho;
    const Christoffel gam = christoffel(cone_field, x);
    // dF/dt = rho' d_r - gamma' - t gamma'' with gamma'' = -Gamma(v, v)
    Vector dF = -v + t * gam.contract(v, v);
    dF(0) += v(0);
    const Vector D = dF + gam.contract(v, F);
    worst = std::max(worst, D.cwiseAbs().maxCoeff() / std::max<double>(1.0, F.cwiseAbs().maxCoeff()));
  }
  return worst;
}

}  // namespace conelab
