#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "conelab/cone.hpp"
#include "conelab/errors.hpp"
#include "conelab/metric.hpp"

namespace conelab {

// Solves A x = b (A is n x n row-major) by Gaussian elimination with partial
// pivoting on the primal values. Works for doubles and dual numbers.
template <class T>
std::vector<T> solve_small(std::vector<T> A, std::vector<T> b, std::size_t n) {
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(primal(A[r * n + c])) > std::abs(primal(A[piv * n + c]))) piv = r;
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(A[c * n + k], A[piv * n + k]);
      std::swap(b[c], b[piv]);
    }
    if (primal(A[c * n + c]) == 0.0) throw Error(ErrorCode::DegenerateMetric, "singular metric in solve");
    for (std::size_t r = c + 1; r < n; ++r) {
      const T m = A[r * n + c] / A[c * n + c];
      for (std::size_t k = c; k < n; ++k) A[r * n + k] = A[r * n + k] - m * A[c * n + k];
      b[r] = b[r] - m * b[c];
    }
  }
  std::vector<T> x(n, T(0.0));
  for (std::size_t i = n; i-- > 0;) {
    T acc = b[i];
    for (std::size_t k = i + 1; k < n; ++k) acc = acc - A[i * n + k] * x[k];
    x[i] = acc / A[i * n + i];
  }
  return x;
}

// A base function u together with its differential du (n partials).
struct Potential {
  ChartFunction u;
  ChartFunction du;

  double value(const Point& p) const { return u.value(p)(0); }
  Vector differential(const Point& p) const { return du.value(p); }
};

// Builds u and du from one generic callable u(std::span<const T>) -> T.
// du is computed by forward differentiation one level above T.
template <class F>
Potential make_potential(std::size_t n, F f) {
  Potential pot;
  pot.u = scalar_function(n, f);
  pot.du = ChartFunction(n, n, [f, n](auto x) {
    using T = scalar_of<decltype(x)>;
    std::vector<T> out(n, T(0.0));
    std::vector<Dual<T>> y(n);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) y[i] = Dual<T>(x[i], T(i == k ? 1.0 : 0.0));
      out[k] = f(std::span<const Dual<T>>(y)).d;
    }
    return out;
  });
  return pot;
}

// V = eps u d_r + (1/r) grad u on the cone chart (r, base coords).
ChartFunction parallel_field_from_potential(const ConeSpec& spec, const Potential& pot);

// u = g^(V, d_r) as a base function (evaluated at r = 1) and du = r g(V_M, .)
// recovered from the tangential part of V.
Potential potential_from_field(const ConeSpec& spec, const ChartFunction& V);

// max over samples and coordinate directions of |nabla^_{d_j} V| (largest component).
double verify_parallel(const MetricField& cone_field, const ChartFunction& V, std::size_t n_samples,
                       std::uint64_t seed = kDefaultSeed);

enum class ParallelCase { Flat, Cosh, Exp };
std::string to_string(ParallelCase c);

// flat if nu = eps, cosh if nu = -eps, exp if nu = 0. NotNormalised otherwise.
ParallelCase classify_parallel_case(int epsilon, double nu);

struct ParallelFieldReport {
  ChartFunction V;          // rescaled so that g^(V,V) is in {-1, 0, 1}
  double residual = 0.0;
  double nu = 0.0;          // normalised
  double nu_raw = 0.0;      // before rescaling (sample mean)
  double nu_spread = 0.0;   // max deviation of g^(V,V) from its mean
  double scale = 1.0;
  Potential u;
  double radial_derivative_of_u = 0.0;  // max |d_r g^(V, d_r)|
  ParallelCase parallel_case = ParallelCase::Exp;
  bool accepted = false;    // residual, spread and d_r u all below 1e-6
};

ParallelFieldReport analyze_parallel_field(const ConeSpec& spec, const ChartFunction& V, std::size_t n_samples,
                                           std::uint64_t seed = kDefaultSeed);

struct PotentialResiduals {
  double vus = 0.0;    // V - (eps u d_r + (1/r) grad u)
  double nabu = 0.0;   // Hess u + eps u g
  double gvv = 0.0;    // g(grad u, grad u) against -eps u^2 or -eps (1 + u^2)
  double nu = 0.0;
};

// Samples are cone points. CaseMismatch if nu = eps, GradientVanishes if du = 0 at a sample.
PotentialResiduals potential_identities(const ConeSpec& spec, const ChartFunction& V, std::span<const Point> samples);

// Largest |R^a_bcd| of the cone over the samples. CaseMismatch unless nu = eps.
double flatness_certificate(const ConeSpec& spec, const ChartFunction& V, std::size_t n_samples,
                            std::uint64_t seed = kDefaultSeed);

enum class SplitBranch { Cosh, ExpPlus, ExpMinus };
std::string to_string(SplitBranch b);

struct SplitOptions {
  std::size_t level_points = 20;
  std::size_t flow_times = 10;
  double flow_extent = 1.0;      // flow times are spread over [-extent, extent]
  std::size_t check_samples = 40;
  std::uint64_t seed = kDefaultSeed;
};

struct M0Report {
  std::vector<Point> points;     // sampled zeros of u
  double geodesy_residual = 0.0; // max |u| along geodesics tangent to {u = 0}
};

struct SplitReport {
  SplitBranch branch = SplitBranch::Cosh;
  int epsilon = -1;
  MetricField base;
  ChartFunction s_field;           // scalar
  ChartFunction S_field;           // grad s
  std::vector<Point> level_set;    // sampled {s = 0}
  std::vector<double> flow_times;
  double unit_residual = 0.0;      // |g(S,S) + eps|
  double nabla_residual = 0.0;     // covariant derivative of S against the model
  double geodesic_residual = 0.0;  // flow velocity against S at the image point
  double level_residual = 0.0;     // |s(phi_t p) + eps t - s(p)|
  double pullback_residual = 0.0;  // pulled back metric against the warped model
  double lie_residual = 0.0;       // d/dt of the pulled back metric against the scaling law
  std::optional<M0Report> M0;      // exp branches only, when u has zeros

  // Flow of S for time t from p (geodesic with initial velocity S|p).
  Point flow(double t, const Point& p) const;
};

// GradientVanishes if du = 0 on the sampled region; FlowLeftDomain if a flow line exits the chart.
SplitReport split_reconstruct(const MetricField& base_field, const Potential& u, int epsilon, SplitBranch branch,
                              const SplitOptions& opts = {});

struct ProfileCheck {
  std::vector<double> times;
  std::vector<double> f;           // u along the geodesic
  std::vector<double> predicted;   // u(p) cosh t + du(X) sinh t
  double max_residual = 0.0;       // |f - predicted| / max(1, |predicted|)
};

// Requires g(X,X) = -eps (InvalidArgument otherwise).
ProfileCheck u_profile_along_geodesic(const MetricField& base_field, const Potential& u, int epsilon, const Point& p,
                                      const Vector& X, double horizon = 5.0, std::size_t checkpoints = 50);

// (r, s, p) -> (r e^s, (eps/2) r e^{-s}, p)
Point psi_map(int epsilon, const Point& x);

struct PsiCheck {
  double total = 0.0;     // pullback of 2 du dv + u^2 g_N against the cone metric
  double null_part = 0.0; // pullback of 2 du dv against eps(dr^2 - r^2 ds^2)
};

// Samples are points (r, s, p) of the cone over -eps ds^2 + e^{2s} g_N.
PsiCheck psi_isometry_check(int epsilon, const MetricField& base_N, std::span<const Point> samples);

// max over recorded samples of |D/dt F| for F(t) = rho(t) d_r - t gamma'(t).
double gallot_F_field_check(const MetricField& cone_field, const GeodesicResult& geodesic);

}  // namespace conelab
