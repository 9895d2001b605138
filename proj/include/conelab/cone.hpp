#pragma once

#include <span>
#include <string>

#include "conelab/geodesic.hpp"
#include "conelab/metric.hpp"

namespace conelab {

// eps dr^2 + r^2 g on (r, base coords).
struct ConeSpec {
  int epsilon = 1;
  MetricField base;
  Interval r_range{0.0, kInf};
  Interval r_sampling{0.5, 2.0};
};

MetricField build_cone(const ConeSpec& spec);

enum class ConeCase { NullTangent, PlusOne, MinusOne };  // c*eps = 0, +1, -1
std::string to_string(ConeCase c);

// Radial profile rho and base reparametrisation f of the cone geodesic with
// rho(0) = r0, rho'(0) = a and base speed g(X,X) = c L^2.
struct ConeGeodesic {
  double r0 = 1.0;
  double a = 0.0;
  int c = 0;
  double L = 0.0;
  int epsilon = 1;
  ConeCase case_tag = ConeCase::NullTangent;
  // Maximal domain [0, T) from the closed-form table (kInf for unbounded).
  double T = kInf;
  // Time at which the geodesic actually leaves every compact set of the cone
  // (apex reached or base parameter unbounded). Differs from T only when
  // c*eps = 1 and a < 0: rho stays positive there and f continues through the
  // arctangent branch point, so the geodesic extends to all t >= 0.
  double escape_time = kInf;

  double rho(double t) const;
  double f(double t) const;
  double rho_dot(double t) const;
  double f_dot(double t) const;
};

ConeGeodesic closed_form_geodesic(double r0, double a, int c, double L, int epsilon);

struct ConeCurvatureResidual {
  double relation = 0.0;   // R^(X,Y)Z against R(X,Y)Z - eps(g(Y,Z)X - g(X,Z)Y)
  double radial = 0.0;     // components of R^ with a d_r slot
};

// Samples are cone points (r, p).
ConeCurvatureResidual cone_curvature_residual(const ConeSpec& spec, std::span<const Point> samples);

struct ClosedFormComparison {
  double max_deviation = 0.0;   // over checkpoints, max |state difference|
  ConeGeodesic closed_form;
  GeodesicResult numeric;
  std::size_t checkpoints = 0;
  std::size_t compared = 0;      // checkpoints reached by the numeric run
  double horizon = 0.0;
};

// Integrates the cone geodesic from (r0, p) with velocity a d_r + X and compares it
// with (rho(t), beta(f(t))) where beta is the base geodesic through (p, X).
// c and L are recovered from g(X,X).
ClosedFormComparison closed_form_vs_integrator(const ConeSpec& spec, double r0, const Point& p, double a,
                                               const Vector& X, double horizon = 50.0,
                                               std::size_t checkpoints = 100, double tol = 1e-10);

}  // namespace conelab
