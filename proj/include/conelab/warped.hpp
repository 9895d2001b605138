#pragma once

#include <optional>
#include <span>
#include <string>

#include "conelab/geodesic.hpp"
#include "conelab/metric.hpp"

namespace conelab {

enum class WarpKind { Cosh, Exp, Sinh, Cos, Sin, Custom };

// Warping function f(s) as a 1 -> 1 chart function.
struct Warp {
  WarpKind kind = WarpKind::Cosh;
  std::string name = "cosh";
  ChartFunction f;

  double operator()(double s) const;
  double derivative(double s) const;
  double second_derivative(double s) const;
};

Warp warp_cosh();
Warp warp_exp();
Warp warp_sinh();
Warp warp_cos();
Warp warp_sin();
Warp warp_custom(std::string name, ChartFunction f);

// -eps ds^2 + f(s)^2 g_N on (s, base coords).
struct WarpedSpec {
  int epsilon = -1;
  Warp warp = warp_cosh();
  MetricField base;
  Interval s_range{-kInf, kInf};
  std::optional<Interval> s_sampling;
};

MetricField build_warped(const WarpedSpec& spec);

// Samples are points (s, p).
double warped_connection_residual(const WarpedSpec& spec, std::span<const Point> samples);

enum class Completeness { Complete, Incomplete, Undetermined };
enum class CompletenessClause { Cosh, ExpDefinite, ExpIndefinite, BaseIncomplete };
std::string to_string(Completeness c);
std::string to_string(CompletenessClause c);

struct GeodesicWitness {
  Point p;
  Vector v;
  GeodesicResult run;
  double escape_time = kInf;
  // max deviation of e^{s(t)} from the affine function through its endpoints' data
  double affine_residual = 0.0;
};

struct CompletenessVerdict {
  Completeness verdict = Completeness::Undetermined;
  CompletenessClause reason = CompletenessClause::Cosh;
  std::optional<GeodesicWitness> witness;
  bool definite = false;
};

// Declared base completeness, signature tested on 50 samples.
// Throws UnsupportedWarp unless the warp is cosh or exp.
CompletenessVerdict completeness_verdict(const WarpedSpec& spec, bool base_complete, std::uint64_t seed = kDefaultSeed);

struct SpotCheck {
  std::size_t runs = 0;
  std::size_t escaped = 0;
  double max_speed_drift = 0.0;
};

// Random geodesics from random sample points, integrated to `horizon`.
SpotCheck completeness_spot_check(const WarpedSpec& spec, std::size_t n_geodesics, double horizon,
                                  std::uint64_t seed = kDefaultSeed);

// A geodesic starting tangent to the N-slice has base part gamma with
// nabla^N gamma' = -2 (f'/f) s' gamma'. Returns the largest violation along the run.
double slice_pregeodesic_residual(const WarpedSpec& spec, const Point& p, const Vector& X, double horizon);

enum class DoublyWarpedForm { Plus, Minus };

// Plus:  ds^2 + cos^2(s) g1 + sin^2(s) g2
// Minus: -ds^2 + cosh^2(s) g1 + sinh^2(s) g2
// on (s, coords of g1, coords of g2).
MetricField build_doubly_warped(DoublyWarpedForm form, const MetricField& g1, const MetricField& g2,
                                Interval s_range, std::optional<Interval> s_sampling = std::nullopt);

}  // namespace conelab
