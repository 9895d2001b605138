#pragma once

#include <optional>
#include <string>
#include <vector>

#include "conelab/chart_function.hpp"
#include "conelab/metric.hpp"
#include "conelab/ode.hpp"

namespace conelab {

enum class GeodesicVerdict { ReachedHorizon, LeftDomain, BlowUpDetected };
std::string to_string(GeodesicVerdict v);

struct GeodesicOptions {
  std::vector<double> output_times;  // recorded exactly, in addition to accepted steps
  bool record_steps = true;
  std::optional<Matrix> frame;       // columns transported along the geodesic
};

struct GeodesicResult {
  std::vector<double> times;
  std::vector<Point> positions;
  std::vector<Vector> velocities;
  std::vector<Matrix> frames;        // only when a frame was requested
  GeodesicVerdict verdict = GeodesicVerdict::ReachedHorizon;
  std::string detail;
  std::optional<double> escape_time_estimate;
  // max |g(v,v) - g(v0,v0)| / max(1, |g(v0,v0)|) over recorded samples
  double speed_drift = 0.0;
  double tol = 0.0;
};

// Integrates gamma'' + Gamma(gamma', gamma') = 0 from (p, v) up to `horizon`.
// `tol` is the relative tolerance of the embedded RK pair (absolute is tol/1000).
GeodesicResult geodesic_integrate(const MetricField& field, const Point& p, const Vector& v, double horizon,
                                  double tol = 1e-9, const GeodesicOptions& opts = {});

// A piecewise smooth path; segment k is a map [0,1] -> chart.
struct Curve {
  std::vector<ChartFunction> segments;

  Point start() const;
  Point end() const;
  Point at(std::size_t segment, double t) const;
  Vector velocity(std::size_t segment, double t) const;

  static Curve polyline(const std::vector<Point>& vertices);
  // Rectangle p -> p+a e_i -> p+a e_i+b e_j -> p+b e_j -> p.
  static Curve rectangle(const Point& p, std::size_t i, std::size_t j, double a, double b);
  void append(const Curve& other);
};

struct TransportResult {
  Matrix frame;
  // max |g(Pu,Pw) - g(u,w)| over the frame columns
  double pairing_residual = 0.0;
};

// Solves dW/dt + Gamma(c', W) = 0 along each segment with adaptive steps.
TransportResult parallel_transport(const MetricField& field, const Curve& curve, const Matrix& frame,
                                   double tol = 1e-10);

}  // namespace conelab
