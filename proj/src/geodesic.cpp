#include "conelab/geodesic.hpp"

#include <algorithm>
#include <cmath>

#include "conelab/errors.hpp"

namespace conelab {

std::string to_string(GeodesicVerdict v) {
  switch (v) {
    case GeodesicVerdict::ReachedHorizon: return "reached-horizon";
    case GeodesicVerdict::LeftDomain: return "left-domain";
    case GeodesicVerdict::BlowUpDetected: return "blow-up-detected";
  }
  return "?";
}

namespace {

using Idx = Eigen::Index;

}  // namespace

GeodesicResult geodesic_integrate(const MetricField& field, const Point& p, const Vector& v, double horizon,
                                  double tol, const GeodesicOptions& opts) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  field.chart().require(p);
  const auto n = static_cast<Idx>(field.dim());
  if (v.size() != n) throw Error(ErrorCode::InvalidArgument, "velocity dimension mismatch");
  const Idx m = opts.frame ? opts.frame->cols() : 0;
  if (opts.frame && opts.frame->rows() != n) throw Error(ErrorCode::InvalidArgument, "frame dimension mismatch");

  Vector y0(2 * n + n * m);
  y0 << p, v;
  for (Idx c = 0; c < m; ++c) y0.segment(2 * n + c * n, n) = opts.frame->col(c);

  const auto& chart = field.chart();
  auto admissible = [&](const Vector& y) { return chart.contains(y.head(n)); };
  auto rhs = [&](double, const Vector& y) {
    const Christoffel gamma = christoffel(field, y.head(n));
    Vector dy(y.size());
    const Vector vel = y.segment(n, n);
    dy.head(n) = vel;
    dy.segment(n, n) = -gamma.contract(vel, vel);
    if (m > 0) {
      const Matrix a = gamma.along(vel);
      for (Idx c = 0; c < m; ++c) dy.segment(2 * n + c * n, n) = -a * y.segment(2 * n + c * n, n);
    }
    return dy;
  };

  OdeOptions oo;
  oo.rtol = tol;
  oo.atol = tol * 1e-3;
  oo.output_times = opts.output_times;
  oo.record_steps = opts.record_steps;
  const OdeResult r = integrate_dopri(rhs, admissible, y0, 0.0, horizon, oo);

  GeodesicResult out;
  out.tol = tol;
  out.detail = r.detail;
  switch (r.stop) {
    case OdeStop::Horizon: out.verdict = GeodesicVerdict::ReachedHorizon; break;
    case OdeStop::LeftDomain: out.verdict = GeodesicVerdict::LeftDomain; break;
    case OdeStop::BlowUp: out.verdict = GeodesicVerdict::BlowUpDetected; break;
  }
  if (r.escape_time) out.escape_time_estimate = *r.escape_time + 0.5 * r.last_step;

  const Matrix g0 = metric_eval(field, p);
  const double speed0 = inner(g0, v, v);
  const double scale = std::max(1.0, std::abs(speed0));
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    const Vector& y = r.states[k];
    out.times.push_back(r.times[k]);
    out.positions.push_back(y.head(n));
    out.velocities.push_back(y.segment(n, n));
    if (m > 0) {
      Matrix f(n, m);
      for (Idx c = 0; c < m; ++c) f.col(c) = y.segment(2 * n + c * n, n);
      out.frames.push_back(std::move(f));
    }
    const Vector vel = y.segment(n, n);
    const double sp = inner(field.raw(y.head(n)), vel, vel);
    out.speed_drift = std::max(out.speed_drift, std::abs(sp - speed0) / scale);
  }
  return out;
}

Point Curve::start() const { return at(0, 0.0); }
Point Curve::end() const { return at(segments.size() - 1, 1.0); }

Point Curve::at(std::size_t segment, double t) const {
  Vector x(1);
  x[0] = t;
  return segments.at(segment).value(x);
}

Vector Curve::velocity(std::size_t segment, double t) const {
  Vector x(1);
  x[0] = t;
  return segments.at(segment).jacobian(x).col(0);
}

Curve Curve::polyline(const std::vector<Point>& vertices) {
  if (vertices.size() < 2) throw Error(ErrorCode::InvalidArgument, "polyline needs at least two vertices");
  Curve c;
  for (std::size_t k = 0; k + 1 < vertices.size(); ++k) {
    const Point a = vertices[k];
    const Point b = vertices[k + 1];
    c.segments.emplace_back(1, static_cast<std::size_t>(a.size()), [a, b](auto t) {
      using T = scalar_of<decltype(t)>;
      std::vector<T> out(static_cast<std::size_t>(a.size()));
      for (Idx i = 0; i < a.size(); ++i) out[static_cast<std::size_t>(i)] = a[i] + (b[i] - a[i]) * t[0];
      return out;
    });
  }
  return c;
}

Curve Curve::rectangle(const Point& p, std::size_t i, std::size_t j, double a, double b) {
  Point p1 = p, p2 = p, p3 = p;
  p1[static_cast<Idx>(i)] += a;
  p2[static_cast<Idx>(i)] += a;
  p2[static_cast<Idx>(j)] += b;
  p3[static_cast<Idx>(j)] += b;
  return polyline({p, p1, p2, p3, p});
}

void Curve::append(const Curve& other) {
  segments.insert(segments.end(), other.segments.begin(), other.segments.end());
}

TransportResult parallel_transport(const MetricField& field, const Curve& curve, const Matrix& frame, double tol) {
  const auto n = static_cast<Idx>(field.dim());
  if (frame.rows() != n) throw Error(ErrorCode::InvalidArgument, "frame dimension mismatch");
  const Idx m = frame.cols();
  const auto& chart = field.chart();

  Matrix w = frame;
  const Matrix g_start = metric_eval(field, curve.start());
  for (std::size_t s = 0; s < curve.segments.size(); ++s) {
    // Fail loudly if the path itself leaves the chart; stage points are on the path.
    const ChartFunction& seg = curve.segments[s];
    auto admissible = [&](const Vector&) { return true; };
    auto rhs = [&](double t, const Vector& y) {
      Vector tv(1);
      tv[0] = t;
      const Point x = seg.value(tv);
      chart.require(x);
      const Vector vel = seg.jacobian(tv).col(0);
      const Matrix a = christoffel(field, x).along(vel);
      Vector dy(y.size());
      for (Idx c = 0; c < m; ++c) dy.segment(c * n, n) = -a * y.segment(c * n, n);
      return dy;
    };
    for (std::size_t q = 0; q <= 20; ++q) chart.require(curve.at(s, static_cast<double>(q) / 20.0));
    Vector y(n * m);
    for (Idx c = 0; c < m; ++c) y.segment(c * n, n) = w.col(c);
    OdeOptions oo;
    oo.rtol = tol;
    oo.atol = tol * 1e-2;
    oo.record_steps = false;
    OdeResult r;
    try {
      r = integrate_dopri(rhs, admissible, y, 0.0, 1.0, oo);
    } catch (const Error& e) {
      throw Error(ErrorCode::OutOfDomain, std::string("transport path: ") + e.what());
    }
    if (r.stop != OdeStop::Horizon) throw Error(ErrorCode::OutOfDomain, "transport path leaves the chart domain");
    const Vector& yf = r.states.back();
    for (Idx c = 0; c < m; ++c) w.col(c) = yf.segment(c * n, n);
  }

  TransportResult out;
  out.frame = w;
  const Matrix g_end = metric_eval(field, curve.end());
  out.pairing_residual = (w.transpose() * g_end * w - frame.transpose() * g_start * frame).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace conelab
