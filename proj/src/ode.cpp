#include "conelab/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "conelab/errors.hpp"

namespace conelab {

namespace {

constexpr std::array<double, 7> kC{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr std::array<double, 7> kB5{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr std::array<double, 7> kB4{5179.0 / 57600, 0.0, 7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

enum class Attempt { Ok, Domain };

struct StepOut {
  Attempt status = Attempt::Ok;
  Vector y5;
  double err = 0.0;
};

StepOut attempt(const OdeRhs& rhs, const OdeAdmissible& admissible, double t, const Vector& y, double h,
                const OdeOptions& opts) {
  std::array<Vector, 7> k;
  StepOut out;
  try {
    for (int s = 0; s < 7; ++s) {
      Vector ys = y;
      for (int j = 0; j < s; ++j) ys += h * kA[s][j] * k[static_cast<std::size_t>(j)];
      if (!ys.allFinite() || !admissible(ys)) {
        out.status = Attempt::Domain;
        return out;
      }
      k[static_cast<std::size_t>(s)] = rhs(t + kC[static_cast<std::size_t>(s)] * h, ys);
      if (!k[static_cast<std::size_t>(s)].allFinite()) {
        out.status = Attempt::Domain;
        return out;
      }
      if (s == 6) out.y5 = ys;  // FSAL: stage 7 is evaluated at the 5th order solution
    }
  } catch (const Error&) {
    out.status = Attempt::Domain;
    return out;
  }
  Vector e = Vector::Zero(y.size());
  for (std::size_t s = 0; s < 7; ++s) e += h * (kB5[s] - kB4[s]) * k[s];
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double sc = opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(out.y5[i]));
    acc += (e[i] / sc) * (e[i] / sc);
  }
  out.err = std::sqrt(acc / static_cast<double>(y.size()));
  return out;
}

}  // namespace

OdeResult integrate_dopri(const OdeRhs& rhs, const OdeAdmissible& admissible, const Vector& y0, double t0,
                          double t1, const OdeOptions& opts) {
  if (!(t1 > t0)) throw Error(ErrorCode::InvalidArgument, "integration interval must have t1 > t0");
  if (!admissible(y0)) throw Error(ErrorCode::OutOfDomain, "initial state outside domain");

  std::vector<double> outs;
  for (double t : opts.output_times)
    if (t > t0 && t <= t1) outs.push_back(t);
  std::sort(outs.begin(), outs.end());
  outs.erase(std::unique(outs.begin(), outs.end()), outs.end());
  std::size_t next_out = 0;

  OdeResult res;
  res.times.push_back(t0);
  res.states.push_back(y0);

  double t = t0;
  Vector y = y0;
  double h = std::min(opts.h_init, t1 - t0);
  bool last_reject_domain = false;

  while (t < t1) {
    if (res.accepted + res.rejected >= opts.max_steps) {
      res.stop = OdeStop::BlowUp;
      res.detail = "step budget exhausted";
      res.escape_time = t;
      return res;
    }
    const double target = next_out < outs.size() ? outs[next_out] : t1;
    const bool clamped = t + h >= target;
    const double h_try = clamped ? target - t : h;

    StepOut st = attempt(rhs, admissible, t, y, h_try, opts);
    if (st.status == Attempt::Domain || st.err > 1.0) {
      ++res.rejected;
      last_reject_domain = st.status == Attempt::Domain;
      res.last_step = h_try;
      h = last_reject_domain ? 0.5 * h_try : h_try * std::clamp(0.9 * std::pow(st.err, -0.2), 0.1, 0.9);
      if (h < opts.h_min) {
        res.stop = last_reject_domain ? OdeStop::LeftDomain : OdeStop::BlowUp;
        res.detail = last_reject_domain ? "stage left the domain at step-size floor" : "step size underflow";
        res.escape_time = t;
        return res;
      }
      continue;
    }

    ++res.accepted;
    last_reject_domain = false;
    t = clamped ? target : t + h_try;
    y = st.y5;
    const bool at_output = clamped && next_out < outs.size();
    if (at_output) ++next_out;
    if (opts.record_steps || at_output || t >= t1) {
      res.times.push_back(t);
      res.states.push_back(y);
    }
    if (y.norm() > opts.max_norm) {
      res.stop = OdeStop::BlowUp;
      res.detail = "state norm exceeded bound";
      res.escape_time = t;
      res.last_step = h_try;
      return res;
    }
    const double grow = st.err > 0.0 ? std::clamp(0.9 * std::pow(st.err, -0.2), 0.2, 5.0) : 5.0;
    // A step shortened to hit an output time does not shrink the proposal.
    h = clamped ? std::max(h, h_try * grow) : h_try * grow;
  }
  res.stop = OdeStop::Horizon;
  return res;
}

}  // namespace conelab
