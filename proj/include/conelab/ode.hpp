#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "conelab/chart.hpp"

namespace conelab {

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double h_init = 1e-3;
  double h_min = 1e-12;     // below this the run stops
  double max_norm = 1e8;    // state norm treated as blow-up
  std::size_t max_steps = 2'000'000;
  // Extra times (inside (t0, t1]) at which the state is recorded exactly.
  std::vector<double> output_times;
  // Record every accepted step in addition to output_times.
  bool record_steps = true;
};

enum class OdeStop { Horizon, LeftDomain, BlowUp };

struct OdeResult {
  std::vector<double> times;
  std::vector<Vector> states;
  OdeStop stop = OdeStop::Horizon;
  std::string detail;
  // Last accepted time when the run stopped early; the blow-up lies in
  // [escape_time, escape_time + last_step].
  std::optional<double> escape_time;
  double last_step = 0.0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

using OdeRhs = std::function<Vector(double, const Vector&)>;
// Whether a state may be evaluated at all (chart domain of the position part).
using OdeAdmissible = std::function<bool(const Vector&)>;

// Dormand-Prince 5(4) with step-size control. Stage states failing
// `admissible` (or rhs throwing conelab::Error) reject the step and halve it.
OdeResult integrate_dopri(const OdeRhs& rhs, const OdeAdmissible& admissible, const Vector& y0, double t0,
                          double t1, const OdeOptions& opts);

}  // namespace conelab
