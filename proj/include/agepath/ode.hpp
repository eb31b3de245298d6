#pragma once

#include "agepath/linalg.hpp"

#include <functional>
#include <string>
#include <vector>

namespace agepath {

using OdeRhs = std::function<Vector(double, const Vector&)>;
using OdeMonitors = std::function<Vector(double, const Vector&)>;

struct IvpSpec {
  OdeRhs rhs;
  OdeMonitors monitors;  // optional
  double t0 = 0.0;
  double t1 = 1.0;
  Vector y0;
  double rtol = 1e-8;
  double atol = 1e-10;
  double max_step = 0.0;  // 0 -> (t1 - t0) / 10
  double first_step = 0.0;  // 0 -> automatic
  // Points in (t0, t1] the integrator must land on exactly.
  std::vector<double> stops;
  // Monitors flagged false here never trigger events.
  std::vector<bool> armed;
  // A monitor whose start value has magnitude <= zero_tol has no reference
  // sign yet; it adopts the first sign it shows beyond zero_tol.
  double zero_tol = 0.0;
  // When set, every monitor is valid while >= -zero_tol and an event is a
  // drop below -zero_tol. A monitor already below it at t0 is an immediate
  // event.
  bool expect_positive = false;
  double event_tol_rel = 1e-8;
  std::size_t max_steps = 200000;
};

struct OdeSample {
  double t;
  Vector y;
  Vector dy;
};

enum class IvpStatus { reached_end, event, failure };

struct IvpResult {
  IvpStatus status = IvpStatus::reached_end;
  // Accepted samples, starting with (t0, y0).
  std::vector<OdeSample> trajectory;
  double t_event = 0.0;
  Vector y_event;
  std::vector<int> event_monitors;
  std::string failure_reason;
  std::size_t rhs_evals = 0;

  // Cubic Hermite dense output over the recorded trajectory.
  Vector dense(double t) const;
  const OdeSample& last() const { return trajectory.back(); }
};

IvpResult integrate(const IvpSpec& spec);

Vector hermite(const OdeSample& a, const OdeSample& b, double t);

}  // namespace agepath
