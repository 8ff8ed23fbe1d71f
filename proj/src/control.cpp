#include "evcharge/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace evcharge::control {

void PidGains::validate() const {
  if (!(std::isfinite(kp) && std::isfinite(ki) && std::isfinite(kd)))
    throw std::invalid_argument("gains must be finite");
  if (ki < 0.0) throw std::invalid_argument("ki: must be >= 0");
  if (!(out_min < out_max))
    throw std::invalid_argument("out_min must be < out_max");
}

PidOutput pid_step(const PidGains& g, const PidState& s, double error,
                   double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("pid_step: dt must be > 0");

  const double deriv = s.initialized ? (error - s.prev_error) / dt : 0.0;
  const double integral_new = s.integral + error * dt;
  const double u_raw = g.kp * error + g.ki * integral_new + g.kd * deriv;

  // Freeze the integral when the unclamped output saturates in the direction
  // of the error.
  const bool windup = (u_raw > g.out_max && error > 0.0) ||
                      (u_raw < g.out_min && error < 0.0);
  PidOutput out;
  out.next.integral = windup ? s.integral : integral_new;
  out.next.prev_error = error;
  out.next.initialized = true;
  const double u = g.kp * error + g.ki * out.next.integral + g.kd * deriv;
  out.u = std::clamp(u, g.out_min, g.out_max);
  return out;
}

double control_error(const Setpoint& sp, double measured_i, double measured_v) {
  switch (sp.mode) {
    case Mode::ConstantCurrent:
      return sp.ref - measured_i;
    case Mode::ConstantVoltage:
      return sp.ref - measured_v;
    case Mode::Rest:
      return 0.0 - measured_i;
    case Mode::DischargePulse:
      return -sp.ref - measured_i;
  }
  return 0.0;
}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::ConstantCurrent: return "cc";
    case Mode::ConstantVoltage: return "cv";
    case Mode::Rest: return "rest";
    case Mode::DischargePulse: return "discharge";
  }
  return "?";
}

Mode mode_from_name(std::string_view name) {
  if (name == "cc") return Mode::ConstantCurrent;
  if (name == "cv") return Mode::ConstantVoltage;
  if (name == "rest") return Mode::Rest;
  if (name == "discharge") return Mode::DischargePulse;
  throw std::invalid_argument("unknown setpoint mode: " + std::string(name));
}

}  // namespace evcharge::control
