#pragma once

#include <string_view>

namespace evcharge::control {

struct PidGains {
  double kp{0.0};
  double ki{0.0};
  double kd{0.0};
  double out_min{-0.25};  // phase-shift saturation bounds
  double out_max{0.25};

  void validate() const;
};

struct PidState {
  double integral{0.0};
  double prev_error{0.0};
  bool initialized{false};
};

struct PidOutput {
  double u{0.0};
  PidState next;
};

// One discrete PID update. The integral freezes while the unclamped output
// saturates in the direction of the error (clamping anti-windup); the
// derivative term is zero on the first call after a reset.
PidOutput pid_step(const PidGains& g, const PidState& s, double error,
                   double dt);

enum class Mode {
  ConstantCurrent,
  ConstantVoltage,
  Rest,
  DischargePulse,
};

// Controller reference. ref is amperes for the current modes and volts for
// constant-voltage; a discharge pulse carries the magnitude of the negative
// current.
struct Setpoint {
  Mode mode{Mode::Rest};
  double ref{0.0};
};

// CC: ref - i, CV: ref - v, rest: 0 - i, discharge: (-ref) - i.
double control_error(const Setpoint& sp, double measured_i, double measured_v);

const char* mode_name(Mode m);
Mode mode_from_name(std::string_view name);

}  // namespace evcharge::control
