#pragma once

#include <span>
#include <vector>

#include "evcharge/control.hpp"

namespace evcharge::strategy {

struct CcCvConfig {
  double i_cc{47.5};     // bulk-phase current [A]
  double v_max{147.0};   // pack voltage threshold [V]
  double i_cutoff{4.55}; // termination current [A]
  int debounce_steps{5};

  void validate() const;
};

struct MsccConfig {
  double i_first{54.6};     // stage-1 current [A]
  double i_last{4.55};      // final-stage current [A]
  int n_stages{5};
  double v_threshold{147.0}; // pack voltage triggering stage advance [V]
  int debounce_steps{5};

  void validate() const;
};

// One pulse-train cycle is charge / rest / discharge / rest; a reflex period
// of reflex_duration runs at the end of every charging stage.
struct ReflexConfig {
  double t_charge{0.6};        // [s]
  double t_rest1{0.1};         // [s]
  double t_discharge{0.2};     // [s]
  double t_rest2{0.1};         // [s]
  double reflex_duration{60.0}; // [s]

  double cycle_len() const { return t_charge + t_rest1 + t_discharge + t_rest2; }
  void validate() const;
};

// Geometric progression from i_first to i_last. For five stages the middles
// satisfy I3 = sqrt(I1*I5), I4 = sqrt(I3*I5), I2 = sqrt(I1*I3).
std::vector<double> stage_currents(double i_first, double i_last, int n_stages);

// Series equivalent (capacitor C1 + resistor R1 behind terminal voltage)
// used by the stage-time predictor.
struct EquivBatteryParams {
  double c1;   // [F]
  double r1;   // [Ohm]
  double v0;   // initial terminal voltage [V]
  double v_t;  // stage-end terminal voltage [V]

  void validate() const;
};

struct StageTimePrediction {
  std::vector<double> stage_s;
  double total_s{0.0};
  int unreachable_stages{0};  // stages whose predicted time clamped to zero
};

// dt1 = (v_t - v0 - I1*r1)*c1/I1, then dt_x = (I_{x-1} - I_x)*r1*c1/I_x for
// the later stages. A negative stage time is reported as zero and counted in
// unreachable_stages.
StageTimePrediction predict_stage_times(std::span<const double> currents,
                                        const EquivBatteryParams& eq);

// Exhaustive grid search over the middle-stage currents (each strictly
// between its neighbors) minimizing the predicted total time. Serves as the
// independent optimality oracle for stage_currents.
std::vector<double> brute_force_optimal_mid(double i_first, double i_last,
                                            int n_stages,
                                            const EquivBatteryParams& eq,
                                            int grid_points);

enum class Phase { CcBulk, CvTaper, Stage, Reflex, Done };

struct State {
  Phase phase{Phase::CcBulk};
  int stage{1};
  int debounce{0};
  double phase_start_t{0.0};
};

// Lexicographic progress key (stage, then phase within the stage); it never
// decreases and Done is absorbing.
long progress_key(const State& st);

struct Decision {
  control::Setpoint sp;
  State st;
};

State initial_cccv();
State initial_mscc();

Decision next_setpoint_cccv(const CcCvConfig& cfg, State st, double measured_v,
                            double measured_i, double t);

Decision next_setpoint_mscc(const MsccConfig& cfg,
                            std::span<const double> currents, State st,
                            double measured_v, double t);

Decision next_setpoint_mscc_reflex(const MsccConfig& cfg,
                                   const ReflexConfig& rcfg,
                                   std::span<const double> currents, State st,
                                   double measured_v, double t);

}  // namespace evcharge::strategy
