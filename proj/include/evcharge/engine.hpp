#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evcharge/battery.hpp"
#include "evcharge/control.hpp"
#include "evcharge/dab.hpp"
#include "evcharge/strategy.hpp"

namespace evcharge::engine {

enum class Coupling { IdealSource, ClosedLoopPid };
enum class StrategyKind { CcCv, Mscc, MsccReflex };
enum class Termination { StrategyDone, SocTarget, TMax, Fault };

struct SimConfig {
  double dt{0.01};        // [s]
  double t_max{144000.0}; // safety cap [s]
  Coupling coupling{Coupling::IdealSource};
  double initial_soc{0.2};
  std::optional<double> soc_target;
  int record_every{100};       // telemetry decimation; energies use every step
  double soc_ceiling{1.0};     // exceeding it is an overcharge fault
  double v_overshoot_tol{0.01}; // fraction of pack v_max, ideal-source guard

  void validate() const;
};

struct Inputs {
  battery::PackParams pack;
  dab::DabParams dab;
  dab::LossParams loss;
  control::PidGains gains_cc;
  control::PidGains gains_cv;
  strategy::CcCvConfig cccv;
  strategy::MsccConfig mscc;
  strategy::ReflexConfig reflex;
  SimConfig sim;
};

struct TelemetryRow {
  double t;            // [s]
  double i_batt;       // [A]
  double v_term;       // [V]
  double soc;
  double phi;          // commanded phase shift (fraction of period)
  double p_batt_loss;  // [W]
  double p_conv_loss;  // [W]
  control::Mode mode;
};

struct Metrics {
  double charge_time_h{0};
  double e_batt_loss_kwh{0};
  double e_conv_loss_kwh{0};
  double e_total_loss_kwh{0};
  double e_delivered_kwh{0};
  double final_soc{0};
  Termination terminated_by{Termination::StrategyDone};
  std::string fault_reason;  // empty unless terminated_by == Fault
};

struct RunResult {
  Metrics metrics;
  std::vector<TelemetryRow> telemetry;
};

const char* strategy_name(StrategyKind k);
StrategyKind strategy_from_name(std::string_view name);
const char* termination_name(Termination t);
const char* coupling_name(Coupling c);
Coupling coupling_from_name(std::string_view name);

// Fixed-step loop: strategy -> setpoint -> (PID or ideal source) -> phase ->
// converter current -> battery step, with trapezoid energy accounting.
RunResult run(const Inputs& in, StrategyKind kind);

// |int(v*i) - int(uoc*i) - dE_cap - int(p_loss)| / int(v*i), reconstructed
// from undecimated telemetry. Zero-energy runs return 0.
double energy_balance_residual(const battery::PackParams& pack,
                               std::span<const TelemetryRow> rows);

struct CompareRow {
  StrategyKind kind;
  Metrics metrics;
};

// One run per strategy from identical initial conditions.
std::vector<CompareRow> compare(const Inputs& in,
                                std::span<const StrategyKind> kinds);

}  // namespace evcharge::engine
