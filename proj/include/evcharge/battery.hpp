#pragma once

#include <vector>

namespace evcharge::battery {

// Piecewise-linear lookup of a parameter against SoC. Breakpoints are
// strictly increasing within [0, 1]; queries outside the covered range
// clamp to the nearest endpoint.
struct ParamTable {
  std::vector<double> soc;
  std::vector<double> value;

  double at(double s) const;
  bool empty() const { return soc.empty(); }
};

ParamTable flat_table(double v);

// Electrical/electrochemical description of one cell.
struct CellParams {
  ParamTable uoc;  // open-circuit voltage vs SoC [V]
  ParamTable ro;   // ohmic resistance vs SoC [Ohm]
  ParamTable rth;  // polarization resistance vs SoC [Ohm]
  ParamTable cth;  // polarization capacitance vs SoC [F]
  double capacity_ah{2.6};
  double v_max_cell{4.2};  // maximum charging voltage [V]
  double v_nominal{3.6};   // [V]

  void validate() const;  // throws std::invalid_argument naming the field
};

struct PackConfig {
  int n_series{1};
  int n_parallel{1};

  void validate() const;
};

// Cell parameters aggregated to a series/parallel pack: voltage-like values
// scale by n_series, resistances by n_series/n_parallel, capacitances by
// n_parallel/n_series, capacity by n_parallel.
struct PackParams {
  ParamTable uoc, ro, rth, cth;
  double capacity_ah{};
  double v_max{};  // pack charge-voltage ceiling [V]
  double v_nominal{};
};

PackParams pack_from_cell(const CellParams& cell, const PackConfig& cfg);

struct State {
  double soc{0.0};   // fraction of capacity
  double u_th{0.0};  // polarization voltage across the RC pair [V]
  double t{0.0};     // elapsed time [s]
};

struct OperatingParams {
  double uoc;  // [V]
  double ro;   // [Ohm]
  double rth;  // [Ohm]
  double cth;  // [F]
};

OperatingParams interp_params(const PackParams& pack, double soc);

// Advance the state over dt with i_load held constant (positive = charging).
// The RC voltage uses the exact exponential solution, so any dt is stable;
// SoC advances by coulomb counting. Parameters are evaluated at the starting
// SoC.
State step(const PackParams& pack, const State& st, double i_load, double dt);

// U_L = U_oc(soc) + I*R_o(soc) + U_Th. Charging current raises the terminal
// voltage.
double terminal_voltage(const PackParams& pack, const State& st, double i_load);

// I^2*R_o + U_Th^2/R_Th, always >= 0.
double loss_power(const PackParams& pack, const State& st, double i_load);

}  // namespace evcharge::battery
