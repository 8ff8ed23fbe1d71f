#include "evcharge/battery.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace evcharge::battery {

namespace {

void check(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void validate_table(const ParamTable& tbl, const std::string& name,
                    bool positive) {
  check(!tbl.empty(), name + ": table must not be empty");
  check(tbl.soc.size() == tbl.value.size(),
        name + ": soc and value columns differ in length");
  for (size_t i = 0; i < tbl.soc.size(); ++i) {
    check(std::isfinite(tbl.soc[i]) && std::isfinite(tbl.value[i]),
          name + ": entries must be finite");
    check(tbl.soc[i] >= 0.0 && tbl.soc[i] <= 1.0,
          name + ": soc breakpoints must lie in [0, 1]");
    if (i > 0)
      check(tbl.soc[i] > tbl.soc[i - 1],
            name + ": soc breakpoints must be strictly increasing");
    if (positive)
      check(tbl.value[i] > 0.0, name + ": values must be > 0");
  }
}

}  // namespace

double ParamTable::at(double s) const {
  if (soc.empty()) throw std::logic_error("ParamTable::at on empty table");
  if (s <= soc.front()) return value.front();
  if (s >= soc.back()) return value.back();
  auto it = std::upper_bound(soc.begin(), soc.end(), s);
  size_t hi = static_cast<size_t>(it - soc.begin());
  size_t lo = hi - 1;
  double w = (s - soc[lo]) / (soc[hi] - soc[lo]);
  return value[lo] + w * (value[hi] - value[lo]);
}

ParamTable flat_table(double v) { return ParamTable{{0.0}, {v}}; }

void CellParams::validate() const {
  validate_table(uoc, "uoc_table", false);
  validate_table(ro, "ro_table", true);
  validate_table(rth, "rth_table", true);
  validate_table(cth, "cth_table", true);
  for (size_t i = 0; i + 1 < uoc.value.size(); ++i)
    check(uoc.value[i + 1] >= uoc.value[i],
          "uoc_table: values must be non-decreasing in SoC");
  for (double v : uoc.value) check(v > 0.0, "uoc_table: values must be > 0");
  check(capacity_ah > 0.0, "capacity_ah: must be > 0");
  check(v_max_cell >= uoc.at(1.0),
        "v_max_cell: must be >= open-circuit voltage at SoC 1");
  check(v_nominal > 0.0, "v_nominal: must be > 0");
}

void PackConfig::validate() const {
  check(n_series >= 1, "n_series: must be >= 1");
  check(n_parallel >= 1, "n_parallel: must be >= 1");
}

PackParams pack_from_cell(const CellParams& cell, const PackConfig& cfg) {
  cell.validate();
  cfg.validate();
  const double ns = static_cast<double>(cfg.n_series);
  const double np = static_cast<double>(cfg.n_parallel);

  auto scaled = [](const ParamTable& t, double k) {
    ParamTable out = t;
    for (double& v : out.value) v *= k;
    return out;
  };

  PackParams pack;
  pack.uoc = scaled(cell.uoc, ns);
  pack.ro = scaled(cell.ro, ns / np);
  pack.rth = scaled(cell.rth, ns / np);
  pack.cth = scaled(cell.cth, np / ns);
  pack.capacity_ah = cell.capacity_ah * np;
  pack.v_max = cell.v_max_cell * ns;
  pack.v_nominal = cell.v_nominal * ns;
  return pack;
}

OperatingParams interp_params(const PackParams& pack, double soc) {
  return OperatingParams{pack.uoc.at(soc), pack.ro.at(soc), pack.rth.at(soc),
                         pack.cth.at(soc)};
}

State step(const PackParams& pack, const State& st, double i_load, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("battery step: dt must be > 0");
  const OperatingParams p = interp_params(pack, st.soc);
  const double tau = p.rth * p.cth;
  // u' = u + (R_Th*I - u) * (1 - exp(-dt/tau)); -expm1 keeps small steps exact
  const double alpha = -std::expm1(-dt / tau);
  State out;
  out.u_th = st.u_th + (p.rth * i_load - st.u_th) * alpha;
  out.soc = st.soc + i_load * dt / (3600.0 * pack.capacity_ah);
  out.t = st.t + dt;
  return out;
}

double terminal_voltage(const PackParams& pack, const State& st,
                        double i_load) {
  const OperatingParams p = interp_params(pack, st.soc);
  return p.uoc + i_load * p.ro + st.u_th;
}

double loss_power(const PackParams& pack, const State& st, double i_load) {
  const OperatingParams p = interp_params(pack, st.soc);
  return i_load * i_load * p.ro + st.u_th * st.u_th / p.rth;
}

}  // namespace evcharge::battery
