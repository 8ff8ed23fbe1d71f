#include "evcharge/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace evcharge::engine {

void SimConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt: must be > 0");
  if (!(t_max > dt)) throw std::invalid_argument("t_max: must be > dt");
  if (!(initial_soc >= 0.0 && initial_soc < 1.0))
    throw std::invalid_argument("initial_soc: must lie in [0, 1)");
  if (soc_target && !(*soc_target > initial_soc && *soc_target <= 1.0))
    throw std::invalid_argument("soc_target: must lie in (initial_soc, 1]");
  if (record_every < 1)
    throw std::invalid_argument("record_every: must be >= 1");
  if (!(soc_ceiling > initial_soc))
    throw std::invalid_argument("soc_ceiling: must exceed initial_soc");
  if (!(v_overshoot_tol >= 0.0))
    throw std::invalid_argument("v_overshoot_tol: must be >= 0");
}

const char* strategy_name(StrategyKind k) {
  switch (k) {
    case StrategyKind::CcCv: return "cccv";
    case StrategyKind::Mscc: return "mscc";
    case StrategyKind::MsccReflex: return "mscc-reflex";
  }
  return "?";
}

StrategyKind strategy_from_name(std::string_view name) {
  if (name == "cccv") return StrategyKind::CcCv;
  if (name == "mscc") return StrategyKind::Mscc;
  if (name == "mscc-reflex") return StrategyKind::MsccReflex;
  throw std::invalid_argument("unknown strategy: " + std::string(name) +
                              " (expected cccv, mscc or mscc-reflex)");
}

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::StrategyDone: return "strategy-done";
    case Termination::SocTarget: return "soc-target";
    case Termination::TMax: return "t-max";
    case Termination::Fault: return "fault";
  }
  return "?";
}

const char* coupling_name(Coupling c) {
  return c == Coupling::IdealSource ? "ideal" : "pid";
}

Coupling coupling_from_name(std::string_view name) {
  if (name == "ideal" || name == "ideal-source") return Coupling::IdealSource;
  if (name == "pid" || name == "closed-loop-pid") return Coupling::ClosedLoopPid;
  throw std::invalid_argument("unknown coupling: " + std::string(name) +
                              " (expected ideal or pid)");
}

namespace {

// Strategy dispatch holding the per-run state machine.
class StrategyRunner {
 public:
  StrategyRunner(const Inputs& in, StrategyKind kind)
      : in_(in), kind_(kind) {
    if (kind == StrategyKind::CcCv) {
      st_ = strategy::initial_cccv();
    } else {
      st_ = strategy::initial_mscc();
      currents_ = strategy::stage_currents(in.mscc.i_first, in.mscc.i_last,
                                           in.mscc.n_stages);
    }
  }

  control::Setpoint next(double v_meas, double i_meas, double t) {
    strategy::Decision d;
    switch (kind_) {
      case StrategyKind::CcCv:
        d = strategy::next_setpoint_cccv(in_.cccv, st_, v_meas, i_meas, t);
        break;
      case StrategyKind::Mscc:
        d = strategy::next_setpoint_mscc(in_.mscc, currents_, st_, v_meas, t);
        break;
      case StrategyKind::MsccReflex:
        d = strategy::next_setpoint_mscc_reflex(in_.mscc, in_.reflex,
                                                currents_, st_, v_meas, t);
        break;
    }
    st_ = d.st;
    return d.sp;
  }

  bool done() const { return st_.phase == strategy::Phase::Done; }

 private:
  const Inputs& in_;
  StrategyKind kind_;
  strategy::State st_;
  std::vector<double> currents_;
};

// Converter loss cache; the waveform-level evaluation is refreshed when the
// commanded phase moves by more than 1% (or the port voltage drifts 1%).
class LossCache {
 public:
  double eval(const dab::DabParams& p, const dab::LossParams& lp, double v_out,
              double phi) {
    if (phi == 0.0) return 0.0;
    const bool stale = !valid_ || std::signbit(phi) != std::signbit(phi_) ||
                       std::abs(phi - phi_) > 0.01 * std::abs(phi_) ||
                       std::abs(v_out - v_out_) > 0.01 * v_out_;
    if (stale) {
      losses_ = dab::operating_losses(p, lp, v_out, phi);
      phi_ = phi;
      v_out_ = v_out;
      valid_ = true;
    }
    return losses_.total();
  }

 private:
  bool valid_{false};
  double phi_{0};
  double v_out_{0};
  dab::OperatingLosses losses_;
};

struct FaultSignal {
  bool hit{false};
  std::string reason;
};

}  // namespace

RunResult run(const Inputs& in, StrategyKind kind) {
  in.sim.validate();
  in.dab.validate();
  in.loss.validate();
  in.gains_cc.validate();
  in.gains_cv.validate();
  in.cccv.validate();
  in.mscc.validate();
  in.reflex.validate();

  const SimConfig& sim = in.sim;
  const double dt = sim.dt;
  const bool ideal = sim.coupling == Coupling::IdealSource;
  const double v_guard = in.pack.v_max * (1.0 + sim.v_overshoot_tol);

  StrategyRunner strat(in, kind);
  LossCache loss_cache;

  battery::State bst{sim.initial_soc, 0.0, 0.0};
  control::PidState pid;
  control::Mode prev_mode = control::Mode::Rest;
  double phi_prev = 0.0;

  RunResult res;
  Metrics& m = res.metrics;
  m.terminated_by = Termination::TMax;

  double e_delivered_j = 0.0, e_batt_j = 0.0, e_conv_j = 0.0;
  bool have_prev = false;
  TelemetryRow prev{};

  auto push_row = [&](const TelemetryRow& row, bool record) {
    if (have_prev) {
      const double h = 0.5 * (row.t - prev.t);
      e_delivered_j += h * (prev.v_term * prev.i_batt + row.v_term * row.i_batt);
      e_batt_j += h * (prev.p_batt_loss + row.p_batt_loss);
      e_conv_j += h * (prev.p_conv_loss + row.p_conv_loss);
    }
    prev = row;
    have_prev = true;
    if (record) res.telemetry.push_back(row);
  };

  auto fill_metrics = [&](double t_end, Termination why,
                          const std::string& reason) {
    m.terminated_by = why;
    m.fault_reason = reason;
    m.charge_time_h = t_end / 3600.0;
    m.final_soc = bst.soc;
    m.e_delivered_kwh = e_delivered_j / 3.6e6;
    m.e_batt_loss_kwh = e_batt_j / 3.6e6;
    m.e_conv_loss_kwh = e_conv_j / 3.6e6;
    m.e_total_loss_kwh = m.e_batt_loss_kwh + m.e_conv_loss_kwh;
  };

  // Appends a resting sample so the telemetry always covers the end state.
  auto finish = [&](double t_end, Termination why, const std::string& reason) {
    const battery::OperatingParams bp = battery::interp_params(in.pack, bst.soc);
    TelemetryRow row{t_end,
                     0.0,
                     bp.uoc + bst.u_th,
                     bst.soc,
                     0.0,
                     battery::loss_power(in.pack, bst, 0.0),
                     0.0,
                     control::Mode::Rest};
    push_row(row, true);
    fill_metrics(t_end, why, reason);
  };

  double v_meas = battery::terminal_voltage(in.pack, bst, 0.0);
  double i_meas = 0.0;

  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (t >= sim.t_max) {
      finish(t, Termination::TMax, "");
      return res;
    }

    const control::Setpoint sp = strat.next(v_meas, i_meas, t);
    if (strat.done()) {
      finish(t, Termination::StrategyDone, "");
      return res;
    }

    const battery::OperatingParams bp = battery::interp_params(in.pack, bst.soc);
    const double imax = dab::max_current(in.dab, std::max(v_meas, 1.0));

    double phi = 0.0;
    double i_batt = 0.0;
    FaultSignal fault;
    if (ideal) {
      switch (sp.mode) {
        case control::Mode::ConstantCurrent:
        case control::Mode::DischargePulse: {
          const double want = sp.mode == control::Mode::ConstantCurrent
                                  ? sp.ref
                                  : -sp.ref;
          try {
            phi = dab::phase_for_current(in.dab, std::max(v_meas, 1.0), want);
            i_batt = want;
          } catch (const dab::CapabilityError& e) {
            fault.hit = true;
            fault.reason = e.what();
          }
          break;
        }
        case control::Mode::ConstantVoltage: {
          // Hold the terminal voltage at the reference by solving the
          // battery equation for the current, clamped to the converter.
          double want = (sp.ref - bp.uoc - bst.u_th) / bp.ro;
          want = std::clamp(want, 0.0, imax);
          phi = dab::phase_for_current(in.dab, std::max(v_meas, 1.0), want);
          i_batt = want;
          break;
        }
        case control::Mode::Rest:
          phi = 0.0;
          i_batt = 0.0;
          break;
      }
    } else {
      if (sp.mode == control::Mode::Rest) {
        phi = 0.0;
        i_batt = 0.0;
        prev_mode = control::Mode::Rest;
      } else {
        const control::PidGains& g =
            sp.mode == control::Mode::ConstantVoltage ? in.gains_cv
                                                      : in.gains_cc;
        if (sp.mode != prev_mode) {
          // Bumpless transfer: restart the integral so the previous phase
          // command is reproduced at zero error.
          pid = control::PidState{};
          pid.integral = g.ki > 0.0 ? phi_prev / g.ki : 0.0;
          prev_mode = sp.mode;
        }
        const double err = control::control_error(sp, i_meas, v_meas);
        const control::PidOutput po = control::pid_step(g, pid, err, dt);
        pid = po.next;
        phi = po.u;
        i_batt = dab::avg_output_current(in.dab, std::max(v_meas, 1.0), phi);
      }
    }

    if (fault.hit) {
      finish(t, Termination::Fault, fault.reason);
      return res;
    }

    const double v_term = battery::terminal_voltage(in.pack, bst, i_batt);
    const double p_batt = battery::loss_power(in.pack, bst, i_batt);
    const double p_conv =
        (sp.mode == control::Mode::Rest || phi == 0.0)
            ? 0.0
            : loss_cache.eval(in.dab, in.loss, std::max(v_term, 1.0), phi);

    TelemetryRow row{t, i_batt, v_term, bst.soc, phi, p_batt, p_conv, sp.mode};
    if (ideal && v_term > v_guard) {
      std::ostringstream os;
      os << "terminal voltage " << v_term << " V exceeded " << v_guard
         << " V (pack limit " << in.pack.v_max << " V + "
         << sim.v_overshoot_tol * 100.0 << "% tolerance)";
      push_row(row, true);
      fill_metrics(t, Termination::Fault, os.str());
      return res;
    }
    push_row(row, k % sim.record_every == 0);

    bst = battery::step(in.pack, bst, i_batt, dt);
    phi_prev = phi;
    v_meas = v_term;
    i_meas = i_batt;

    if (bst.soc > sim.soc_ceiling + 1e-12) {
      std::ostringstream os;
      os << "overcharge: SoC " << bst.soc << " exceeded ceiling "
         << sim.soc_ceiling;
      finish(t + dt, Termination::Fault, os.str());
      return res;
    }
    if (sim.soc_target && bst.soc >= *sim.soc_target) {
      finish(t + dt, Termination::SocTarget, "");
      return res;
    }
  }
}

double energy_balance_residual(const battery::PackParams& pack,
                               std::span<const TelemetryRow> rows) {
  if (rows.size() < 2) return 0.0;

  auto u_th_of = [&](const TelemetryRow& r) {
    const battery::OperatingParams p = battery::interp_params(pack, r.soc);
    return r.v_term - p.uoc - r.i_batt * p.ro;
  };
  auto e_cap_of = [&](const TelemetryRow& r) {
    const battery::OperatingParams p = battery::interp_params(pack, r.soc);
    const double u = u_th_of(r);
    return 0.5 * p.cth * u * u;
  };

  double e_in = 0.0, e_oc = 0.0, e_loss = 0.0;
  for (size_t k = 0; k + 1 < rows.size(); ++k) {
    const TelemetryRow& a = rows[k];
    const TelemetryRow& b = rows[k + 1];
    const double h = 0.5 * (b.t - a.t);
    const double uoc_a = battery::interp_params(pack, a.soc).uoc;
    const double uoc_b = battery::interp_params(pack, b.soc).uoc;
    e_in += h * (a.v_term * a.i_batt + b.v_term * b.i_batt);
    e_oc += h * (uoc_a * a.i_batt + uoc_b * b.i_batt);
    e_loss += h * (a.p_batt_loss + b.p_batt_loss);
  }
  const double de_cap = e_cap_of(rows.back()) - e_cap_of(rows.front());
  if (e_in == 0.0) return 0.0;
  return std::abs(e_in - (e_oc + de_cap + e_loss)) / std::abs(e_in);
}

std::vector<CompareRow> compare(const Inputs& in,
                                std::span<const StrategyKind> kinds) {
  if (kinds.empty()) throw std::invalid_argument("compare: no strategies");
  for (size_t i = 0; i < kinds.size(); ++i)
    for (size_t j = i + 1; j < kinds.size(); ++j)
      if (kinds[i] == kinds[j])
        throw std::invalid_argument(std::string("compare: duplicate strategy ") +
                                    strategy_name(kinds[i]));
  std::vector<CompareRow> out;
  out.reserve(kinds.size());
  for (StrategyKind k : kinds)
    out.push_back(CompareRow{k, run(in, k).metrics});
  return out;
}

}  // namespace evcharge::engine
