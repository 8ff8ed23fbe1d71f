#include "evcharge/strategy.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace evcharge::strategy {

namespace {

void check(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

constexpr int kMaxStages = 16;

// Stage-time formula on a fixed-size buffer so the brute-force search can
// evaluate millions of candidates without allocating.
double total_time(std::span<const double> currents,
                  const EquivBatteryParams& eq) {
  double total = 0.0;
  double dt1 = (eq.v_t - eq.v0 - currents[0] * eq.r1) * eq.c1 / currents[0];
  total += std::max(dt1, 0.0);
  for (size_t x = 1; x < currents.size(); ++x) {
    const double dtx =
        (currents[x - 1] - currents[x]) * eq.r1 * eq.c1 / currents[x];
    total += std::max(dtx, 0.0);
  }
  return total;
}

}  // namespace

void CcCvConfig::validate() const {
  check(i_cutoff > 0.0 && i_cc > i_cutoff, "i_cc must be > i_cutoff > 0");
  check(v_max > 0.0, "v_max: must be > 0");
  check(debounce_steps >= 1, "debounce_steps: must be >= 1");
}

void MsccConfig::validate() const {
  check(i_last > 0.0 && i_first > i_last, "i_first must be > i_last > 0");
  check(n_stages >= 2, "n_stages: must be >= 2");
  check(n_stages <= kMaxStages, "n_stages: too many stages");
  check(v_threshold > 0.0, "v_threshold: must be > 0");
  check(debounce_steps >= 1, "debounce_steps: must be >= 1");
}

void ReflexConfig::validate() const {
  check(t_charge > 0.0, "t_charge: must be > 0");
  check(t_rest1 >= 0.0 && t_discharge >= 0.0 && t_rest2 >= 0.0,
        "pulse windows must be >= 0");
  check(cycle_len() > 0.0, "pulse cycle must have positive length");
  check(reflex_duration >= 0.0, "reflex_duration: must be >= 0");
}

void EquivBatteryParams::validate() const {
  check(c1 > 0.0, "c1: must be > 0");
  check(r1 > 0.0, "r1: must be > 0");
  check(v0 > 0.0, "v0: must be > 0");
  check(v_t > v0, "v_t: must be > v0");
}

std::vector<double> stage_currents(double i_first, double i_last,
                                   int n_stages) {
  check(i_last > 0.0 && i_first > i_last,
        "stage_currents: need i_first > i_last > 0");
  check(n_stages >= 2, "stage_currents: need n_stages >= 2");
  const double r =
      std::pow(i_last / i_first, 1.0 / static_cast<double>(n_stages - 1));
  std::vector<double> out(static_cast<size_t>(n_stages));
  for (int k = 0; k < n_stages; ++k)
    out[static_cast<size_t>(k)] = i_first * std::pow(r, k);
  out.front() = i_first;
  out.back() = i_last;
  return out;
}

StageTimePrediction predict_stage_times(std::span<const double> currents,
                                        const EquivBatteryParams& eq) {
  eq.validate();
  check(!currents.empty(), "predict_stage_times: no currents");
  for (size_t i = 0; i < currents.size(); ++i) {
    check(currents[i] > 0.0, "predict_stage_times: currents must be > 0");
    if (i > 0)
      check(currents[i] < currents[i - 1],
            "predict_stage_times: currents must be strictly decreasing");
  }

  StageTimePrediction out;
  out.stage_s.reserve(currents.size());
  double dt1 = (eq.v_t - eq.v0 - currents[0] * eq.r1) * eq.c1 / currents[0];
  if (dt1 < 0.0) {
    dt1 = 0.0;
    ++out.unreachable_stages;
  }
  out.stage_s.push_back(dt1);
  for (size_t x = 1; x < currents.size(); ++x) {
    // V0^x = v_t - I_{x-1}*r1 and V_R1^x = I_x*r1, so v_t cancels.
    double dtx = (currents[x - 1] - currents[x]) * eq.r1 * eq.c1 / currents[x];
    if (dtx < 0.0) {
      dtx = 0.0;
      ++out.unreachable_stages;
    }
    out.stage_s.push_back(dtx);
    }
  for (double s : out.stage_s) out.total_s += s;
  return out;
}

std::vector<double> brute_force_optimal_mid(double i_first, double i_last,
                                            int n_stages,
                                            const EquivBatteryParams& eq,
                                            int grid_points) {
  check(i_last > 0.0 && i_first > i_last,
        "brute_force_optimal_mid: need i_first > i_last > 0");
  check(n_stages >= 2 && n_stages <= kMaxStages,
        "brute_force_optimal_mid: bad n_stages");
  check(grid_points >= 100, "brute_force_optimal_mid: need grid_points >= 100");
  eq.validate();

  const int n_mid = n_stages - 2;
  if (n_mid == 0) return {};

  // Candidate values strictly inside (i_last, i_first).
  const double h = (i_first - i_last) / static_cast<double>(grid_points + 1);
  std::vector<double> grid(static_cast<size_t>(grid_points));
  for (int j = 0; j < grid_points; ++j)
    grid[static_cast<size_t>(j)] = i_last + h * (j + 1);

  std::array<double, kMaxStages> cur{};
  cur[0] = i_first;
  cur[static_cast<size_t>(n_stages - 1)] = i_last;

  std::array<int, kMaxStages> idx{};  // descending grid indices for middles
  std::vector<double> best_mid(static_cast<size_t>(n_mid));
  double best_total = std::numeric_limits<double>::infinity();

  // Enumerate strictly decreasing index tuples: grid[idx[0]] > grid[idx[1]] > ...
  int level = 0;
  idx[0] = grid_points;  // will be decremented to grid_points-1 on entry
  while (level >= 0) {
    --idx[static_cast<size_t>(level)];
    if (idx[static_cast<size_t>(level)] < n_mid - 1 - level) {
      --level;  // exhausted, backtrack
      continue;
    }
    cur[static_cast<size_t>(level + 1)] =
        grid[static_cast<size_t>(idx[static_cast<size_t>(level)])];
    if (level + 1 < n_mid) {
      ++level;
      idx[static_cast<size_t>(level)] = idx[static_cast<size_t>(level - 1)];
      continue;
    }
    const double total =
        total_time({cur.data(), static_cast<size_t>(n_stages)}, eq);
    if (total < best_total) {
      best_total = total;
      for (int m = 0; m < n_mid; ++m)
        best_mid[static_cast<size_t>(m)] = cur[static_cast<size_t>(m + 1)];
    }
  }
  return best_mid;
}

long progress_key(const State& st) {
  int phase_rank = 0;
  switch (st.phase) {
    case Phase::CcBulk: phase_rank = 0; break;
    case Phase::Stage: phase_rank = 0; break;
    case Phase::Reflex: phase_rank = 1; break;
    case Phase::CvTaper: phase_rank = 1; break;
    case Phase::Done: phase_rank = 2; break;
  }
  return static_cast<long>(st.stage) * 4 + phase_rank;
}

State initial_cccv() { return State{Phase::CcBulk, 1, 0, 0.0}; }
State initial_mscc() { return State{Phase::Stage, 1, 0, 0.0}; }

Decision next_setpoint_cccv(const CcCvConfig& cfg, State st, double measured_v,
                            double measured_i, double t) {
  Decision d{{control::Mode::Rest, 0.0}, st};
  switch (st.phase) {
    case Phase::CcBulk:
      d.st.debounce = measured_v >= cfg.v_max ? st.debounce + 1 : 0;
      if (d.st.debounce >= cfg.debounce_steps) {
        d.st.phase = Phase::CvTaper;
        d.st.debounce = 0;
        d.st.phase_start_t = t;
        d.sp = {control::Mode::ConstantVoltage, cfg.v_max};
      } else {
        d.sp = {control::Mode::ConstantCurrent, cfg.i_cc};
      }
      break;
    case Phase::CvTaper:
      d.st.debounce = measured_i <= cfg.i_cutoff ? st.debounce + 1 : 0;
      if (d.st.debounce >= cfg.debounce_steps) {
        d.st.phase = Phase::Done;
        d.st.debounce = 0;
        d.st.phase_start_t = t;
        d.sp = {control::Mode::Rest, 0.0};
      } else {
        d.sp = {control::Mode::ConstantVoltage, cfg.v_max};
      }
      break;
    case Phase::Done:
      d.sp = {control::Mode::Rest, 0.0};
      break;
    default:
      throw std::logic_error("cccv strategy: invalid phase");
  }
  return d;
}

namespace {

Decision advance_stage(const MsccConfig& cfg, std::span<const double> currents,
                       State st, double t) {
  Decision d{{control::Mode::Rest, 0.0}, st};
  if (st.stage >= cfg.n_stages) {
    d.st.phase = Phase::Done;
  } else {
    d.st.phase = Phase::Stage;
    d.st.stage = st.stage + 1;
    d.sp = {control::Mode::ConstantCurrent,
            currents[static_cast<size_t>(d.st.stage - 1)]};
  }
  d.st.debounce = 0;
  d.st.phase_start_t = t;
  return d;
}

}  // namespace

Decision next_setpoint_mscc(const MsccConfig& cfg,
                            std::span<const double> currents, State st,
                            double measured_v, double t) {
  check(currents.size() == static_cast<size_t>(cfg.n_stages),
        "mscc: stage current list does not match n_stages");
  Decision d{{control::Mode::Rest, 0.0}, st};
  switch (st.phase) {
    case Phase::Stage:
      d.st.debounce = measured_v >= cfg.v_threshold ? st.debounce + 1 : 0;
      if (d.st.debounce >= cfg.debounce_steps) return advance_stage(cfg, currents, st, t);
      d.sp = {control::Mode::ConstantCurrent,
              currents[static_cast<size_t>(st.stage - 1)]};
      break;
    case Phase::Done:
      d.sp = {control::Mode::Rest, 0.0};
      break;
    default:
      throw std::logic_error("mscc strategy: invalid phase");
  }
  return d;
}

Decision next_setpoint_mscc_reflex(const MsccConfig& cfg,
                                   const ReflexConfig& rcfg,
                                   std::span<const double> currents, State st,
                                   double measured_v, double t) {
  check(currents.size() == static_cast<size_t>(cfg.n_stages),
        "mscc-reflex: stage current list does not match n_stages");
  Decision d{{control::Mode::Rest, 0.0}, st};
  const double i_stage = currents[static_cast<size_t>(
      std::min(st.stage, cfg.n_stages) - 1)];
  switch (st.phase) {
    case Phase::Stage:
      d.st.debounce = measured_v >= cfg.v_threshold ? st.debounce + 1 : 0;
      if (d.st.debounce >= cfg.debounce_steps) {
        if (rcfg.reflex_duration <= 0.0)
          return advance_stage(cfg, currents, st, t);
        d.st.phase = Phase::Reflex;
        d.st.debounce = 0;
        d.st.phase_start_t = t;
        d.sp = {control::Mode::ConstantCurrent, i_stage};
      } else {
        d.sp = {control::Mode::ConstantCurrent, i_stage};
      }
      break;
    case Phase::Reflex: {
      const double elapsed = t - st.phase_start_t;
      if (elapsed >= rcfg.reflex_duration)
        return advance_stage(cfg, currents, st, t);
      const double off = std::fmod(elapsed, rcfg.cycle_len());
      if (off < rcfg.t_charge) {
        d.sp = {control::Mode::ConstantCurrent, i_stage};
      } else if (off < rcfg.t_charge + rcfg.t_rest1) {
        d.sp = {control::Mode::Rest, 0.0};
      } else if (off < rcfg.t_charge + rcfg.t_rest1 + rcfg.t_discharge) {
        d.sp = {control::Mode::DischargePulse, i_stage};
      } else {
        d.sp = {control::Mode::Rest, 0.0};
      }
      break;
    }
    case Phase::Done:
      d.sp = {control::Mode::Rest, 0.0};
      break;
    default:
      throw std::logic_error("mscc-reflex strategy: invalid phase");
  }
  return d;
}

}  // namespace evcharge::strategy
