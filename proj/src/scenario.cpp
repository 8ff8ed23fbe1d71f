#include "evcharge/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace evcharge::config {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ScenarioError(msg); }

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!ok.count(it.key()))
      fail(path + ": unknown key '" + it.key() + "'");
  }
}

double get_num(const json& j, const std::string& path, const char* key,
               double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) fail(path + "." + key + ": expected a number");
  return v.get<double>();
}

int get_int(const json& j, const std::string& path, const char* key,
            int fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) fail(path + "." + key + ": expected an integer");
  return v.get<int>();
}

battery::ParamTable get_table(const json& j, const std::string& path,
                              const char* key,
                              const battery::ParamTable& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  const std::string p = path + "." + key;
  if (!v.is_array()) fail(p + ": expected an array of [soc, value] pairs");
  battery::ParamTable t;
  for (const json& row : v) {
    if (!row.is_array() || row.size() != 2 || !row[0].is_number() ||
        !row[1].is_number())
      fail(p + ": each entry must be a [soc, value] number pair");
    t.soc.push_back(row[0].get<double>());
    t.value.push_back(row[1].get<double>());
  }
  return t;
}

void parse_cell(const json& j, const std::string& path, battery::CellParams& c) {
  check_keys(j, path,
             {"uoc_table", "ro_table", "rth_table", "cth_table", "capacity_ah",
              "v_max_cell", "v_nominal"});
  c.uoc = get_table(j, path, "uoc_table", c.uoc);
  c.ro = get_table(j, path, "ro_table", c.ro);
  c.rth = get_table(j, path, "rth_table", c.rth);
  c.cth = get_table(j, path, "cth_table", c.cth);
  c.capacity_ah = get_num(j, path, "capacity_ah", c.capacity_ah);
  c.v_max_cell = get_num(j, path, "v_max_cell", c.v_max_cell);
  c.v_nominal = get_num(j, path, "v_nominal", c.v_nominal);
}

void parse_gains(const json& j, const std::string& path,
                 control::PidGains& g) {
  check_keys(j, path, {"kp", "ki", "kd"});
  g.kp = get_num(j, path, "kp", g.kp);
  g.ki = get_num(j, path, "ki", g.ki);
  g.kd = get_num(j, path, "kd", g.kd);
}

}  // namespace

Scenario Scenario::defaults() {
  Scenario s;

  // Stand-in parameter set for a Panasonic 18650B-class cell. The published
  // curves for this cell are not numerically recoverable, so these tables are
  // a documented approximation: the open-circuit voltage follows the usual
  // Li-ion shape and both resistances rise steeply toward the full-charge
  // knee, where charge-transfer and diffusion impedance dominate. The single
  // RC pair stands in for the slow diffusion dynamics as well, hence the
  // large equivalent capacitance. Override any of them in the scenario file
  // for a specific cell.
  s.cell.uoc = battery::ParamTable{
      {0.00, 0.05, 0.10, 0.20, 0.30, 0.40, 0.50, 0.60, 0.70, 0.80, 0.90, 0.95,
       1.00},
      {3.00, 3.22, 3.32, 3.45, 3.53, 3.59, 3.65, 3.72, 3.80, 3.89, 4.00, 4.08,
       4.20}};
  s.cell.ro = battery::ParamTable{
      {0.00, 0.10, 0.20, 0.50, 0.80, 0.88, 0.93, 0.97, 1.00},
      {0.034, 0.018, 0.014, 0.013, 0.016, 0.022, 0.035, 0.077, 0.140}};
  s.cell.rth = battery::ParamTable{
      {0.00, 0.10, 0.20, 0.50, 0.80, 0.88, 0.93, 0.97, 1.00},
      {0.121, 0.077, 0.060, 0.055, 0.072, 0.110, 0.240, 0.480, 0.800}};
  s.cell.cth = battery::flat_table(40000.0);
  s.cell.capacity_ah = 2.6;
  s.cell.v_max_cell = 4.2;
  s.cell.v_nominal = 3.6;

  s.pack.n_series = 35;
  s.pack.n_parallel = 35;

  s.dab = dab::DabParams{};    // 200 V / 20 kHz / 15 uH, n = 150/200
  s.loss = dab::LossParams{};  // k_reflect defaults to the turns ratio

  s.gains_cc = control::PidGains{2e-4, 0.05, 0.0, -0.25, 0.25};
  s.gains_cv = control::PidGains{5e-4, 0.1, 0.0, -0.25, 0.25};

  s.cccv = strategy::CcCvConfig{};    // 47.5 A bulk, 147 V, 0.05C cutoff
  s.mscc = strategy::MsccConfig{};    // 0.6C..0.05C over five stages at 147 V
  s.reflex = strategy::ReflexConfig{};

  s.sim = engine::SimConfig{};
  return s;
}

engine::Inputs Scenario::inputs() const {
  engine::Inputs in;
  in.pack = battery::pack_from_cell(cell, pack);
  in.dab = dab;
  in.loss = loss;
  in.gains_cc = gains_cc;
  in.gains_cv = gains_cv;
  in.cccv = cccv;
  in.mscc = mscc;
  in.reflex = reflex;
  in.sim = sim;
  return in;
}

void Scenario::validate() const {
  auto guard = [](const char* path, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      fail(std::string(path) + ": " + e.what());
    }
  };
  guard("battery.cell", [&] { cell.validate(); });
  guard("battery.pack", [&] { pack.validate(); });
  guard("converter", [&] { dab.validate(); });
  guard("converter.loss", [&] { loss.validate(); });
  guard("control.cc", [&] { gains_cc.validate(); });
  guard("control.cv", [&] { gains_cv.validate(); });
  guard("strategies.cccv", [&] { cccv.validate(); });
  guard("strategies.mscc", [&] { mscc.validate(); });
  guard("strategies.reflex", [&] { reflex.validate(); });
  guard("sim", [&] { sim.validate(); });
}

Scenario scenario_from_json(const std::string& text,
                            const std::string& origin) {
  json root;
  try {
    root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    fail(origin + ": " + e.what());
  }

  Scenario s = Scenario::defaults();
  check_keys(root, origin,
             {"battery", "converter", "control", "strategies", "sim"});

  if (root.contains("battery")) {
    const json& b = root.at("battery");
    check_keys(b, "battery", {"cell", "pack"});
    if (b.contains("cell")) parse_cell(b.at("cell"), "battery.cell", s.cell);
    if (b.contains("pack")) {
      const json& p = b.at("pack");
      check_keys(p, "battery.pack", {"n_series", "n_parallel"});
      s.pack.n_series = get_int(p, "battery.pack", "n_series", s.pack.n_series);
      s.pack.n_parallel =
          get_int(p, "battery.pack", "n_parallel", s.pack.n_parallel);
    }
  }

  if (root.contains("converter")) {
    const json& c = root.at("converter");
    check_keys(c, "converter",
               {"v_in", "turns_ratio", "leakage_l", "f_s", "dead_time",
                "phi_limit", "loss"});
    s.dab.v_in = get_num(c, "converter", "v_in", s.dab.v_in);
    s.dab.n = get_num(c, "converter", "turns_ratio", s.dab.n);
    s.dab.leakage_l = get_num(c, "converter", "leakage_l", s.dab.leakage_l);
    s.dab.f_s = get_num(c, "converter", "f_s", s.dab.f_s);
    s.dab.dead_time = get_num(c, "converter", "dead_time", s.dab.dead_time);
    s.dab.phi_limit = get_num(c, "converter", "phi_limit", s.dab.phi_limit);
    s.loss.k_reflect = s.dab.n;  // K follows the turns ratio unless given
    if (c.contains("loss")) {
      const json& l = c.at("loss");
      check_keys(l, "converter.loss",
                 {"rds_on_primary", "rds_on_secondary", "k_reflect", "t_r"});
      s.loss.rds_on_primary =
          get_num(l, "converter.loss", "rds_on_primary", s.loss.rds_on_primary);
      s.loss.rds_on_secondary = get_num(l, "converter.loss", "rds_on_secondary",
                                        s.loss.rds_on_secondary);
      s.loss.k_reflect =
          get_num(l, "converter.loss", "k_reflect", s.loss.k_reflect);
      s.loss.t_r = get_num(l, "converter.loss", "t_r", s.loss.t_r);
    }
  }

  if (root.contains("control")) {
    const json& c = root.at("control");
    check_keys(c, "control", {"cc", "cv", "phi_min", "phi_max"});
    if (c.contains("cc")) parse_gains(c.at("cc"), "control.cc", s.gains_cc);
    if (c.contains("cv")) parse_gains(c.at("cv"), "control.cv", s.gains_cv);
    const double lo = get_num(c, "control", "phi_min", s.gains_cc.out_min);
    const double hi = get_num(c, "control", "phi_max", s.gains_cc.out_max);
    s.gains_cc.out_min = s.gains_cv.out_min = lo;
    s.gains_cc.out_max = s.gains_cv.out_max = hi;
  }

  if (root.contains("strategies")) {
    const json& st = root.at("strategies");
    check_keys(st, "strategies", {"cccv", "mscc", "reflex"});
    if (st.contains("cccv")) {
      const json& c = st.at("cccv");
      check_keys(c, "strategies.cccv",
                 {"i_cc", "v_max", "i_cutoff", "debounce_steps"});
      s.cccv.i_cc = get_num(c, "strategies.cccv", "i_cc", s.cccv.i_cc);
      s.cccv.v_max = get_num(c, "strategies.cccv", "v_max", s.cccv.v_max);
      s.cccv.i_cutoff =
          get_num(c, "strategies.cccv", "i_cutoff", s.cccv.i_cutoff);
      s.cccv.debounce_steps = get_int(c, "strategies.cccv", "debounce_steps",
                                      s.cccv.debounce_steps);
    }
    if (st.contains("mscc")) {
      const json& c = st.at("mscc");
      check_keys(c, "strategies.mscc",
                 {"i_first", "i_last", "n_stages", "v_threshold",
                  "debounce_steps"});
      s.mscc.i_first = get_num(c, "strategies.mscc", "i_first", s.mscc.i_first);
      s.mscc.i_last = get_num(c, "strategies.mscc", "i_last", s.mscc.i_last);
      s.mscc.n_stages =
          get_int(c, "strategies.mscc", "n_stages", s.mscc.n_stages);
      s.mscc.v_threshold =
          get_num(c, "strategies.mscc", "v_threshold", s.mscc.v_threshold);
      s.mscc.debounce_steps = get_int(c, "strategies.mscc", "debounce_steps",
                                      s.mscc.debounce_steps);
    }
    if (st.contains("reflex")) {
      const json& c = st.at("reflex");
      check_keys(c, "strategies.reflex",
                 {"t_charge", "t_rest1", "t_discharge", "t_rest2",
                  "reflex_duration"});
      s.reflex.t_charge =
          get_num(c, "strategies.reflex", "t_charge", s.reflex.t_charge);
      s.reflex.t_rest1 =
          get_num(c, "strategies.reflex", "t_rest1", s.reflex.t_rest1);
      s.reflex.t_discharge =
          get_num(c, "strategies.reflex", "t_discharge", s.reflex.t_discharge);
      s.reflex.t_rest2 =
          get_num(c, "strategies.reflex", "t_rest2", s.reflex.t_rest2);
      s.reflex.reflex_duration = get_num(c, "strategies.reflex",
                                         "reflex_duration",
                                         s.reflex.reflex_duration);
    }
  }

  if (root.contains("sim")) {
    const json& c = root.at("sim");
    check_keys(c, "sim",
               {"dt", "t_max", "coupling", "initial_soc", "soc_target",
                "record_every", "soc_ceiling", "v_overshoot_tol"});
    s.sim.dt = get_num(c, "sim", "dt", s.sim.dt);
    s.sim.t_max = get_num(c, "sim", "t_max", s.sim.t_max);
    if (c.contains("coupling")) {
      const json& v = c.at("coupling");
      if (!v.is_string()) fail("sim.coupling: expected a string");
      try {
        s.sim.coupling = engine::coupling_from_name(v.get<std::string>());
      } catch (const std::exception& e) {
        fail(std::string("sim.coupling: ") + e.what());
      }
    }
    s.sim.initial_soc = get_num(c, "sim", "initial_soc", s.sim.initial_soc);
    if (c.contains("soc_target")) {
      const json& v = c.at("soc_target");
      if (v.is_null())
        s.sim.soc_target.reset();
      else if (v.is_number())
        s.sim.soc_target = v.get<double>();
      else
        fail("sim.soc_target: expected a number or null");
    }
    s.sim.record_every =
        get_int(c, "sim", "record_every", s.sim.record_every);
    s.sim.soc_ceiling = get_num(c, "sim", "soc_ceiling", s.sim.soc_ceiling);
    s.sim.v_overshoot_tol =
        get_num(c, "sim", "v_overshoot_tol", s.sim.v_overshoot_tol);
  }

  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(path + ": cannot open scenario file");
  std::ostringstream buf;
  buf << f.rdbuf();
  return scenario_from_json(buf.str(), path);
}

}  // namespace evcharge::config
