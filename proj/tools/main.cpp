#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "evcharge/csvio.hpp"
#include "evcharge/scenario.hpp"

namespace fs = std::filesystem;
using namespace evcharge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitFault = 3;

struct CommonOpts {
  std::string config_path;
  std::optional<double> dt_override;
  std::optional<std::string> coupling_override;
};

config::Scenario load(const CommonOpts& opts) {
  config::Scenario sc = config::load_scenario(opts.config_path);
  if (opts.dt_override) sc.sim.dt = *opts.dt_override;
  if (opts.coupling_override)
    sc.sim.coupling = engine::coupling_from_name(*opts.coupling_override);
  sc.validate();
  return sc;
}

int report_outcome(const engine::Metrics& m) {
  std::cout << "terminated by: " << engine::termination_name(m.terminated_by);
  if (!m.fault_reason.empty()) std::cout << " (" << m.fault_reason << ")";
  std::cout << "\n";
  switch (m.terminated_by) {
    case engine::Termination::StrategyDone:
    case engine::Termination::SocTarget:
      return kExitOk;
    default:
      return kExitFault;
  }
}

int cmd_run(const CommonOpts& opts, const std::string& strategy,
            const std::string& out_dir) {
  config::Scenario sc = load(opts);
  const engine::StrategyKind kind = engine::strategy_from_name(strategy);
  const engine::RunResult res = engine::run(sc.inputs(), kind);

  fs::create_directories(out_dir);
  const std::string name = engine::strategy_name(kind);
  {
    std::ofstream f(fs::path(out_dir) / (name + "_telemetry.csv"));
    csvio::write_telemetry(f, res.telemetry);
  }
  {
    std::ofstream f(fs::path(out_dir) / (name + "_metrics.csv"));
    csvio::write_metrics(f, name, res.metrics);
  }

  const engine::Metrics& m = res.metrics;
  std::cout << name << ": " << std::fixed << std::setprecision(3)
            << m.charge_time_h << " h, battery loss " << m.e_batt_loss_kwh
            << " kWh, converter loss " << m.e_conv_loss_kwh
            << " kWh, total loss " << m.e_total_loss_kwh << " kWh, final SoC "
            << m.final_soc << "\n";
  return report_outcome(m);
}

int cmd_compare(const CommonOpts& opts, const std::vector<std::string>& names,
                const std::string& out_dir) {
  config::Scenario sc = load(opts);
  std::vector<engine::StrategyKind> kinds;
  kinds.reserve(names.size());
  for (const auto& n : names) kinds.push_back(engine::strategy_from_name(n));

  const auto rows = engine::compare(sc.inputs(), kinds);
  const auto summary = csvio::summarize(rows);

  std::cout << csvio::format_compare_table(summary);

  fs::create_directories(out_dir);
  std::ofstream f(fs::path(out_dir) / "compare_summary.csv");
  csvio::write_compare_csv(f, summary);

  int rc = kExitOk;
  for (const auto& r : rows) {
    if (r.metrics.terminated_by != engine::Termination::StrategyDone &&
        r.metrics.terminated_by != engine::Termination::SocTarget) {
      std::cout << engine::strategy_name(r.kind) << " terminated by "
                << engine::termination_name(r.metrics.terminated_by);
      if (!r.metrics.fault_reason.empty())
        std::cout << " (" << r.metrics.fault_reason << ")";
      std::cout << "\n";
      rc = kExitFault;
    }
  }
  return rc;
}

int cmd_optimize(const CommonOpts& opts, int grid_points) {
  config::Scenario sc = load(opts);
  const strategy::MsccConfig& mc = sc.mscc;
  const auto currents = strategy::stage_currents(mc.i_first, mc.i_last,
                                                 mc.n_stages);

  // Series-equivalent of the configured pack: the open-circuit slope over the
  // charge window gives the capacitance, the mid-window resistances give R1.
  const battery::PackParams pack = battery::pack_from_cell(sc.cell, sc.pack);
  const double soc0 = sc.sim.initial_soc;
  const double uoc0 = pack.uoc.at(soc0);
  const double uoc1 = pack.uoc.at(1.0);
  const double slope = (uoc1 - uoc0) / (1.0 - soc0);
  const double soc_mid = 0.5 * (soc0 + 1.0);
  const battery::OperatingParams mid = battery::interp_params(pack, soc_mid);
  strategy::EquivBatteryParams eq{3600.0 * pack.capacity_ah / slope,
                                  mid.ro + mid.rth, uoc0, mc.v_threshold};

  const auto pred = strategy::predict_stage_times(currents, eq);

  std::cout << "equivalent battery: C1 = " << std::fixed
            << std::setprecision(1) << eq.c1 << " F, R1 = "
            << std::setprecision(4) << eq.r1 << " Ohm, V0 = "
            << std::setprecision(2) << eq.v0 << " V, Vt = " << eq.v_t
            << " V\n\n";
  std::cout << "stage   current_A   predicted_time_s\n";
  for (size_t k = 0; k < currents.size(); ++k) {
    std::cout << std::setw(5) << k + 1 << std::setw(12) << std::setprecision(3)
              << currents[k] << std::setw(19) << std::setprecision(1)
              << pred.stage_s[k] << "\n";
  }
  std::cout << "total predicted time: " << std::setprecision(1) << pred.total_s
            << " s (" << std::setprecision(3) << pred.total_s / 3600.0
            << " h)\n";
  if (pred.unreachable_stages > 0)
    std::cout << "note: " << pred.unreachable_stages
              << " stage(s) unreachable (clamped to zero time)\n";

  if (mc.n_stages > 2) {
    const auto brute = strategy::brute_force_optimal_mid(
        mc.i_first, mc.i_last, mc.n_stages, eq, grid_points);
    const double cell =
        (mc.i_first - mc.i_last) / static_cast<double>(grid_points + 1);
    std::cout << "\nbrute-force optimum (grid " << grid_points
              << ", cell " << std::setprecision(4) << cell << " A):\n";
    std::cout << "stage   closed_form_A   brute_force_A   diff_A\n";
    double worst = 0.0;
    for (size_t m = 0; m < brute.size(); ++m) {
      const double diff = brute[m] - currents[m + 1];
      worst = std::max(worst, std::abs(diff));
      std::cout << std::setw(5) << m + 2 << std::setw(16)
                << std::setprecision(4) << currents[m + 1] << std::setw(16)
                << brute[m] << std::setw(11) << diff << "\n";
    }
    std::cout << "max disagreement: " << worst << " A ("
              << std::setprecision(2) << worst / cell << " grid cells)\n";
  } else {
    std::cout << "\nno middle stages with n_stages = " << mc.n_stages
              << "; nothing to optimize\n";
  }
  return kExitOk;
}

int cmd_waveform(const CommonOpts& opts, double phi, const std::string& out_dir,
                 int samples) {
  config::Scenario sc = load(opts);
  const battery::PackParams pack = battery::pack_from_cell(sc.cell, sc.pack);
  const double v_out = pack.uoc.at(sc.sim.initial_soc);

  const auto w = dab::synth_waveform(sc.dab, v_out, phi, samples);
  fs::create_directories(out_dir);
  {
    std::ofstream f(fs::path(out_dir) / "waveform.csv");
    csvio::write_waveform(f, w);
  }

  const double i_avg = dab::avg_output_current(sc.dab, v_out, phi);
  const double i_wave = dab::waveform_output_current(sc.dab, w);
  const double err =
      i_avg != 0.0 ? std::abs(i_wave - i_avg) / std::abs(i_avg) * 100.0 : 0.0;
  std::cout << "phi = " << phi << ", v_out = " << std::fixed
            << std::setprecision(2) << v_out << " V\n"
            << "averaged model current:   " << std::setprecision(4) << i_avg
            << " A\n"
            << "waveform-integrated:      " << i_wave << " A\n"
            << "difference:               " << std::setprecision(3) << err
            << " %\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EV charging simulator: DAB converter + Thevenin pack model "
               "with CC-CV, MSCC and MSCC-reflex strategies"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string strategy_name;
  std::vector<std::string> strategy_names;
  std::string out_dir = "out";
  double phi = 0.25;
  int grid_points = 500;
  int samples = 2048;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opts.config_path, "scenario JSON file")
        ->required();
    cmd->add_option("--dt", opts.dt_override, "override sim.dt [s]");
    cmd->add_option("--coupling", opts.coupling_override,
                    "override coupling: ideal | pid");
  };

  CLI::App* c_run = app.add_subcommand("run", "run one charging strategy");
  add_common(c_run);
  c_run->add_option("--strategy", strategy_name,
                    "cccv | mscc | mscc-reflex")->required();
  c_run->add_option("--out", out_dir, "output directory");

  CLI::App* c_cmp = app.add_subcommand("compare",
                                       "run several strategies and tabulate");
  add_common(c_cmp);
  c_cmp->add_option("--strategies", strategy_names,
                    "comma-separated strategy names")
      ->required()
      ->delimiter(',');
  c_cmp->add_option("--out", out_dir, "output directory");

  CLI::App* c_opt = app.add_subcommand(
      "optimize", "stage currents: closed form vs brute force");
  add_common(c_opt);
  c_opt->add_option("--grid", grid_points, "grid points per free current");

  CLI::App* c_wav = app.add_subcommand("waveform",
                                       "export one switching period");
  add_common(c_wav);
  c_wav->add_option("--phi", phi, "phase shift (fraction of period)")
      ->required();
  c_wav->add_option("--out", out_dir, "output directory");
  c_wav->add_option("--samples", samples, "samples per period");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_run->parsed()) return cmd_run(opts, strategy_name, out_dir);
    if (c_cmp->parsed()) return cmd_compare(opts, strategy_names, out_dir);
    if (c_opt->parsed()) return cmd_optimize(opts, grid_points);
    if (c_wav->parsed()) return cmd_waveform(opts, phi, out_dir, samples);
  } catch (const config::ScenarioError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFault;
  }
  return kExitUsage;
}
