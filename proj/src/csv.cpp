#include "evcharge/csvio.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace evcharge::csvio {

namespace {

// Full-precision float formatting so files re-parse to identical values.
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double to_num(const std::string& s) { return std::stod(s); }

void expect_header(std::istream& is, const std::string& want) {
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("csv: missing header line");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != want)
    throw std::runtime_error("csv: unexpected header '" + line + "'");
}

}  // namespace

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

void write_telemetry(std::ostream& os,
                     std::span<const engine::TelemetryRow> rows) {
  os << "t_s,i_batt_A,v_term_V,soc,phi,p_batt_loss_W,p_conv_loss_W,mode\n";
  for (const auto& r : rows) {
    os << fmt(r.t) << ',' << fmt(r.i_batt) << ',' << fmt(r.v_term) << ','
       << fmt(r.soc) << ',' << fmt(r.phi) << ',' << fmt(r.p_batt_loss) << ','
       << fmt(r.p_conv_loss) << ',' << control::mode_name(r.mode) << '\n';
  }
}

std::vector<engine::TelemetryRow> read_telemetry(std::istream& is) {
  expect_header(is, "t_s,i_batt_A,v_term_V,soc,phi,p_batt_loss_W,p_conv_loss_W,mode");
  std::vector<engine::TelemetryRow> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto f = split_line(line);
    if (f.size() != 8)
      throw std::runtime_error("csv: bad telemetry row '" + line + "'");
    engine::TelemetryRow r;
    r.t = to_num(f[0]);
    r.i_batt = to_num(f[1]);
    r.v_term = to_num(f[2]);
    r.soc = to_num(f[3]);
    r.phi = to_num(f[4]);
    r.p_batt_loss = to_num(f[5]);
    r.p_conv_loss = to_num(f[6]);
    r.mode = control::mode_from_name(f[7]);
    rows.push_back(r);
  }
  return rows;
}

void write_waveform(std::ostream& os, std::span<const dab::WaveformSample> w) {
  os << "t_s,v_p,v_s_reflected,v_lk,i_lk\n";
  for (const auto& s : w) {
    os << fmt(s.t) << ',' << fmt(s.v_p) << ',' << fmt(s.v_s_reflected) << ','
       << fmt(s.v_lk) << ',' << fmt(s.i_lk) << '\n';
  }
}

std::vector<dab::WaveformSample> read_waveform(std::istream& is) {
  expect_header(is, "t_s,v_p,v_s_reflected,v_lk,i_lk");
  std::vector<dab::WaveformSample> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto f = split_line(line);
    if (f.size() != 5)
      throw std::runtime_error("csv: bad waveform row '" + line + "'");
    out.push_back(dab::WaveformSample{to_num(f[0]), to_num(f[1]), to_num(f[2]),
                                      to_num(f[3]), to_num(f[4])});
  }
  return out;
}

void write_metrics(std::ostream& os, std::string_view strategy,
                   const engine::Metrics& m) {
  os << "strategy,charge_time_h,battery_loss_kWh,converter_loss_kWh,"
        "total_loss_kWh,delivered_kWh,final_soc,terminated_by\n";
  os << strategy << ',' << fmt(m.charge_time_h) << ','
     << fmt(m.e_batt_loss_kwh) << ',' << fmt(m.e_conv_loss_kwh) << ','
     << fmt(m.e_total_loss_kwh) << ',' << fmt(m.e_delivered_kwh) << ','
     << fmt(m.final_soc) << ',' << engine::termination_name(m.terminated_by)
     << '\n';
}

std::vector<SummaryRow> summarize(std::span<const engine::CompareRow> rows) {
  std::vector<SummaryRow> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    SummaryRow s;
    s.strategy = engine::strategy_name(r.kind);
    s.charge_time_h = round3(r.metrics.charge_time_h);
    s.e_batt_loss_kwh = round3(r.metrics.e_batt_loss_kwh);
    s.e_conv_loss_kwh = round3(r.metrics.e_conv_loss_kwh);
    s.e_total_loss_kwh = round3(r.metrics.e_total_loss_kwh);
    out.push_back(s);
  }
  // Percentage deltas against the first (baseline) row, computed from the
  // rounded values so they can be re-derived from the table itself.
  auto pct = [](double v, double base) {
    return base != 0.0 ? std::round((v - base) / base * 10000.0) / 100.0 : 0.0;
  };
  for (auto& s : out) {
    s.d_charge_time_pct = pct(s.charge_time_h, out[0].charge_time_h);
    s.d_batt_loss_pct = pct(s.e_batt_loss_kwh, out[0].e_batt_loss_kwh);
    s.d_conv_loss_pct = pct(s.e_conv_loss_kwh, out[0].e_conv_loss_kwh);
    s.d_total_loss_pct = pct(s.e_total_loss_kwh, out[0].e_total_loss_kwh);
  }
  return out;
}

void write_compare_csv(std::ostream& os, std::span<const SummaryRow> rows) {
  os << "strategy,charge_time_h,battery_loss_kWh,converter_loss_kWh,"
        "total_loss_kWh,d_charge_time_pct,d_battery_loss_pct,"
        "d_converter_loss_pct,d_total_loss_pct\n";
  for (const auto& s : rows) {
    os << s.strategy << ',' << fmt(s.charge_time_h) << ','
       << fmt(s.e_batt_loss_kwh) << ',' << fmt(s.e_conv_loss_kwh) << ','
       << fmt(s.e_total_loss_kwh) << ',' << fmt(s.d_charge_time_pct) << ','
       << fmt(s.d_batt_loss_pct) << ',' << fmt(s.d_conv_loss_pct) << ','
       << fmt(s.d_total_loss_pct) << '\n';
  }
}

std::vector<SummaryRow> read_compare_csv(std::istream& is) {
  expect_header(is,
                "strategy,charge_time_h,battery_loss_kWh,converter_loss_kWh,"
                "total_loss_kWh,d_charge_time_pct,d_battery_loss_pct,"
                "d_converter_loss_pct,d_total_loss_pct");
  std::vector<SummaryRow> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto f = split_line(line);
    if (f.size() != 9)
      throw std::runtime_error("csv: bad summary row '" + line + "'");
    SummaryRow s;
    s.strategy = f[0];
    s.charge_time_h = to_num(f[1]);
    s.e_batt_loss_kwh = to_num(f[2]);
    s.e_conv_loss_kwh = to_num(f[3]);
    s.e_total_loss_kwh = to_num(f[4]);
    s.d_charge_time_pct = to_num(f[5]);
    s.d_batt_loss_pct = to_num(f[6]);
    s.d_conv_loss_pct = to_num(f[7]);
    s.d_total_loss_pct = to_num(f[8]);
    out.push_back(s);
  }
  return out;
}

std::string format_compare_table(std::span<const SummaryRow> rows) {
  std::ostringstream os;
  os << std::left << std::setw(22) << "";
  for (const auto& s : rows) os << std::right << std::setw(16) << s.strategy;
  os << '\n';

  auto line = [&](const char* label, auto value, auto delta) {
    os << std::left << std::setw(22) << label;
    for (size_t i = 0; i < rows.size(); ++i) {
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(3) << value(rows[i]);
      if (i > 0) {
        cell << " (" << std::showpos << std::fixed << std::setprecision(2)
             << delta(rows[i]) << "%)";
      }
      os << std::right << std::setw(16) << cell.str();
    }
    os << '\n';
  };

  line("Charging time [h]", [](const SummaryRow& s) { return s.charge_time_h; },
       [](const SummaryRow& s) { return s.d_charge_time_pct; });
  line("Battery loss [kWh]",
       [](const SummaryRow& s) { return s.e_batt_loss_kwh; },
       [](const SummaryRow& s) { return s.d_batt_loss_pct; });
  line("Converter loss [kWh]",
       [](const SummaryRow& s) { return s.e_conv_loss_kwh; },
       [](const SummaryRow& s) { return s.d_conv_loss_pct; });
  line("Total loss [kWh]",
       [](const SummaryRow& s) { return s.e_total_loss_kwh; },
       [](const SummaryRow& s) { return s.d_total_loss_pct; });
  return os.str();
}

}  // namespace evcharge::csvio
