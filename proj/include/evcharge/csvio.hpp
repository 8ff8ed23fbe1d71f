#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "evcharge/dab.hpp"
#include "evcharge/engine.hpp"

namespace evcharge::csvio {

// Telemetry and waveform files carry full-precision values so that
// re-parsing reproduces the sample sequence exactly.

void write_telemetry(std::ostream& os, std::span<const engine::TelemetryRow> rows);
std::vector<engine::TelemetryRow> read_telemetry(std::istream& is);

void write_waveform(std::ostream& os, std::span<const dab::WaveformSample> w);
std::vector<dab::WaveformSample> read_waveform(std::istream& is);

void write_metrics(std::ostream& os, std::string_view strategy,
                   const engine::Metrics& m);

// Summary values are rounded to 3 decimals (hours / kWh) and the percentage
// deltas vs the first row are recomputed from the rounded values, so the
// printed table is internally consistent.
struct SummaryRow {
  std::string strategy;
  double charge_time_h;
  double e_batt_loss_kwh;
  double e_conv_loss_kwh;
  double e_total_loss_kwh;
  double d_charge_time_pct;  // 0 for the baseline row
  double d_batt_loss_pct;
  double d_conv_loss_pct;
  double d_total_loss_pct;
};

std::vector<SummaryRow> summarize(std::span<const engine::CompareRow> rows);
void write_compare_csv(std::ostream& os, std::span<const SummaryRow> rows);
std::vector<SummaryRow> read_compare_csv(std::istream& is);
std::string format_compare_table(std::span<const SummaryRow> rows);

double round3(double x);

}  // namespace evcharge::csvio
