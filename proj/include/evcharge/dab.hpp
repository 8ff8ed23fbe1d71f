#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace evcharge::dab {

// Dual-active-bridge electricals. The turns ratio n is defined so that the
// secondary bridge voltage appears as v_out/n when reflected to the primary.
struct DabParams {
  double v_in{200.0};       // supply-side DC voltage [V]
  double n{0.75};           // transformer turns ratio
  double leakage_l{15e-6};  // leakage inductance [H]
  double f_s{20e3};         // switching frequency [Hz]
  double dead_time{0.0};    // [s]
  double phi_limit{0.25};   // max |phase shift| as a fraction of the period

  void validate() const;
};

// MOSFET loss constants for both bridges.
struct LossParams {
  double rds_on_primary{5e-3};    // [Ohm]
  double rds_on_secondary{5e-3};  // [Ohm]
  double k_reflect{0.75};         // voltage reflection factor K
  double t_r{50e-9};              // switching transition time [s]

  void validate() const;
};

// Thrown when a current demand exceeds what the converter can deliver at the
// configured phase-shift limit.
class CapabilityError : public std::runtime_error {
 public:
  CapabilityError(const std::string& msg, double imax)
      : std::runtime_error(msg), max_current_a(imax) {}
  double max_current_a;
};

// Averaged single-phase-shift model. phi is the phase shift as a fraction of
// the switching period, legal on [-phi_limit, phi_limit]; negative phi
// reverses the power flow.
double avg_output_current(const DabParams& p, double v_out, double phi);
double avg_power(const DabParams& p, double v_out, double phi);
double max_current(const DabParams& p, double v_out);

// Inverse of avg_output_current. Throws CapabilityError when |i_target|
// exceeds max_current.
double phase_for_current(const DabParams& p, double v_out, double i_target);

// P_on = 2*(Rds_p + K^2*Rds_s)*I_rms^2 over one bridge pair.
double conduction_loss(const LossParams& lp, double i_rms);

// Turn-on plus turn-off loss of one device, (1/3)*V_ds*I_d*t_r*f_s.
double switching_loss(const LossParams& lp, double f_s, double v_ds, double i_d);

struct WaveformSample {
  double t;              // [s] within one period
  double v_p;            // primary bridge output [V]
  double v_s_reflected;  // secondary bridge output reflected to the primary [V]
  double v_lk;           // v_p - v_s_reflected [V]
  double i_lk;           // leakage inductor current [A]
};

// One steady-state period of single-phase-shift operation, uniformly sampled.
// Both bridges run 50% duty; the secondary lags by phi*T. Dead time holds
// each bridge output at its previous level for dead_time after the nominal
// transition instant.
std::vector<WaveformSample> synth_waveform(const DabParams& p, double v_out,
                                           double phi, int samples_per_period);

// RMS of i_lk treating consecutive samples as linear segments (exact for
// piecewise-linear current); the waveform wraps around the period.
double rms_of_waveform(std::span<const WaveformSample> w);

// Average output current referred to the secondary, integrated from the
// rectified inductor current over one period. This is the charge-segment
// computation that the averaged model summarizes.
double waveform_output_current(const DabParams& p,
                               std::span<const WaveformSample> w);

// Loss evaluation at one operating point: conduction from the waveform RMS,
// switching from |i_lk| at the bridge transition instants with v_ds = v_in on
// the four primary devices and v_ds = v_out on the four secondary devices.
struct OperatingLosses {
  double i_rms{0};
  double p_conduction{0};
  double p_switching{0};
  double total() const { return p_conduction + p_switching; }
};

OperatingLosses operating_losses(const DabParams& p, const LossParams& lp,
                                 double v_out, double phi,
                                 int samples_per_period = 2048);

}  // namespace evcharge::dab
