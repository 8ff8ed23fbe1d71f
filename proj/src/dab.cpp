#include "evcharge/dab.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace evcharge::dab {

namespace {

void check(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_phase(const DabParams& p, double phi) {
  if (!(std::abs(phi) <= p.phi_limit + 1e-15)) {
    std::ostringstream os;
    os << "phase shift " << phi << " outside [-" << p.phi_limit << ", "
       << p.phi_limit << "]";
    throw std::domain_error(os.str());
  }
}

// One steady-state period broken into constant-voltage segments. i_lk is the
// exact piecewise-linear integral of v_lk/L with the constant fixed by the
// half-wave symmetry i(0) = -i(T/2).
struct Shape {
  double T{0};
  double L{0};
  std::vector<double> te;  // segment start times, te[0] == 0
  std::vector<double> vp;  // primary level per segment [V]
  std::vector<double> vs;  // reflected secondary level per segment [V]
  std::vector<double> ir;  // relative inductor current at te[k] [A]
  double i0{0};

  size_t seg_of(double t) const {
    auto it = std::upper_bound(te.begin(), te.end(), t);
    return static_cast<size_t>(it - te.begin()) - 1;
  }

  double i_rel_at(double t) const {
    size_t k = seg_of(t);
    return ir[k] + (vp[k] - vs[k]) / L * (t - te[k]);
  }

  double i_at(double t) const { return i0 + i_rel_at(t); }
};

Shape build_shape(const DabParams& p, double v_out, double phi) {
  const double T = 1.0 / p.f_s;
  auto wrap = [T](double x) {
    double r = std::fmod(x, T);
    if (r < 0) r += T;
    return r;
  };

  // Bridge outputs are 50%-duty squares; dead time holds the previous level,
  // which delays both transition pairs by dead_time.
  const double td = p.dead_time;
  const double shift_s = td + phi * T;
  auto level_p = [&](double t) {
    return wrap(t - td) < 0.5 * T ? p.v_in : -p.v_in;
  };
  const double v2 = v_out / p.n;
  auto level_s = [&](double t) {
    return wrap(t - shift_s) < 0.5 * T ? v2 : -v2;
  };

  std::vector<double> events = {0.0, wrap(td), wrap(td + 0.5 * T),
                                wrap(shift_s), wrap(shift_s + 0.5 * T)};
  std::sort(events.begin(), events.end());
  std::vector<double> te;
  for (double t : events) {
    if (te.empty() || t - te.back() > 1e-12 * T) te.push_back(t);
  }

  Shape sh;
  sh.T = T;
  sh.L = p.leakage_l;
  sh.te = te;
  sh.vp.resize(te.size());
  sh.vs.resize(te.size());
  sh.ir.resize(te.size());
  for (size_t k = 0; k < te.size(); ++k) {
    const double t_end = (k + 1 < te.size()) ? te[k + 1] : T;
    const double mid = 0.5 * (te[k] + t_end);  // levels are constant inside
    sh.vp[k] = level_p(mid);
    sh.vs[k] = level_s(mid);
  }
  sh.ir[0] = 0.0;
  for (size_t k = 0; k + 1 < te.size(); ++k) {
    sh.ir[k + 1] =
        sh.ir[k] + (sh.vp[k] - sh.vs[k]) / sh.L * (te[k + 1] - te[k]);
  }
  sh.i0 = -0.5 * sh.i_rel_at(0.5 * T);
  return sh;
}

// Exact RMS of the piecewise-linear inductor current over the period.
double shape_rms(const Shape& sh) {
  double acc = 0.0;
  for (size_t k = 0; k < sh.te.size(); ++k) {
    const double t_end = (k + 1 < sh.te.size()) ? sh.te[k + 1] : sh.T;
    const double dt = t_end - sh.te[k];
    const double a = sh.i0 + sh.ir[k];
    const double b = a + (sh.vp[k] - sh.vs[k]) / sh.L * dt;
    acc += dt / 3.0 * (a * a + a * b + b * b);
  }
  return std::sqrt(acc / sh.T);
}

}  // namespace

void DabParams::validate() const {
  check(v_in > 0.0, "v_in: must be > 0");
  check(n > 0.0, "turns_ratio: must be > 0");
  check(leakage_l > 0.0, "leakage_l: must be > 0");
  check(f_s > 0.0, "f_s: must be > 0");
  check(dead_time >= 0.0 && dead_time < 0.5 / f_s,
        "dead_time: must lie in [0, 1/(2*f_s))");
  check(phi_limit > 0.0 && phi_limit <= 0.25,
        "phi_limit: must lie in (0, 0.25]");
}

void LossParams::validate() const {
  check(rds_on_primary > 0.0, "rds_on_primary: must be > 0");
  check(rds_on_secondary > 0.0, "rds_on_secondary: must be > 0");
  check(k_reflect > 0.0, "k_reflect: must be > 0");
  check(t_r > 0.0, "t_r: must be > 0");
}

double avg_output_current(const DabParams& p, double v_out, double phi) {
  check(v_out > 0.0, "avg_output_current: v_out must be > 0");
  check_phase(p, phi);
  const double d = 2.0 * std::abs(phi);
  const double mag = p.n * p.v_in * d * (1.0 - d) / (2.0 * p.f_s * p.leakage_l);
  return phi < 0 ? -mag : mag;
}

double avg_power(const DabParams& p, double v_out, double phi) {
  return avg_output_current(p, v_out, phi) * v_out;
}

double max_current(const DabParams& p, double v_out) {
  return avg_output_current(p, v_out, p.phi_limit);
}

double phase_for_current(const DabParams& p, double v_out, double i_target) {
  const double imax = max_current(p, v_out);
  const double mag = std::abs(i_target);
  if (mag > imax * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "demand " << mag << " A exceeds converter capability (max_current "
       << imax << " A)";
    throw CapabilityError(os.str(), imax);
  }
  // Solve d*(1-d) = c on d in [0, 0.5]
  double c = mag * 2.0 * p.f_s * p.leakage_l / (p.n * p.v_in);
  c = std::min(c, 0.25);
  const double d = 0.5 * (1.0 - std::sqrt(1.0 - 4.0 * c));
  const double phi = 0.5 * d;
  return i_target < 0 ? -phi : phi;
}

double conduction_loss(const LossParams& lp, double i_rms) {
  return 2.0 *
         (lp.rds_on_primary + lp.k_reflect * lp.k_reflect * lp.rds_on_secondary) *
         i_rms * i_rms;
}

double switching_loss(const LossParams& lp, double f_s, double v_ds,
                      double i_d) {
  return (1.0 / 3.0) * v_ds * i_d * lp.t_r * f_s;
}

std::vector<WaveformSample> synth_waveform(const DabParams& p, double v_out,
                                           double phi,
                                           int samples_per_period) {
  check(v_out > 0.0, "synth_waveform: v_out must be > 0");
  check(samples_per_period >= 8, "synth_waveform: need at least 8 samples");
  check_phase(p, phi);

  const Shape sh = build_shape(p, v_out, phi);
  std::vector<WaveformSample> out;
  out.reserve(static_cast<size_t>(samples_per_period));
  for (int j = 0; j < samples_per_period; ++j) {
    const double t = sh.T * j / samples_per_period;
    const size_t k = sh.seg_of(t);
    WaveformSample s;
    s.t = t;
    s.v_p = sh.vp[k];
    s.v_s_reflected = sh.vs[k];
    s.v_lk = s.v_p - s.v_s_reflected;
    s.i_lk = sh.i_at(t);
    out.push_back(s);
  }
  return out;
}

double rms_of_waveform(std::span<const WaveformSample> w) {
  check(!w.empty(), "rms_of_waveform: empty waveform");
  if (w.size() == 1) return std::abs(w[0].i_lk);
  double acc = 0.0;
  for (size_t k = 0; k + 1 < w.size(); ++k) {
    const double dt = w[k + 1].t - w[k].t;
    const double a = w[k].i_lk;
    const double b = w[k + 1].i_lk;
    acc += dt / 3.0 * (a * a + a * b + b * b);
  }
  const double span_t = w.back().t - w.front().t;
  return std::sqrt(acc / span_t);
}

double waveform_output_current(const DabParams& p,
                               std::span<const WaveformSample> w) {
  check(!w.empty(), "waveform_output_current: empty waveform");
  const double T = 1.0 / p.f_s;
  double acc = 0.0;  // integral of rectified current, primary-referred
  const size_t n = w.size();
  for (size_t k = 0; k < n; ++k) {
    const WaveformSample& a = w[k];
    const WaveformSample& b = w[(k + 1) % n];
    const double dt = (k + 1 < n) ? b.t - a.t : T - a.t;
    const double sgn = a.v_s_reflected > 0 ? 1.0 : -1.0;
    acc += sgn * 0.5 * (a.i_lk + b.i_lk) * dt;
  }
  // The secondary bridge carries n times the primary-referred current.
  return p.n * acc / T;
}

OperatingLosses operating_losses(const DabParams& p, const LossParams& lp,
                                 double v_out, double phi,
                                 int samples_per_period) {
  (void)samples_per_period;
  OperatingLosses out;
  if (phi == 0.0) return out;  // bridge idle
  check(v_out > 0.0, "operating_losses: v_out must be > 0");
  check_phase(p, phi);

  const Shape sh = build_shape(p, v_out, phi);
  out.i_rms = shape_rms(sh);
  out.p_conduction = conduction_loss(lp, out.i_rms);

  const double T = sh.T;
  auto wrap = [T](double x) {
    double r = std::fmod(x, T);
    if (r < 0) r += T;
    return r;
  };
  // |i_lk| at the transition instants; the two transitions of each bridge
  // carry the same magnitude by half-wave symmetry. Four devices per bridge,
  // each switching on and off once per period.
  const double i_p = std::abs(sh.i_at(wrap(p.dead_time)));
  const double i_s = std::abs(sh.i_at(wrap(p.dead_time + phi * T)));
  out.p_switching = 4.0 * switching_loss(lp, p.f_s, p.v_in, i_p) +
                    4.0 * switching_loss(lp, p.f_s, v_out, i_s);
  return out;
}

}  // namespace evcharge::dab
