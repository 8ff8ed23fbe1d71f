#include <cmath>
#include <random>

#include "doctest.h"
#include "evcharge/dab.hpp"

using namespace evcharge;

namespace {

dab::DabParams table1() {
  // 200 V supply, 150 V side, 20 kHz, 15 uH
  return dab::DabParams{200.0, 0.75, 15e-6, 20e3, 0.0, 0.25};
}

}  // namespace

TEST_CASE("averaged phase-shift model") {
  const dab::DabParams p = table1();

  CHECK(dab::avg_output_current(p, 150.0, 0.0) == 0.0);
  CHECK(dab::avg_output_current(p, 150.0, 0.25) == doctest::Approx(62.5));
  CHECK(dab::avg_output_current(p, 150.0, -0.25) == doctest::Approx(-62.5));

  SUBCASE("odd symmetry and monotonicity") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> dphi(0.0, 0.25);
    double prev = -1.0;
    for (double phi = 0.0; phi <= 0.25 + 1e-12; phi += 0.01) {
      const double i = dab::avg_output_current(p, 150.0, phi);
      CHECK(i >= prev - 1e-12);
      prev = i;
      CHECK(dab::avg_output_current(p, 150.0, -phi) == doctest::Approx(-i));
    }
    for (int k = 0; k < 100; ++k) {
      const double phi = dphi(rng);
      CHECK(dab::avg_power(p, 150.0, phi) ==
            doctest::Approx(dab::avg_output_current(p, 150.0, phi) * 150.0));
    }
  }

  SUBCASE("power example") {
    CHECK(dab::avg_power(p, 150.0, 0.25) == doctest::Approx(9375.0));
    CHECK(dab::avg_power(p, 150.0, 0.0) == 0.0);
  }

  SUBCASE("phase limit is enforced") {
    CHECK_THROWS_AS(dab::avg_output_current(p, 150.0, 0.3), std::domain_error);
    dab::DabParams tight = p;
    tight.phi_limit = 0.125;
    CHECK_THROWS_AS(dab::avg_output_current(tight, 150.0, 0.2),
                    std::domain_error);
  }
}

TEST_CASE("max current and inversion") {
  const dab::DabParams p = table1();

  CHECK(dab::max_current(p, 150.0) == doctest::Approx(62.5));
  dab::DabParams tight = p;
  tight.phi_limit = 0.125;
  CHECK(dab::max_current(tight, 150.0) == doctest::Approx(46.875));

  SUBCASE("known inversion point") {
    const double phi = dab::phase_for_current(p, 150.0, 30.0);
    CHECK(phi == doctest::Approx(0.06972243622680056).epsilon(1e-9));
  }

  SUBCASE("round trip is the identity") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> di(-62.4, 62.4);
    for (int k = 0; k < 300; ++k) {
      const double i = di(rng);
      const double phi = dab::phase_for_current(p, 150.0, i);
      CHECK(dab::avg_output_current(p, 150.0, phi) ==
            doctest::Approx(i).epsilon(1e-9));
    }
    CHECK(dab::phase_for_current(p, 150.0, 0.0) == 0.0);
    // exactly at capability
    CHECK(dab::phase_for_current(p, 150.0, 62.5) == doctest::Approx(0.25));
  }

  SUBCASE("capability error carries the limit") {
    try {
      dab::phase_for_current(p, 150.0, 70.0);
      FAIL("expected CapabilityError");
    } catch (const dab::CapabilityError& e) {
      CHECK(e.max_current_a == doctest::Approx(62.5));
      CHECK(std::string(e.what()).find("max_current") != std::string::npos);
    }
  }
}

TEST_CASE("mosfet losses") {
  dab::LossParams lp{0.01, 0.01, 0.75, 50e-9};

  CHECK(dab::conduction_loss(lp, 0.0) == 0.0);
  CHECK(dab::conduction_loss(lp, 20.0) == doctest::Approx(12.5));
  // quadratic scaling
  CHECK(dab::conduction_loss(lp, 40.0) == doctest::Approx(50.0));

  // one transition is (1/6)*V*I*t_r*f_s; the op returns on+off
  CHECK(dab::switching_loss(lp, 20e3, 200.0, 20.0) ==
        doctest::Approx(2.0 * 0.66666666666).epsilon(1e-6));
  CHECK(dab::switching_loss(lp, 20e3, 200.0, 0.0) == 0.0);
  // linear in switching frequency
  CHECK(dab::switching_loss(lp, 40e3, 200.0, 20.0) ==
        doctest::Approx(2.0 * dab::switching_loss(lp, 20e3, 200.0, 20.0)));
}

TEST_CASE("waveform synthesis") {
  const dab::DabParams p = table1();

  SUBCASE("matched voltages at zero phase produce no current") {
    auto w = dab::synth_waveform(p, 150.0, 0.0, 64);
    for (const auto& s : w) {
      CHECK(s.v_lk == 0.0);
      CHECK(s.i_lk == doctest::Approx(0.0).epsilon(1e-12));
    }
  }

  SUBCASE("v_lk column is consistent at every sample") {
    auto w = dab::synth_waveform(p, 132.0, 0.17, 257);
    for (const auto& s : w) CHECK(s.v_lk == s.v_p - s.v_s_reflected);
  }

  SUBCASE("zero mean inductor current") {
    for (double phi : {0.05, 0.12, 0.25, -0.2}) {
      auto w = dab::synth_waveform(p, 141.0, phi, 1024);
      double acc = 0.0;
      for (size_t k = 0; k < w.size(); ++k) {
        const auto& a = w[k];
        const auto& b = w[(k + 1) % w.size()];
        const double dt = (k + 1 < w.size()) ? b.t - a.t : 1.0 / p.f_s - a.t;
        acc += 0.5 * (a.i_lk + b.i_lk) * dt;
      }
      CHECK(acc * p.f_s == doctest::Approx(0.0).epsilon(1e-9));
    }
  }

  SUBCASE("waveform integral reproduces the averaged model") {
    for (double phi : {0.05, 0.10, 0.15, 0.20, 0.25}) {
      auto w = dab::synth_waveform(p, 150.0, phi, 4096);
      const double i_wave = dab::waveform_output_current(p, w);
      const double i_avg = dab::avg_output_current(p, 150.0, phi);
      CHECK(i_wave == doctest::Approx(i_avg).epsilon(0.01));
    }
    // holds off the matched point too
    auto w = dab::synth_waveform(p, 120.0, 0.18, 4096);
    CHECK(dab::waveform_output_current(p, w) ==
          doctest::Approx(dab::avg_output_current(p, 120.0, 0.18)).epsilon(0.01));
  }

  SUBCASE("reverse power flow mirrors forward") {
    auto wf = dab::synth_waveform(p, 150.0, 0.2, 2048);
    auto wr = dab::synth_waveform(p, 150.0, -0.2, 2048);
    CHECK(dab::waveform_output_current(p, wr) ==
          doctest::Approx(-dab::waveform_output_current(p, wf)).epsilon(1e-6));
  }

  SUBCASE("dead time holds the previous level") {
    dab::DabParams d = p;
    d.dead_time = 2e-6;
    auto w = dab::synth_waveform(d, 150.0, 0.2, 2000);
    // before the delayed transition the primary still sits at the old level
    CHECK(w[0].v_p == doctest::Approx(-200.0));
    const size_t after = static_cast<size_t>(2e-6 * d.f_s * 2000) + 2;
    CHECK(w[after].v_p == doctest::Approx(200.0));
    // integrals are unaffected by the common shift
    CHECK(dab::waveform_output_current(d, w) ==
          doctest::Approx(dab::avg_output_current(d, 150.0, 0.2)).epsilon(0.01));
  }

  SUBCASE("sample count precondition") {
    CHECK_THROWS_AS(dab::synth_waveform(p, 150.0, 0.1, 4),
                    std::invalid_argument);
  }
}

TEST_CASE("waveform rms") {
  SUBCASE("all-zero and constant") {
    std::vector<dab::WaveformSample> w;
    for (int i = 0; i <= 16; ++i)
      w.push_back({i / 16.0, 0, 0, 0, 0.0});
    CHECK(dab::rms_of_waveform(w) == 0.0);
    for (auto& s : w) s.i_lk = 7.5;
    CHECK(dab::rms_of_waveform(w) == doctest::Approx(7.5));
  }

  SUBCASE("triangle wave") {
    // peak +-1 triangle: rms = 1/sqrt(3), exact under piecewise-linear rms
    std::vector<dab::WaveformSample> w;
    w.push_back({0.0, 0, 0, 0, 0.0});
    w.push_back({0.25, 0, 0, 0, 1.0});
    w.push_back({0.75, 0, 0, 0, -1.0});
    w.push_back({1.0, 0, 0, 0, 0.0});
    CHECK(dab::rms_of_waveform(w) ==
          doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
  }
}

TEST_CASE("operating losses") {
  const dab::DabParams p = table1();
  dab::LossParams lp{5e-3, 5e-3, 0.75, 50e-9};

  auto ol = dab::operating_losses(p, lp, 150.0, 0.25);
  CHECK(ol.i_rms > 0.0);
  CHECK(ol.p_conduction == doctest::Approx(dab::conduction_loss(lp, ol.i_rms)));
  CHECK(ol.p_switching > 0.0);
  CHECK(ol.total() == ol.p_conduction + ol.p_switching);

  // rms from the exact segments matches the sampled helper
  auto w = dab::synth_waveform(p, 150.0, 0.25, 8192);
  CHECK(dab::rms_of_waveform(w) == doctest::Approx(ol.i_rms).epsilon(1e-3));

  // idle bridge has no loss; reverse flow loses like forward
  CHECK(dab::operating_losses(p, lp, 150.0, 0.0).total() == 0.0);
  auto rev = dab::operating_losses(p, lp, 150.0, -0.25);
  CHECK(rev.total() == doctest::Approx(ol.total()).epsilon(1e-9));
}
