#include <random>

#include "doctest.h"
#include "evcharge/control.hpp"

using namespace evcharge;

TEST_CASE("pid basics") {
  control::PidState fresh;

  SUBCASE("zero error gives zero output") {
    control::PidGains g{0.5, 0.2, 0.1, -0.25, 0.25};
    control::PidState s = fresh;
    for (int i = 0; i < 10; ++i) {
      auto out = control::pid_step(g, s, 0.0, 0.01);
      CHECK(out.u == 0.0);
      CHECK(out.next.integral == 0.0);
      s = out.next;
    }
  }

  SUBCASE("pure proportional") {
    control::PidGains g{0.01, 0.0, 0.0, -0.25, 0.25};
    auto out = control::pid_step(g, fresh, 1.0, 0.01);
    CHECK(out.u == doctest::Approx(0.01));
  }

  SUBCASE("saturation freezes the integral") {
    control::PidGains g{1.0, 0.5, 0.0, -0.25, 0.25};
    auto out = control::pid_step(g, fresh, 10.0, 0.01);
    CHECK(out.u == 0.25);
    CHECK(out.next.integral == 0.0);  // frozen, not 10*0.01
    // negative direction too
    out = control::pid_step(g, fresh, -10.0, 0.01);
    CHECK(out.u == -0.25);
    CHECK(out.next.integral == 0.0);
  }

  SUBCASE("integral unfreezes when the error reverses") {
    control::PidGains g{1.0, 0.5, 0.0, -0.25, 0.25};
    control::PidState s = fresh;
    auto out = control::pid_step(g, s, 10.0, 0.01);  // saturated
    out = control::pid_step(g, out.next, -0.1, 0.01);
    CHECK(out.next.integral == doctest::Approx(-0.001));
    CHECK(out.u > -0.25);
  }

  SUBCASE("derivative is zero on the first call") {
    control::PidGains g{0.0, 0.0, 1.0, -1000.0, 1000.0};
    auto out = control::pid_step(g, fresh, 5.0, 0.01);
    CHECK(out.u == 0.0);
    auto out2 = control::pid_step(g, out.next, 6.0, 0.01);
    CHECK(out2.u == doctest::Approx(100.0).epsilon(1e-9));  // (6-5)/0.01
  }

  SUBCASE("output always within bounds") {
    control::PidGains g{0.3, 2.0, 0.05, -0.25, 0.25};
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> de(-100.0, 100.0);
    control::PidState s = fresh;
    for (int i = 0; i < 1000; ++i) {
      auto out = control::pid_step(g, s, de(rng), 0.01);
      CHECK(out.u >= -0.25);
      CHECK(out.u <= 0.25);
      s = out.next;
    }
  }
}

TEST_CASE("pid closed loop on a linearized plant") {
  // plant: i = gain * phi, integral control drives the error to zero
  const double gain = 400.0;
  control::PidGains g{2e-4, 0.05, 0.0, -0.25, 0.25};
  control::PidState s;
  double phi = 0.0;
  const double ref = 30.0;
  double t_settle = -1.0;
  for (int k = 0; k < 2000; ++k) {
    const double i = gain * phi;
    auto out = control::pid_step(g, s, ref - i, 0.01);
    s = out.next;
    phi = out.u;
    const double err = ref - gain * phi;
    if (t_settle < 0 && std::abs(err) < 0.01 * ref) t_settle = k * 0.01;
    if (t_settle > 0 && std::abs(err) > 0.01 * ref) t_settle = -1.0;  // left band
  }
  CHECK(t_settle >= 0.0);
  CHECK(t_settle < 2.0);
  CHECK(std::abs(ref - gain * phi) < 0.005 * ref);
}

TEST_CASE("anti-windup limits recovery overshoot") {
  // deep saturation followed by an in-range reference: with the integral
  // frozen the output returns without an integral-driven overshoot
  const double gain = 400.0;
  control::PidGains g{2e-4, 0.05, 0.0, -0.25, 0.25};
  control::PidState s;
  double phi = 0.0;
  for (int k = 0; k < 500; ++k) {  // unreachable reference, pinned at +0.25
    auto out = control::pid_step(g, s, 1000.0 - gain * phi, 0.01);
    s = out.next;
    phi = out.u;
  }
  CHECK(phi == 0.25);
  double peak = 0.0;
  for (int k = 0; k < 3000; ++k) {  // now ask for 30 A
    auto out = control::pid_step(g, s, 30.0 - gain * phi, 0.01);
    s = out.next;
    phi = out.u;
    peak = std::max(peak, gain * phi);
  }
  CHECK(gain * phi == doctest::Approx(30.0).epsilon(1e-3));
  CHECK(peak <= 30.0 * 1.02);
}

TEST_CASE("control errors per mode") {
  using control::Mode;
  CHECK(control::control_error({Mode::ConstantCurrent, 50.0}, 50.0, 140.0) ==
        0.0);
  CHECK(control::control_error({Mode::ConstantCurrent, 50.0}, 45.0, 140.0) ==
        doctest::Approx(5.0));
  CHECK(control::control_error({Mode::ConstantVoltage, 147.0}, 20.0, 145.0) ==
        doctest::Approx(2.0));
  CHECK(control::control_error({Mode::Rest, 0.0}, 3.0, 140.0) ==
        doctest::Approx(-3.0));
  CHECK(control::control_error({Mode::DischargePulse, 20.0}, -20.0, 140.0) ==
        0.0);
}

TEST_CASE("mode names round trip") {
  for (auto m : {control::Mode::ConstantCurrent, control::Mode::ConstantVoltage,
                 control::Mode::Rest, control::Mode::DischargePulse})
    CHECK(control::mode_from_name(control::mode_name(m)) == m);
  CHECK_THROWS_AS(control::mode_from_name("bogus"), std::invalid_argument);
}
