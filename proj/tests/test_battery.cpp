#include <cmath>
#include <random>

#include "doctest.h"
#include "evcharge/battery.hpp"

using namespace evcharge;

namespace {

battery::CellParams basic_cell() {
  battery::CellParams c;
  c.uoc = battery::ParamTable{{0.2, 1.0}, {3.3, 4.2}};
  c.ro = battery::flat_table(0.04);
  c.rth = battery::flat_table(0.03);
  c.cth = battery::flat_table(1500.0);
  c.capacity_ah = 2.6;
  return c;
}

battery::PackParams flat_pack(double uoc, double ro, double rth, double cth,
                              double ah) {
  battery::PackParams p;
  p.uoc = battery::flat_table(uoc);
  p.ro = battery::flat_table(ro);
  p.rth = battery::flat_table(rth);
  p.cth = battery::flat_table(cth);
  p.capacity_ah = ah;
  p.v_max = uoc * 1.2;
  p.v_nominal = uoc;
  return p;
}

}  // namespace

TEST_CASE("param table interpolation") {
  battery::ParamTable t{{0.2, 0.8}, {3.5, 4.0}};
  CHECK(t.at(0.2) == doctest::Approx(3.5).epsilon(1e-15));
  CHECK(t.at(0.8) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(t.at(0.5) == doctest::Approx(3.75).epsilon(1e-12));
  // clamping outside the covered range
  CHECK(t.at(0.0) == 3.5);
  CHECK(t.at(1.0) == 4.0);
  // single-entry table extends as a constant
  battery::ParamTable one{{0.5}, {42.0}};
  CHECK(one.at(0.0) == 42.0);
  CHECK(one.at(1.0) == 42.0);
}

TEST_CASE("cell validation rejects bad tables") {
  battery::CellParams c = basic_cell();
  CHECK_NOTHROW(c.validate());

  battery::CellParams bad = c;
  bad.capacity_ah = -1.0;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("capacity_ah"),
                       std::invalid_argument);

  bad = c;
  bad.uoc.soc = {0.5, 0.5};
  bad.uoc.value = {3.5, 3.6};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = c;
  bad.uoc.value = {4.2, 3.3};  // decreasing in SoC
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = c;
  bad.v_max_cell = 4.0;  // below uoc at full charge
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = c;
  bad.ro.value = {0.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("pack scaling identities") {
  battery::CellParams c = basic_cell();

  SUBCASE("identity pack") {
    battery::PackParams p = battery::pack_from_cell(c, {1, 1});
    CHECK(p.capacity_ah == c.capacity_ah);
    CHECK(p.v_max == c.v_max_cell);
    CHECK(p.uoc.value == c.uoc.value);
    CHECK(p.ro.value == c.ro.value);
    CHECK(p.cth.value == c.cth.value);
  }

  SUBCASE("35s35p pack") {
    battery::PackParams p = battery::pack_from_cell(c, {35, 35});
    CHECK(p.capacity_ah == doctest::Approx(91.0).epsilon(1e-15));
    CHECK(p.v_nominal == doctest::Approx(126.0).epsilon(1e-15));
    CHECK(p.v_max == doctest::Approx(147.0).epsilon(1e-15));
    CHECK(p.ro.at(0.5) == doctest::Approx(0.04).epsilon(1e-15));  // 35/35 cancels
    CHECK(p.cth.at(0.5) == doctest::Approx(1500.0).epsilon(1e-15));
    CHECK(p.uoc.at(1.0) == doctest::Approx(4.2 * 35).epsilon(1e-15));
  }

  SUBCASE("asymmetric scaling") {
    battery::PackParams p = battery::pack_from_cell(c, {4, 2});
    CHECK(p.ro.at(0.5) == doctest::Approx(0.04 * 4 / 2).epsilon(1e-12));
    CHECK(p.cth.at(0.5) == doctest::Approx(1500.0 * 2 / 4).epsilon(1e-12));
    CHECK(p.capacity_ah == doctest::Approx(5.2).epsilon(1e-12));
  }
}

TEST_CASE("battery step") {
  battery::PackParams p = flat_pack(126.0, 0.04, 0.03, 1500.0, 91.0);

  SUBCASE("rest state is a fixed point") {
    battery::State s{0.5, 0.0, 0.0};
    battery::State s2 = battery::step(p, s, 0.0, 0.01);
    CHECK(s2.u_th == 0.0);
    CHECK(s2.soc == 0.5);
    CHECK(s2.t == doctest::Approx(0.01));
  }

  SUBCASE("coulomb counting closed form") {
    battery::State s{0.2, 0.0, 0.0};
    for (int i = 0; i < 3600; ++i) s = battery::step(p, s, 45.5, 1.0);
    CHECK(s.soc == doctest::Approx(0.7).epsilon(1e-12));
  }

  SUBCASE("RC steady state is I*R_Th") {
    battery::State s{0.5, 0.0, 0.0};
    s = battery::step(p, s, 50.0, 1e6);  // dt >> tau
    CHECK(s.u_th == doctest::Approx(1.5).epsilon(1e-12));
  }

  SUBCASE("contraction toward I*R_Th for any dt") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> du(-3.0, 3.0), di(-60.0, 60.0),
        dd(1e-4, 1e3);
    for (int k = 0; k < 200; ++k) {
      const double u0 = du(rng), i = di(rng), dt = dd(rng);
      battery::State s{0.5, u0, 0.0};
      battery::State s2 = battery::step(p, s, i, dt);
      const double target = i * 0.03;
      CHECK(std::abs(s2.u_th - target) <= std::abs(u0 - target) + 1e-12);
    }
  }

  SUBCASE("coulomb subdivision is exact") {
    // Dyadic values make the subdivision bit-identical.
    battery::PackParams pd = flat_pack(126.0, 0.04, 0.03, 1500.0, 12.8);
    battery::State whole{0.25, 0.0, 0.0};
    whole = battery::step(pd, whole, 45.0, 0.5);
    battery::State sub{0.25, 0.0, 0.0};
    for (int i = 0; i < 8; ++i) sub = battery::step(pd, sub, 45.0, 0.5 / 8);
    CHECK(whole.soc == sub.soc);

    // Generic values agree to floating-point accuracy.
    battery::State w2{0.2, 0.0, 0.0};
    w2 = battery::step(p, w2, 45.5, 1.0);
    battery::State s2{0.2, 0.0, 0.0};
    for (int i = 0; i < 10; ++i) s2 = battery::step(p, s2, 45.5, 0.1);
    CHECK(s2.soc == doctest::Approx(w2.soc).epsilon(1e-13));
  }

  SUBCASE("exponential step matches subdivided stepping") {
    battery::State a{0.5, 0.7, 0.0};
    a = battery::step(p, a, 30.0, 10.0);
    battery::State b{0.5, 0.7, 0.0};
    for (int i = 0; i < 100; ++i) b = battery::step(p, b, 30.0, 0.1);
    // SoC motion makes parameters identical here (flat tables)
    CHECK(b.u_th == doctest::Approx(a.u_th).epsilon(1e-12));
  }
}

TEST_CASE("terminal voltage and loss power") {
  battery::PackParams p = flat_pack(126.0, 0.05, 0.03, 1500.0, 91.0);

  CHECK(battery::terminal_voltage(p, {0.5, 0.0, 0.0}, 0.0) ==
        doctest::Approx(126.0));
  CHECK(battery::terminal_voltage(p, {0.5, 0.0, 0.0}, 50.0) ==
        doctest::Approx(128.5));
  CHECK(battery::terminal_voltage(p, {0.5, 1.5, 0.0}, 50.0) ==
        doctest::Approx(130.0));

  CHECK(battery::loss_power(p, {0.5, 0.0, 0.0}, 0.0) == 0.0);
  CHECK(battery::loss_power(p, {0.5, 1.5, 0.0}, 50.0) ==
        doctest::Approx(200.0));  // 125 ohmic + 75 polarization
  // even in current at fixed polarization
  CHECK(battery::loss_power(p, {0.5, 1.5, 0.0}, -50.0) ==
        doctest::Approx(200.0));

  std::mt19937 rng(1);
  std::uniform_real_distribution<double> du(-5.0, 5.0), di(-80.0, 80.0);
  for (int k = 0; k < 200; ++k)
    CHECK(battery::loss_power(p, {0.5, du(rng), 0.0}, di(rng)) >= 0.0);
}
