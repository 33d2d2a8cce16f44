#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tdram/builders.hpp"
#include "tdram/engine.hpp"
#include "tdram/parser.hpp"

using namespace tdram;

namespace {

Circuit rc_discharge_deck(double r_on, double farads) {
  // Capacitor precharged to 1.2 V through an on switch; the source collapses
  // to 0 right after t = 0 so the cap discharges through ron.
  Circuit c;
  c.add(VoltageSourceElement{"vsrc", "in", "0",
                             Stimulus::pwl({{0.0, 1.2}, {1e-18, 0.0}})});
  c.add(VoltageSourceElement{"vctl", "ctl", "0", Stimulus::dc(1.2)});
  SwitchElement sw;
  sw.name = "sw";
  sw.n_plus = "in";
  sw.n_minus = "out";
  sw.ctrl_source = "vctl";
  sw.on_resistance = r_on;
  sw.off_resistance = 1e15;
  c.add(sw);
  c.add(CapacitorElement{"cl", "out", "0", farads});
  return c;
}

}  // namespace

TEST_CASE("dc: single source node is exact") {
  Circuit c;
  c.add(VoltageSourceElement{"v1", "a", "0", Stimulus::dc(1.2)});
  c.add(CapacitorElement{"c1", "a", "0", 1e-15});
  const auto op = dc_operating_point(c, 0.0);
  CHECK(std::abs(op.at("a") - 1.2) < 1e-12);
  CHECK(op.at("0") == 0.0);
}

TEST_CASE("dc: floating capacitor node rests at ground through g_min") {
  Circuit c;
  c.add(VoltageSourceElement{"v1", "a", "0", Stimulus::dc(1.2)});
  c.add(CapacitorElement{"c1", "b", "0", 1e-15});
  c.add(CapacitorElement{"c2", "a", "0", 1e-15});
  const auto op = dc_operating_point(c, 0.0);
  CHECK(std::abs(op.at("b")) < 1e-9);
}

TEST_CASE("dc: matched on-switch divider splits the supply") {
  Circuit c;
  c.add(VoltageSourceElement{"vsup", "top", "0", Stimulus::dc(1.2)});
  c.add(VoltageSourceElement{"vg", "g", "0", Stimulus::dc(1.2)});
  SwitchElement s1{"s1", "top", "mid", "vg", 0.6, 1e6, 1e12};
  SwitchElement s2{"s2", "mid", "0", "vg", 0.6, 1e6, 1e12};
  c.add(s1);
  c.add(s2);
  const auto op = dc_operating_point(c, 0.0);
  CHECK(std::abs(op.at("mid") - 0.6) < 1e-6);
}

TEST_CASE("dc: frozen source time is honored") {
  Circuit c;
  c.add(VoltageSourceElement{"v1", "a", "0",
                             Stimulus::pwl({{0.0, 0.0}, {1e-9, 1.0}})});
  c.add(CapacitorElement{"c1", "a", "0", 1e-15});
  CHECK(std::abs(dc_operating_point(c, 0.0).at("a")) < 1e-12);
  CHECK(std::abs(dc_operating_point(c, 0.5e-9).at("a") - 0.5) < 1e-9);
}

TEST_CASE("transient: RC discharge matches the analytic exponential") {
  const double r = 1e6, cap = 0.7e-15;
  const double tau = r * cap;  // 0.7 ns
  Circuit c = rc_discharge_deck(r, cap);

  SolverConfig cfg;
  cfg.dt = tau / 1000.0;
  cfg.t_stop = 3.0 * tau;
  const WaveformSet wf = transient(c, cfg);

  const auto& v = wf.node("out");
  for (std::size_t k = 0; k < wf.samples(); ++k) {
    const double expect = 1.2 * std::exp(-wf.time()[k] / tau);
    CHECK(std::abs(v[k] - expect) <= 0.005 * expect + 1e-9);
  }
  // spot value at t = tau per the analytic oracle
  CHECK(wf.node_at("out", tau) == doctest::Approx(1.2 * std::exp(-1.0)).epsilon(0.005));
}

TEST_CASE("transient: RC ladder matches the two-pole closed form") {
  // source --R1-- n1(C1) --R2-- n2(C2), source drops 1.2 -> 0 at t = 0+.
  const double r = 1e6, cap = 1e-15, rc = r * cap;
  Circuit c;
  c.add(VoltageSourceElement{"vsrc", "in", "0", Stimulus::pwl({{0.0, 1.2}, {1e-18, 0.0}})});
  c.add(VoltageSourceElement{"vctl", "ctl", "0", Stimulus::dc(1.2)});
  c.add(SwitchElement{"r1", "in", "n1", "vctl", 0.6, r, 1e15});
  c.add(SwitchElement{"r2", "n1", "n2", "vctl", 0.6, r, 1e15});
  c.add(CapacitorElement{"c1", "n1", "0", cap});
  c.add(CapacitorElement{"c2", "n2", "0", cap});

  SolverConfig cfg;
  cfg.dt = rc / 200.0;
  cfg.t_stop = 4.0 * rc;
  const WaveformSet wf = transient(c, cfg);

  // Closed form from the 2x2 state matrix [[-2, 1], [1, -1]]/rc:
  // eigenvalues (-3 +/- sqrt(5))/2, eigenvectors [1, 2 + lambda].
  const double l1 = (-3.0 + std::sqrt(5.0)) / 2.0;
  const double l2 = (-3.0 - std::sqrt(5.0)) / 2.0;
  const double u1 = 2.0 + l1, u2 = 2.0 + l2;
  // coefficients for x(0) = [1.2, 1.2]
  const double c2c = (1.2 * u1 - 1.2) / (u1 - u2);
  const double c1c = 1.2 - c2c;

  for (std::size_t k = 0; k < wf.samples(); ++k) {
    const double t = wf.time()[k] / rc;
    const double v1 = c1c * std::exp(l1 * t) + c2c * std::exp(l2 * t);
    const double v2 = c1c * u1 * std::exp(l1 * t) + c2c * u2 * std::exp(l2 * t);
    CHECK(std::abs(wf.node("n1")[k] - v1) <= 0.005 * std::abs(v1) + 1e-6);
    CHECK(std::abs(wf.node("n2")[k] - v2) <= 0.005 * std::abs(v2) + 1e-6);
  }
}

TEST_CASE("transient: zero-valued sources hold every node at 0") {
  Circuit c;
  c.add(VoltageSourceElement{"v1", "a", "0", Stimulus::dc(0.0)});
  c.add(VoltageSourceElement{"vctl", "ctl", "0", Stimulus::dc(0.0)});
  c.add(SwitchElement{"s1", "a", "b", "vctl", 0.6, 1e3, 1e12});
  c.add(CapacitorElement{"c1", "b", "0", 1e-15});
  SolverConfig cfg;
  cfg.dt = 1e-12;
  cfg.t_stop = 1e-9;
  const WaveformSet wf = transient(c, cfg);
  for (const auto& name : wf.node_names())
    for (double v : wf.node(name)) CHECK(v == 0.0);
}

TEST_CASE("transient: off-switch leakage droop stays under 1 mV over 10 ns") {
  // Charged through an on switch, isolated at ~1 ns, and only then does the
  // far side collapse: from there the only paths are roff and g_min, so
  // dv/dt = i/C stays at leakage scale.
  Circuit c;
  c.add(VoltageSourceElement{"vsrc", "in", "0",
                             Stimulus::pwl({{0.0, 1.2}, {1.2e-9, 1.2}, {1.21e-9, 0.0}})});
  c.add(VoltageSourceElement{"vctl", "ctl", "0",
                             Stimulus::pwl({{0.0, 1.2}, {1e-9, 1.2}, {1.001e-9, 0.0}})});
  c.add(SwitchElement{"sw", "in", "out", "vctl", 0.6, 1e4, 1e12});
  c.add(CapacitorElement{"cl", "out", "0", 0.7e-15});

  SolverConfig cfg;
  cfg.dt = 5e-12;
  cfg.t_stop = 11.3e-9;
  const WaveformSet wf = transient(c, cfg);
  const double v_hold = wf.node_at("out", 1.3e-9);
  const double v_end = wf.node_at("out", 11.3e-9);
  CHECK(v_hold == doctest::Approx(1.2).epsilon(1e-6));
  CHECK(std::abs(v_end - v_hold) < 1e-3);  // hand bound: V/roff + V*g_min over 10 ns
}

TEST_CASE("transient: halving dt moves cell voltages by less than 1%") {
  const auto cell = build_dram_cell(CellParams{}, {0, 1, 2});
  SolverConfig coarse;  // default dt, halved for the fine run
  coarse.t_stop = 12e-9;
  SolverConfig fine = coarse;
  fine.dt = coarse.dt / 2.0;

  const WaveformSet a = transient(cell.circuit, coarse);
  const WaveformSet b = transient(cell.circuit, fine);
  const double bound = 0.01 * 1.2;
  for (const auto& node : {"x", "bl2", "a"}) {
    const auto& va = a.node(node);
    for (std::size_t k = 0; k < a.samples(); ++k) {
      const double vb = b.node(node)[2 * k];
      CHECK(std::abs(va[k] - vb) < bound);
    }
  }
}

TEST_CASE("transient: bit-identical reruns") {
  const auto cell = build_dram_cell(CellParams{}, {2, 1});
  SolverConfig cfg;
  cfg.dt = 1e-12;
  cfg.t_stop = 8e-9;
  const WaveformSet a = transient(cell.circuit, cfg);
  const WaveformSet b = transient(cell.circuit, cfg);
  REQUIRE(a.samples() == b.samples());
  for (const auto& node : a.node_names()) {
    const auto& va = a.node(node);
    const auto& vb = b.node(node);
    for (std::size_t k = 0; k < va.size(); ++k) CHECK(va[k] == vb[k]);
  }
  for (const auto& el : a.element_names()) {
    const auto& ia = a.branch(el);
    const auto& ib = b.branch(el);
    for (std::size_t k = 0; k < ia.size(); ++k) CHECK(ia[k] == ib[k]);
  }
}

TEST_CASE("transient: capacitor energy is non-increasing once sources die") {
  // Cell deck with every source forced to 0 after 1 ns.
  auto cell = build_dram_cell(CellParams{}, {2});
  const double t_off = 1e-9;
  for (auto& e : cell.circuit.elements) {
    auto* src = std::get_if<VoltageSourceElement>(&e);
    if (!src) continue;
    const double v0 = src->waveform.value_at(0.0);
    src->waveform = Stimulus::pwl({{0.0, v0}, {t_off, v0}, {t_off + 50e-12, 0.0}});
  }
  SolverConfig cfg;
  cfg.dt = 1e-12;
  cfg.t_stop = 4e-9;
  const WaveformSet wf = transient(cell.circuit, cfg);

  const auto& vx = wf.node("x");
  const auto& vb = wf.node("bl2");
  double prev = 1e9;
  for (std::size_t k = 0; k < wf.samples(); ++k) {
    if (wf.time()[k] < t_off + 60e-12) continue;
    const double energy = 0.5 * 0.1e-15 * vx[k] * vx[k] + 0.5 * 0.7e-15 * vb[k] * vb[k];
    CHECK(energy <= prev + 1e-21);
    prev = energy;
  }
}

TEST_CASE("transient: trapezoidal and backward Euler agree on the cell deck") {
  const auto cell = build_dram_cell(CellParams{}, {0, 1, 2});
  SolverConfig tr;
  tr.dt = 0.1e-12;
  tr.t_stop = 12e-9;
  SolverConfig be = tr;
  be.method = SolverConfig::Method::BackwardEuler;

  const WaveformSet a = transient(cell.circuit, tr);
  const WaveformSet b = transient(cell.circuit, be);
  const double bound = 0.02 * 1.2;
  for (const auto& node : {"x", "bl2"}) {
    const auto& va = a.node(node);
    const auto& vbv = b.node(node);
    for (std::size_t k = 0; k < a.samples(); ++k) CHECK(std::abs(va[k] - vbv[k]) < bound);
  }
}

TEST_CASE("non-convergence is reported with context") {
  // DC needs several Newton iterations; one is never enough.
  const auto cell = build_dram_cell(CellParams{}, {2});
  SolverConfig cfg;
  cfg.dt = 1e-12;
  cfg.t_stop = 4e-9;
  cfg.max_newton = 1;
  CHECK_THROWS_AS(transient(cell.circuit, cfg), NonConvergence);

  // Converges trivially at t=0 but cannot track a 1.2 V ramp with two
  // iterations and a clamped step.
  Circuit c;
  c.add(VoltageSourceElement{"vin", "in", "0", Stimulus::pwl({{0.0, 0.0}, {1e-9, 1.2}})});
  c.add(SwitchElement{"sw", "in", "d", "vin", -1.0, 1e3, 1e12});
  CntfetElement fet;
  fet.name = "m1";
  fet.drain = "d";
  fet.gate = "d";
  fet.source = "0";
  fet.device.vth_override = 0.29;
  c.add(fet);
  c.add(CapacitorElement{"cl", "d", "0", 1e-15});
  SolverConfig hard;
  hard.dt = 0.5e-9;
  hard.t_stop = 1.5e-9;
  hard.max_newton = 2;
  try {
    transient(c, hard);
    FAIL("expected NonConvergence");
  } catch (const NonConvergence& ex) {
    CHECK(ex.at_time() > 0.0);
    CHECK(!ex.worst_node().empty());
    CHECK(ex.iterations() == 2);
  }
}

TEST_CASE("config and circuit preconditions") {
  const auto cell = build_dram_cell(CellParams{}, {0});
  SolverConfig bad;
  bad.dt = 0.0;
  bad.t_stop = 1e-9;
  CHECK_THROWS_AS(transient(cell.circuit, bad), std::invalid_argument);

  Circuit invalid;  // no source
  invalid.add(CapacitorElement{"c1", "a", "0", 1e-15});
  CHECK_THROWS_AS(dc_operating_point(invalid, 0.0), std::invalid_argument);
}
