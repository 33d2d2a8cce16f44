#include "tdram/builders.hpp"

#include <stdexcept>
#include <string>

namespace tdram {

namespace {

CntfetDevice make_device(const CellParams& p, Polarity pol, Chirality c, double vth_override) {
  CntfetDevice d;
  d.polarity = pol;
  d.chirality = c;
  d.tubes = p.tubes;
  d.channel_length_nm = p.channel_length_nm;
  d.oxide_thickness_nm = p.oxide_thickness_nm;
  d.k_on = p.k_on;
  d.i_off = p.i_off;
  d.ss_mv_per_dec = p.ss_mv_per_dec;
  d.vth_override = vth_override;
  return d;
}

CntfetDevice make_sense_device(const CellParams& p, Polarity pol, Chirality c) {
  CntfetDevice d;
  d.polarity = pol;
  d.chirality = c;
  d.tubes = p.tubes;
  d.channel_length_nm = p.channel_length_nm;
  d.oxide_thickness_nm = p.oxide_thickness_nm;
  d.k_on = p.k_on;
  d.i_off = p.i_off;
  d.ss_mv_per_dec = p.ss_mv_per_dec;
  return d;
}

}  // namespace

void validate(const CellParams& p) {
  if (!(p.vdd > 0.0)) throw std::invalid_argument("vdd must be positive");
  if (!(p.c_s > 0.0) || !(p.c_bl > 0.0))
    throw std::invalid_argument("capacitances must be positive");
  if (!(p.vth_m1 > 0.0) || !(p.vth_m2 > 0.0))
    throw std::invalid_argument("vth_m1 and vth_m2 must be positive");
  if (!(p.vth_m3 < 0.0)) throw std::invalid_argument("vth_m3 must be negative");
  if (!(p.edge_time > 0.0) || !(p.cycle_time > 0.0))
    throw std::invalid_argument("timing parameters must be positive");
  if (!(p.edge_time < p.cycle_time / 4.0))
    throw std::invalid_argument("edge_time must be below cycle_time/4");
  if (!(p.channel_length_nm > 0.0) || !(p.oxide_thickness_nm > 0.0))
    throw std::invalid_argument("device geometry must be positive");
  if (p.tubes < 1) throw std::invalid_argument("tube count must be at least 1");
  if (!(p.precharge_ron > 0.0) || !(p.precharge_ron < p.precharge_roff))
    throw std::invalid_argument("precharge switch needs 0 < ron < roff");
}

double trit_level(int trit, double vdd) {
  switch (trit) {
    case 0: return 0.0;
    case 1: return vdd / 2.0;
    case 2: return vdd;
    default:
      throw std::invalid_argument("invalid trit " + std::to_string(trit) +
                                  " (must be 0, 1 or 2)");
  }
}

double stored_target(int trit, const CellParams& p) {
  const double level = trit_level(trit, p.vdd);
  return std::min(level, p.vdd - p.vth_m1);
}

DramCell build_dram_cell(const CellParams& p, const std::vector<int>& sequence) {
  validate(p);
  if (sequence.empty()) throw std::invalid_argument("trit sequence must not be empty");
  for (int t : sequence) trit_level(t, p.vdd);  // rejects invalid trits

  const double T = p.cycle_time;
  const double half = T / 2.0;
  const int cycles = static_cast<int>(sequence.size());

  Circuit c;
  c.title = "ternary 3t dram cell";
  c.temperature_c = p.temperature_c;

  // Word line: square wave, write half high then read half low, per trit.
  std::vector<std::pair<double, double>> wl_pts;
  for (int k = 0; k < cycles; ++k) {
    const double t0 = k * T;
    wl_pts.emplace_back(t0, 0.0);
    wl_pts.emplace_back(t0 + p.edge_time, p.vdd);
    wl_pts.emplace_back(t0 + half, p.vdd);
    wl_pts.emplace_back(t0 + half + p.edge_time, 0.0);
  }
  c.add(VoltageSourceElement{"vwl", "wl", "0", Stimulus::pwl(wl_pts)});

  // Write bit-line: holds each trit's level for a full cycle, ramping to the
  // next level at the cycle boundary.
  std::vector<std::pair<double, double>> bl_pts;
  bl_pts.emplace_back(0.0, trit_level(sequence[0], p.vdd));
  for (int k = 1; k < cycles; ++k) {
    bl_pts.emplace_back(k * T, trit_level(sequence[k - 1], p.vdd));
    bl_pts.emplace_back(k * T + p.edge_time, trit_level(sequence[k], p.vdd));
  }
  c.add(VoltageSourceElement{"vbl1", "bl1", "0", Stimulus::pwl(bl_pts)});

  c.add(VoltageSourceElement{"vdd", "vdd", "0", Stimulus::dc(p.vdd)});

  c.add(CntfetElement{"m1", "x", "wl", "bl1",
                      make_device(p, Polarity::N, {23, 0}, p.vth_m1)});
  c.add(CntfetElement{"m2", "a", "x", "0",
                      make_device(p, Polarity::N, {10, 0}, p.vth_m2)});
  c.add(CntfetElement{"m3", "a", "wl", "bl2",
                      make_device(p, Polarity::P, {23, 0}, p.vth_m3)});

  c.add(CapacitorElement{"cs", "x", "0", p.c_s});
  c.add(CapacitorElement{"cbl", "bl2", "0", p.c_bl});

  SwitchElement pre;
  pre.name = "spc";
  pre.n_plus = "bl2";
  pre.n_minus = "vdd";
  pre.ctrl_source = "vwl";
  pre.threshold = p.vdd / 2.0;
  pre.on_resistance = p.precharge_ron;
  pre.off_resistance = p.precharge_roff;
  c.add(pre);

  return DramCell{std::move(c), p, sequence};
}

Circuit build_sense_circuit(const CellParams& p, bool with_enable, bool enable_on) {
  validate(p);
  Circuit c;
  c.title = "ternary sense circuitry";
  c.temperature_c = p.temperature_c;

  const Chirality pass{19, 0};  // |vth| ~ 0.29 V
  const Chirality out{10, 0};   // |vth| ~ 0.55 V

  const std::string rail_p = with_enable ? "svp" : "vdd";
  const std::string rail_n = with_enable ? "svn" : "0";

  // The input pair is sized up so it can feed the diode pass pair over the
  // whole middle band; a minimum-size input device starves the mid-level
  // output and collapses the transfer curve early.
  CntfetDevice in_p = make_sense_device(p, Polarity::P, pass);
  CntfetDevice in_n = make_sense_device(p, Polarity::N, pass);
  in_p.tubes *= 6;
  in_n.tubes *= 6;

  c.add(CntfetElement{"ms1", "sa", "bl2", rail_p, in_p});
  c.add(CntfetElement{"ms2", "sa", "sa", "sout", make_sense_device(p, Polarity::N, pass)});
  c.add(CntfetElement{"ms3", "sout", "bl2", rail_p, make_sense_device(p, Polarity::P, out)});
  c.add(CntfetElement{"ms4", "sout", "bl2", rail_n, make_sense_device(p, Polarity::N, out)});
  c.add(CntfetElement{"ms5", "sb", "sb", "sout", make_sense_device(p, Polarity::P, pass)});
  c.add(CntfetElement{"ms6", "sb", "bl2", rail_n, in_n});

  if (with_enable) {
    c.add(CntfetElement{"msh", "svp", "enb", "vdd", make_sense_device(p, Polarity::P, pass)});
    c.add(CntfetElement{"msf", "svn", "en", "0", make_sense_device(p, Polarity::N, pass)});
    c.add(VoltageSourceElement{"ven", "en", "0",
                               Stimulus::dc(enable_on ? p.vdd : 0.0)});
    c.add(VoltageSourceElement{"venb", "enb", "0",
                               Stimulus::dc(enable_on ? 0.0 : p.vdd)});
  }
  return c;
}

DramCell build_cell_with_sense(const CellParams& p, const std::vector<int>& sequence,
                               bool with_enable, bool enable_on) {
  DramCell cell = build_dram_cell(p, sequence);
  Circuit sense = build_sense_circuit(p, with_enable, enable_on);
  for (auto& e : sense.elements) cell.circuit.add(std::move(e));
  cell.circuit.title = "ternary 3t dram cell with sense circuitry";
  return cell;
}

}  // namespace tdram
