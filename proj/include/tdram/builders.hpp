#pragma once

#include <vector>

#include "tdram/circuit.hpp"

namespace tdram {

/// Cell electrical parameters plus the simulation conditions the Monte
/// Carlo study varies. Nominal values follow the design's operating point:
/// 1.2 V supply, 0.1 fF storage / 0.7 fF bit-line capacitors, device
/// thresholds 0.24 / 0.6 / -0.24 V, 50 ps stimulus edges.
struct CellParams {
  double vdd = 1.2;
  double c_s = 0.1e-15;
  double c_bl = 0.7e-15;
  double vth_m1 = 0.24;
  double vth_m2 = 0.6;
  double vth_m3 = -0.24;
  double edge_time = 50e-12;
  double cycle_time = 5.2e-9;  // one write half + one read half per trit

  // environment / device context
  double temperature_c = 25.0;
  double channel_length_nm = 16.0;
  double oxide_thickness_nm = 4.0;
  double k_on = 40e-6;
  double i_off = 1e-12;
  double ss_mv_per_dec = 70.0;
  int tubes = 1;

  double precharge_ron = 10e3;
  double precharge_roff = 1e12;
};

void validate(const CellParams& p);

/// Trit encoding on the write bit-line: 0 -> 0 V, 1 -> vdd/2, 2 -> vdd.
double trit_level(int trit, double vdd);

/// Voltage node X is expected to hold after writing the trit: the encoded
/// level, except that writing "2" through the N pass device suffers a
/// threshold drop to vdd - vth_m1.
double stored_target(int trit, const CellParams& p);

/// A built cell deck: the circuit plus the parameters and trit sequence the
/// stimulus schedule encodes (the measurement extractors need both).
struct DramCell {
  Circuit circuit;
  CellParams params;
  std::vector<int> sequence;
};

/// The 3-transistor ternary cell:
///   M1 (N, vth_m1) gated by WL between BL1 and storage node X;
///   C_S from X to ground;
///   M3 (P, vth_m3) gated by WL between BL2 and internal node A, so the
///   read path conducts when WL is low;
///   M2 (N, vth_m2) gated by X between A and ground;
///   C_BL on BL2; a precharge switch from BL2 to the VDD rail closed while
///   WL is high; BL1 steps through the trit sequence; WL is a square wave,
///   one cycle per trit (write half then read half).
DramCell build_dram_cell(const CellParams& p, const std::vector<int>& sequence);

/// Six-transistor standard ternary inverter sensing BL2, mapping
/// 0 -> 2, 1 -> 1, 2 -> 0 at node "sout":
///   input pair (19,0) at |vth| ~ 0.29 V, output pair (10,0) at ~ 0.55 V,
///   and a diode-connected (19,0) pass pair that ratios the middle level.
/// with_enable adds a P header and N footer gated by En / En-bar that cut
/// the inverter from the rails; enable_on sets the En source levels.
/// The result is a fragment: its "bl2" input and "vdd" rail bind by name
/// when merged onto a cell deck.
Circuit build_sense_circuit(const CellParams& p, bool with_enable, bool enable_on = true);

/// Cell deck with the sense circuitry attached to BL2.
DramCell build_cell_with_sense(const CellParams& p, const std::vector<int>& sequence,
                               bool with_enable, bool enable_on = true);

}  // namespace tdram
