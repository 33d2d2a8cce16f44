#pragma once

#include <stdexcept>
#include <string>

#include "tdram/builders.hpp"
#include "tdram/engine.hpp"

namespace tdram {

class MeasureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TargetNeverReached : public MeasureError {
 public:
  using MeasureError::MeasureError;
};

class ExcursionNeverReached : public MeasureError {
 public:
  using MeasureError::MeasureError;
};

class AmbiguousRead : public MeasureError {
 public:
  using MeasureError::MeasureError;
};

/// Interpretation of the read metric's "20% of the data to be read":
/// Excursion (default) measures the time for BL2 to fall by 20% of the
/// expected excursion for the trit (vdd -> vdd/2 for "1", vdd -> 0 for "2").
/// FinalValue instead waits for BL2 to reach 20% of the final data level,
/// which never happens for "2" in a finite window; it exists for comparison.
enum class SenseMetricVariant { Excursion, FinalValue };

struct CycleMeasurements {
  int written_trit = 0;
  double write_time_s = 0.0;
  double read_sense_time_s = 0.0;
  double avg_current_a = 0.0;
  double avg_power_w = 0.0;
};

/// Write delay for the given cycle: time from WL crossing 50% of vdd on the
/// cycle's rising edge until X crosses the midpoint of its swing toward the
/// stored target. Returns 0 when the cycle rewrites the value already held
/// (swing below 1 mV). Crossings are located by linear interpolation.
double write_delay(const WaveformSet& wf, const DramCell& cell, int cycle);

/// Read sensing time: from WL's 50% falling edge until BL2 has fallen by
/// 20% of the expected excursion for the trit. Defined as 0 for trit 0
/// (BL2 holds its precharge).
double read_sense_time(const WaveformSet& wf, const DramCell& cell, int expected_trit,
                       int cycle, SenseMetricVariant variant = SenseMetricVariant::Excursion);

/// Time-average over the cycle of |i(M1)| + |i(M2)| (write path plus read
/// discharge path), trapezoidal integration over samples.
double cycle_current(const WaveformSet& wf, const DramCell& cell, int cycle);

/// Primary power figure: time-average over the cycle of the power delivered
/// by all voltage sources, sum of v * (-i) with branch current positive
/// into n_plus.
double cycle_power(const WaveformSet& wf, const DramCell& cell, int cycle);

/// Secondary figure for comparison: vdd times cycle_current.
double cycle_power_vdd_current(const WaveformSet& wf, const DramCell& cell, int cycle);

/// Voltage held on storage node X at the cycle's write/read handoff
/// (WL 50% falling).
double stored_voltage(const WaveformSet& wf, const DramCell& cell, int cycle);

/// Samples a sense output at the window end and maps voltage bands to a
/// trit: [0, vdd/3) -> 0, [vdd/3, 2vdd/3) -> 1, above -> 2. Throws
/// AmbiguousRead if the output moves between bands within the last 10% of
/// the window.
int classify_read(const WaveformSet& wf, const std::string& out_node, double window_begin,
                  double window_end, double vdd);

/// All per-cycle metrics in one pass.
CycleMeasurements measure_cycle(const WaveformSet& wf, const DramCell& cell, int cycle,
                                SenseMetricVariant variant = SenseMetricVariant::Excursion);

/// Start of the cycle's read half: WL 50% falling crossing.
double read_start_time(const WaveformSet& wf, const DramCell& cell, int cycle);

}  // namespace tdram
