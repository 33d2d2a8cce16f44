#include "tdram/measure.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace tdram {

namespace {

// First crossing of `level` by the series inside [t_begin, t_end], located
// by linear interpolation. direction +1 wants an upward crossing, -1 a
// downward one, 0 either.
std::optional<double> find_crossing(const WaveformSet& wf, const std::vector<double>& series,
                                    double t_begin, double t_end, double level, int direction) {
  const auto& time = wf.time();
  double prev_t = t_begin;
  double prev_v = 0.0;
  bool have_prev = false;
  for (std::size_t i = 0; i < time.size(); ++i) {
    const double t = time[i];
    if (t < t_begin) continue;
    if (t > t_end) break;
    const double v = series[i];
    if (have_prev) {
      const bool up = prev_v < level && v >= level;
      const bool down = prev_v > level && v <= level;
      if ((direction >= 0 && up) || (direction <= 0 && down)) {
        const double dv = v - prev_v;
        if (dv == 0.0) return t;
        return prev_t + (level - prev_v) / dv * (t - prev_t);
      }
    }
    prev_t = t;
    prev_v = v;
    have_prev = true;
  }
  return std::nullopt;
}

void check_cycle(const WaveformSet& wf, const DramCell& cell, int cycle) {
  const int cycles = static_cast<int>(cell.sequence.size());
  if (cycle < 0 || cycle >= cycles)
    throw MeasureError("cycle " + std::to_string(cycle) + " out of range (deck has " +
                       std::to_string(cycles) + ")");
  const double t_end = (cycle + 1) * cell.params.cycle_time;
  if (wf.time().empty() || wf.time().back() + 1e-15 < t_end)
    throw MeasureError("waveform does not cover cycle " + std::to_string(cycle));
}

double wl_rise_time(const WaveformSet& wf, const DramCell& cell, int cycle) {
  const double T = cell.params.cycle_time;
  auto t = find_crossing(wf, wf.node("wl"), cycle * T, cycle * T + T / 2.0,
                         cell.params.vdd / 2.0, +1);
  if (!t) throw MeasureError("no WL rising edge in cycle " + std::to_string(cycle));
  return *t;
}

double wl_fall_time(const WaveformSet& wf, const DramCell& cell, int cycle) {
  const double T = cell.params.cycle_time;
  auto t = find_crossing(wf, wf.node("wl"), cycle * T + T / 4.0, (cycle + 1) * T,
                         cell.params.vdd / 2.0, -1);
  if (!t) throw MeasureError("no WL falling edge in cycle " + std::to_string(cycle));
  return *t;
}

// Trapezoidal time average of f(sample) over [t_begin, t_end] on the
// waveform grid, with interpolated window endpoints.
template <typename F>
double window_average(const WaveformSet& wf, double t_begin, double t_end, F&& value_at_index) {
  const auto& time = wf.time();
  auto value_at_time = [&](double t) {
    if (t <= time.front()) return value_at_index(std::size_t{0});
    if (t >= time.back()) return value_at_index(time.size() - 1);
    auto it = std::upper_bound(time.begin(), time.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - time.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - time[lo]) / (time[hi] - time[lo]);
    const double a = value_at_index(lo);
    return a + w * (value_at_index(hi) - a);
  };

  double integral = 0.0;
  double prev_t = t_begin;
  double prev_v = value_at_time(t_begin);
  for (std::size_t i = 0; i < time.size(); ++i) {
    if (time[i] <= t_begin) continue;
    if (time[i] >= t_end) break;
    const double v = value_at_index(i);
    integral += 0.5 * (prev_v + v) * (time[i] - prev_t);
    prev_t = time[i];
    prev_v = v;
  }
  const double v_end = value_at_time(t_end);
  integral += 0.5 * (prev_v + v_end) * (t_end - prev_t);
  return integral / (t_end - t_begin);
}

}  // namespace

double read_start_time(const WaveformSet& wf, const DramCell& cell, int cycle) {
  check_cycle(wf, cell, cycle);
  return wl_fall_time(wf, cell, cycle);
}

double write_delay(const WaveformSet& wf, const DramCell& cell, int cycle) {
  check_cycle(wf, cell, cycle);
  const double T = cell.params.cycle_time;
  const double t_ref = wl_rise_time(wf, cell, cycle);

  const auto& x = wf.node("x");
  const double v_start = wf.node_at("x", t_ref);
  const double target = stored_target(cell.sequence[static_cast<std::size_t>(cycle)], cell.params);
  const double swing = target - v_start;
  if (std::abs(swing) < 1e-3) return 0.0;  // rewriting the held value

  const double level = v_start + 0.5 * swing;
  auto t_cross = find_crossing(wf, x, t_ref, (cycle + 1) * T, level, swing > 0.0 ? +1 : -1);
  if (!t_cross)
    throw TargetNeverReached("node X never crossed 50% of its swing in cycle " +
                             std::to_string(cycle));
  return *t_cross - t_ref;
}

double read_sense_time(const WaveformSet& wf, const DramCell& cell, int expected_trit, int cycle,
                       SenseMetricVariant variant) {
  check_cycle(wf, cell, cycle);
  if (expected_trit < 0 || expected_trit > 2)
    throw MeasureError("expected trit must be 0, 1 or 2");
  if (expected_trit == 0) return 0.0;  // BL2 holds precharge; no crossing exists

  const double vdd = cell.params.vdd;
  const double final_level = expected_trit == 1 ? vdd / 2.0 : 0.0;
  double level;
  if (variant == SenseMetricVariant::Excursion)
    level = vdd - 0.2 * (vdd - final_level);
  else
    level = 0.2 * final_level;

  const double t_ref = wl_fall_time(wf, cell, cycle);
  auto t_cross =
      find_crossing(wf, wf.node("bl2"), t_ref, (cycle + 1) * cell.params.cycle_time, level, -1);
  if (!t_cross)
    throw ExcursionNeverReached("BL2 never reached the 20% level for trit " +
                                std::to_string(expected_trit) + " in cycle " +
                                std::to_string(cycle));
  return *t_cross - t_ref;
}

double cycle_current(const WaveformSet& wf, const DramCell& cell, int cycle) {
  check_cycle(wf, cell, cycle);
  if (!wf.has_branch("m1") || !wf.has_branch("m2"))
    throw MeasureError("waveform lacks branch currents for m1/m2");
  const auto& i1 = wf.branch("m1");
  const auto& i2 = wf.branch("m2");
  const double T = cell.params.cycle_time;
  return window_average(wf, cycle * T, (cycle + 1) * T, [&](std::size_t k) {
    return std::abs(i1[k]) + std::abs(i2[k]);
  });
}

double cycle_power(const WaveformSet& wf, const DramCell& cell, int cycle) {
  check_cycle(wf, cell, cycle);
  const double T = cell.params.cycle_time;
  double total = 0.0;
  for (const auto& e : cell.circuit.elements) {
    const auto* src = std::get_if<VoltageSourceElement>(&e);
    if (!src) continue;
    const auto& vp = wf.node(src->n_plus);
    const auto& vm = wf.node(src->n_minus);
    const auto& i = wf.branch(src->name);
    total += window_average(wf, cycle * T, (cycle + 1) * T, [&](std::size_t k) {
      return (vp[k] - vm[k]) * -i[k];
    });
  }
  return total;
}

double cycle_power_vdd_current(const WaveformSet& wf, const DramCell& cell, int cycle) {
  return cell.params.vdd * cycle_current(wf, cell, cycle);
}

double stored_voltage(const WaveformSet& wf, const DramCell& cell, int cycle) {
  check_cycle(wf, cell, cycle);
  return wf.node_at("x", wl_fall_time(wf, cell, cycle));
}

int classify_read(const WaveformSet& wf, const std::string& out_node, double window_begin,
                  double window_end, double vdd) {
  if (!(window_end > window_begin)) throw MeasureError("empty classification window");
  auto band = [vdd](double v) {
    if (v < vdd / 3.0) return 0;
    if (v < 2.0 * vdd / 3.0) return 1;
    return 2;
  };
  const auto& series = wf.node(out_node);
  const int result = band(wf.node_at(out_node, window_end));

  const double guard_begin = window_end - 0.1 * (window_end - window_begin);
  const auto& time = wf.time();
  for (std::size_t i = 0; i < time.size(); ++i) {
    if (time[i] < guard_begin || time[i] > window_end) continue;
    if (band(series[i]) != result)
      throw AmbiguousRead("sense output moved between bands near the window end");
  }
  return result;
}

CycleMeasurements measure_cycle(const WaveformSet& wf, const DramCell& cell, int cycle,
                                SenseMetricVariant variant) {
  CycleMeasurements m;
  m.written_trit = cell.sequence[static_cast<std::size_t>(cycle)];
  m.write_time_s = write_delay(wf, cell, cycle);
  m.read_sense_time_s = read_sense_time(wf, cell, m.written_trit, cycle, variant);
  m.avg_current_a = cycle_current(wf, cell, cycle);
  m.avg_power_w = cycle_power(wf, cell, cycle);
  return m;
}

}  // namespace tdram
