#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

namespace tdram {

/// Source waveform: either a DC level or a piecewise-linear schedule.
/// PWL holds the first value before the first point and the last value
/// after the last point.
class Stimulus {
 public:
  Stimulus() = default;

  static Stimulus dc(double volts) {
    Stimulus s;
    s.is_dc_ = true;
    s.dc_value_ = volts;
    return s;
  }

  static Stimulus pwl(std::vector<std::pair<double, double>> points) {
    if (points.empty()) throw std::invalid_argument("pwl needs at least one point");
    for (std::size_t i = 1; i < points.size(); ++i)
      if (points[i].first < points[i - 1].first)
        throw std::invalid_argument("pwl times must be non-decreasing");
    Stimulus s;
    s.is_dc_ = false;
    s.points_ = std::move(points);
    return s;
  }

  double value_at(double t) const;

  bool is_dc() const { return is_dc_; }
  double dc_value() const { return dc_value_; }
  const std::vector<std::pair<double, double>>& points() const { return points_; }

  bool operator==(const Stimulus&) const = default;

 private:
  bool is_dc_ = true;
  double dc_value_ = 0.0;
  std::vector<std::pair<double, double>> points_;
};

}  // namespace tdram
