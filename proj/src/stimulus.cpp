#include "tdram/stimulus.hpp"

#include <algorithm>

namespace tdram {

double Stimulus::value_at(double t) const {
  if (is_dc_) return dc_value_;
  if (t <= points_.front().first) return points_.front().second;
  if (t >= points_.back().first) return points_.back().second;
  auto it = std::upper_bound(points_.begin(), points_.end(), t,
                             [](double v, const auto& p) { return v < p.first; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double span = hi.first - lo.first;
  if (span <= 0.0) return hi.second;
  const double w = (t - lo.first) / span;
  return lo.second + w * (hi.second - lo.second);
}

}  // namespace tdram
