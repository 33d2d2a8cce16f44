#include "tdram/device.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace tdram {

namespace {

constexpr double kThermalVolt = 0.025852;  // kT/q near 300 K, for the leak knee
constexpr double kKelvinAt25C = 298.15;
constexpr double kLn10 = 2.302585092994046;

}  // namespace

void validate(const Chirality& c) {
  if (c.n < 0 || c.m < 0)
    throw std::invalid_argument("chirality indices must be non-negative");
  if (c.n == 0 && c.m == 0)
    throw std::invalid_argument("chirality (0,0) does not define a tube");
  if (c.m > c.n)
    throw std::invalid_argument("chirality requires n >= m (got n=" +
                                std::to_string(c.n) + ", m=" + std::to_string(c.m) + ")");
}

double tube_diameter_nm(const Chirality& c) {
  validate(c);
  const double n = c.n, m = c.m;
  return kConstants.interatomic_nm * std::sqrt(n * n + m * m + n * m) / std::numbers::pi;
}

double chiral_angle_deg(const Chirality& c) {
  validate(c);
  const double denom = 2.0 * c.m + c.n;
  if (denom == 0.0)
    throw std::invalid_argument("chiral angle undefined for 2m + n = 0");
  return std::atan(std::sqrt(3.0) * c.n / denom) * 180.0 / std::numbers::pi;
}

Conduction classify_conduction(const Chirality& c) {
  validate(c);
  return (c.n - c.m) % 3 == 0 ? Conduction::Metallic : Conduction::Semiconducting;
}

double threshold_voltage(const Chirality& c) {
  if (classify_conduction(c) != Conduction::Semiconducting)
    throw std::invalid_argument("metallic chirality (" + std::to_string(c.n) + "," +
                                std::to_string(c.m) + ") has no bandgap");
  return kConstants.interatomic_nm * kConstants.pi_bond_ev /
         (std::sqrt(3.0) * kConstants.e_charge * tube_diameter_nm(c));
}

double CntfetDevice::threshold() const {
  if (vth_override) return *vth_override;
  const double vth = threshold_voltage(chirality);
  return polarity == Polarity::N ? vth : -vth;
}

void validate(const CntfetDevice& dev) {
  validate(dev.chirality);
  if (dev.tubes < 1) throw std::invalid_argument("device needs at least one tube");
  if (dev.channel_length_nm <= 0.0) throw std::invalid_argument("channel length must be positive");
  if (dev.oxide_thickness_nm <= 0.0) throw std::invalid_argument("oxide thickness must be positive");
  if (dev.k_on <= 0.0) throw std::invalid_argument("k_on must be positive");
  if (dev.i_off <= 0.0) throw std::invalid_argument("i_off must be positive");
  if (dev.ss_mv_per_dec <= 0.0) throw std::invalid_argument("subthreshold swing must be positive");
  if (classify_conduction(dev.chirality) != Conduction::Semiconducting)
    throw std::invalid_argument("metallic chirality cannot form a FET channel");
  if (dev.vth_override) {
    if (dev.polarity == Polarity::N && *dev.vth_override <= 0.0)
      throw std::invalid_argument("N-device threshold override must be positive");
    if (dev.polarity == Polarity::P && *dev.vth_override >= 0.0)
      throw std::invalid_argument("P-device threshold override must be negative");
  }
}

DeviceEval make_eval(const CntfetDevice& dev, double temperature_c) {
  DeviceEval e;
  e.sign = dev.polarity == Polarity::N ? 1.0 : -1.0;
  e.vth = std::abs(dev.threshold());
  e.tubes = static_cast<double>(dev.tubes);

  const double geom = (kReferenceChannelNm / dev.channel_length_nm) *
                      (kReferenceOxideNm / dev.oxide_thickness_nm);
  const double k_derate = std::max(1.0 - 0.002 * (temperature_c - 25.0), 0.05);
  e.k = dev.k_on * geom * k_derate;

  e.i_off = dev.i_off * std::exp2((temperature_c - 25.0) / 12.0);

  const double t_kelvin = std::max(temperature_c + 273.15, 50.0);
  e.ss_v = (dev.ss_mv_per_dec * 1e-3) * t_kelvin / kKelvinAt25C;

  // Subthreshold scale current. The exponential anchored at i_off would
  // exceed the square-law on-current for large Vth, so it is capped by a
  // near-threshold scale derived from k and the swing (the factor 2 makes
  // the capped at-threshold current k*(2*ss/ln10)^2, which puts the cell's
  // mid-level read current at the intended scale).
  const double knee = 2.0 * e.k * (2.0 * e.ss_v / kLn10) * (2.0 * e.ss_v / kLn10);
  e.i_stitch = std::min(e.i_off * std::pow(10.0, e.vth / e.ss_v), knee);
  return e;
}

double DeviceEval::current(double v_gs, double v_ds) const {
  // P symmetry: evaluate the N equivalent at negated biases, negate result.
  double vgs = sign * v_gs;
  double vds = sign * v_ds;
  double flip = sign;

  // Reverse conduction: exchange drain and source roles.
  if (vds < 0.0) {
    vgs -= vds;
    vds = -vds;
    flip = -flip;
  }

  const double f_ds = 1.0 - std::exp(-vds / kThermalVolt);
  const double u = vgs - vth;
  // Logistic blend: exact decade-per-ss slope deep below threshold, smooth
  // saturation at i_stitch/2 crossing the threshold. Keeps the model C1 so
  // Newton does not chatter on a derivative kink.
  const double sigma = 1.0 / (1.0 + std::pow(10.0, -u / ss_v));
  double i_ch = i_stitch * sigma * f_ds;
  if (u > 0.0) i_ch += vds < u ? k * (u - 0.5 * vds) * vds : 0.5 * k * u * u;
  return flip * tubes * (i_ch + i_off * f_ds);
}

double drain_current(const CntfetDevice& dev, double v_gs, double v_ds,
                     double temperature_c) {
  if (!std::isfinite(v_gs) || !std::isfinite(v_ds) || !std::isfinite(temperature_c))
    throw std::invalid_argument("drain_current requires finite inputs");
  return make_eval(dev, temperature_c).current(v_gs, v_ds);
}

}  // namespace tdram
