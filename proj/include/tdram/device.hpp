#pragma once

#include <optional>
#include <stdexcept>

namespace tdram {

/// Rolling vector (n, m) of the graphene sheet forming a carbon nanotube.
/// Canonical orientation requires n >= m; inputs with m > n are rejected
/// rather than silently swapped.
struct Chirality {
  int n = 0;
  int m = 0;
};

/// Throws std::invalid_argument unless c is a usable chirality:
/// non-negative indices, not (0,0), and n >= m.
void validate(const Chirality& c);

/// Fixed tight-binding constants used by the diameter/threshold math.
struct PhysicalConstants {
  double interatomic_nm = 0.249;  // a, distance between adjoining C atoms
  double pi_bond_ev = 3.033;      // V_pi, carbon pi-pi bond energy
  double e_charge = 1.0;          // elementary charge in eV-volt bookkeeping
};

inline constexpr PhysicalConstants kConstants{};

enum class Conduction { Metallic, Semiconducting };

/// Tube diameter in nm: a*sqrt(n^2 + m^2 + n*m)/pi.
double tube_diameter_nm(const Chirality& c);

/// Chiral angle in degrees: atan(sqrt(3)*n / (2m + n)).
/// Note this yields 60 deg for zigzag (m = 0) tubes; nothing downstream
/// consumes the angle, so the formula is kept verbatim.
double chiral_angle_deg(const Chirality& c);

/// Metallic iff (n - m) mod 3 == 0 (includes n == m).
Conduction classify_conduction(const Chirality& c);

/// First-order half-bandgap estimate, volts, always positive:
///   a*Vpi / (sqrt(3) * e * D_cnt).
/// Throws for metallic chiralities (no bandgap).
double threshold_voltage(const Chirality& c);

enum class Polarity { N, P };

/// Reference geometry for the transconductance scale k_on. A device with
/// channel_length_nm/oxide_thickness_nm away from these references has its
/// effective k scaled by (L0/L)*(tox0/tox).
inline constexpr double kReferenceChannelNm = 16.0;
inline constexpr double kReferenceOxideNm = 4.0;

/// One transistor instance. k_on/i_off are per tube; the drain current is
/// multiplied by the tube count.
struct CntfetDevice {
  Polarity polarity = Polarity::N;
  Chirality chirality{19, 0};
  int tubes = 1;
  double channel_length_nm = kReferenceChannelNm;
  double oxide_thickness_nm = kReferenceOxideNm;
  double k_on = 40e-6;         // A/V^2 per tube at reference geometry
  double i_off = 1e-12;        // A per tube, off-state floor at 25 C
  double ss_mv_per_dec = 70.0; // subthreshold swing at 25 C

  /// Explicit threshold override in volts (signed: negative for P devices).
  /// When absent the threshold comes from the chirality via Eq.-style math.
  std::optional<double> vth_override;

  /// Signed effective threshold: override when present, otherwise
  /// +/- threshold_voltage(chirality) by polarity.
  double threshold() const;
};

/// Throws std::invalid_argument if the device violates its invariants
/// (tubes >= 1, positive geometry, semiconducting chirality, override sign
/// consistent with polarity).
void validate(const CntfetDevice& dev);

/// Static drain-source current, amps, positive flowing into the drain
/// terminal. v_gs/v_ds are referenced to the source terminal as named.
///
/// Compact model per tube, times the tube count:
///  - square law (triode/saturation) above threshold, scaled by k_on;
///  - subthreshold exponential with slope ss, blended through a logistic so
///    the transition into the square law keeps a continuous derivative;
///  - an i_off leakage floor that vanishes at v_ds = 0;
///  - reverse conduction by drain/source exchange, P devices by sign
///    symmetry (negate v_gs, v_ds and the returned current).
///
/// Temperature enters through documented coefficients:
///  - k_on derates linearly by 0.2%/C above 25 C,
///  - i_off doubles every 12 C above 25 C,
///  - the subthreshold swing scales with absolute temperature.
double drain_current(const CntfetDevice& dev, double v_gs, double v_ds,
                     double temperature_c);

/// Temperature-resolved model coefficients, exposed so the solver can
/// evaluate devices without recomputing them every call.
struct DeviceEval {
  double sign = 1.0;     // +1 for N, -1 for P
  double vth = 0.0;      // magnitude of the effective threshold
  double k = 0.0;        // per-tube k after geometry and temperature scaling
  double i_off = 0.0;    // per-tube leakage floor after temperature scaling
  double ss_v = 0.0;     // V/decade after temperature scaling
  double i_stitch = 0.0; // current at v_gs = Vth (per tube)
  double tubes = 1.0;

  double current(double v_gs, double v_ds) const;
};

DeviceEval make_eval(const CntfetDevice& dev, double temperature_c);

}  // namespace tdram
