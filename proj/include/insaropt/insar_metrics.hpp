#pragma once

// Interferometric quality chain: acquisition SNR (mono-static, bi-static
// approximation, and the exact bi-static image-budget form), decorrelation
// sources, total coherence, height of ambiguity, the CRB phase noise floor,
// per-pair and fused height errors, and the worst-case fused bound used as
// the optimization objective. All values linear scale; dB only at the
// config boundary.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "insaropt/constraint_config.hpp"
#include "insaropt/geometry.hpp"

namespace insaropt {

inline constexpr double kSpeedOfLight = 2.99792458e8;
inline constexpr double kBoltzmann = 1.380649e-23;

// Full constant list of the image SNR budget; every factor linear scale.
// duty_product is tau_p * PRF (dimensionless).
struct RadarLinkBudget {
  double sigma0 = 0.1;
  double tx_power_w = 0.39994;
  double tx_gain = 3.1623;
  double rx_gain = 3.1623;
  double wavelength_m = 0.12;
  double pulse_bandwidth_hz = 3.0e9;
  double duty_product = 1.0e-4;
  double velocity_mps = 4.3;
  double system_temperature_k = 400.0;
  double noise_figure = 3.1623;
  double losses = 3.9811;

  void validate() const {
    const double fields[] = {sigma0, tx_power_w, tx_gain, rx_gain, wavelength_m,
                             pulse_bandwidth_hz, duty_product, velocity_mps,
                             system_temperature_k, noise_figure, losses};
    for (double v : fields)
      if (!(v > 0.0)) throw std::invalid_argument("link budget: all factors must be positive");
  }
};

// Aggregate radar constant of the mono-static SNR law gamma_m / r^3,
// obtained by folding the budget and the resolution-cell size at the master
// look angle into one value with units m^3.
inline double radar_constant_from_budget(const RadarLinkBudget& b, double theta0_rad) {
  b.validate();
  if (!(theta0_rad > 0.0) || !(theta0_rad < M_PI / 2.0))
    throw std::invalid_argument("link budget: look angle must lie in (0, pi/2)");
  const double four_pi = 4.0 * M_PI;
  const double numerator = b.sigma0 * b.tx_power_w * b.tx_gain * b.rx_gain *
                           b.wavelength_m * b.wavelength_m * b.wavelength_m *
                           kSpeedOfLight * b.duty_product;
  const double denominator = 4.0 * four_pi * four_pi * four_pi * b.pulse_bandwidth_hz *
                             b.velocity_mps * std::sin(theta0_rad) * kBoltzmann *
                             b.system_temperature_k * b.noise_figure * b.losses;
  return numerator / denominator;
}

struct RadarConfig {
  double wavelength_m = 0.12;
  double center_frequency_hz = 2.5e9;
  double pulse_bandwidth_hz = 3.0e9;
  double fractional_bandwidth = 1.2;
  double radar_constant_m3 = 4.115824719543107e6;
  int looks = 4;
  double other_coherence = 0.6;
  double beamwidth_rad = 0.5836283757;

  void validate() const {
    if (!(wavelength_m > 0.0)) throw std::invalid_argument("radar: wavelength must be positive");
    if (!(fractional_bandwidth > 0.0))
      throw std::invalid_argument("radar: fractional bandwidth must be positive");
    if (!(radar_constant_m3 > 0.0)) throw std::invalid_argument("radar: radar constant must be positive");
    if (looks < 1) throw std::invalid_argument("radar: looks must be >= 1");
    if (!(other_coherence > 0.0) || !(other_coherence <= 1.0))
      throw std::invalid_argument("radar: other_coherence must lie in (0,1]");
    if (!(beamwidth_rad > 0.0)) throw std::invalid_argument("radar: beamwidth must be positive");
  }

  // Non-fatal cross-checks surfaced in run metadata. The wavelength/carrier
  // pair is allowed to disagree because published parameter sets round them
  // independently; the stored wavelength is the operative value.
  std::vector<std::string> consistency_warnings() const {
    std::vector<std::string> notes;
    if (center_frequency_hz > 0.0) {
      const double derived = kSpeedOfLight / center_frequency_hz;
      if (std::abs(derived - wavelength_m) > 1e-6 * std::max(derived, wavelength_m))
        notes.push_back("wavelength " + std::to_string(wavelength_m) +
                        " m differs from c/f0 = " + std::to_string(derived) + " m");
      if (pulse_bandwidth_hz > 0.0) {
        const double bp = pulse_bandwidth_hz / center_frequency_hz;
        if (std::abs(bp - fractional_bandwidth) > 1e-9 * std::max(1.0, bp))
          notes.push_back("fractional_bandwidth does not equal pulse_bandwidth / center_frequency");
      }
    }
    return notes;
  }
};

inline double monostatic_snr(double r0_m, const RadarConfig& radar) {
  if (!(r0_m > 0.0)) throw std::invalid_argument("snr: range must be positive");
  return radar.radar_constant_m3 / (r0_m * r0_m * r0_m);
}

// Small-bistatic-angle approximation: the receive range replaces one of the
// three mono-static range factors.
inline double bistatic_snr_approx(double r0_m, double rk_m, const RadarConfig& radar) {
  if (!(r0_m > 0.0) || !(rk_m > 0.0)) throw std::invalid_argument("snr: ranges must be positive");
  return radar.radar_constant_m3 / (r0_m * r0_m * rk_m);
}

struct BistaticGeometry {
  double tx_slant_range_m;
  double rx_slant_range_m;
  double tx_incidence_rad;
  double rx_incidence_rad;
  double aperture_length_m;

  void validate() const {
    if (!(tx_slant_range_m > 0.0) || !(rx_slant_range_m > 0.0) || !(aperture_length_m > 0.0))
      throw std::invalid_argument("bistatic: ranges and aperture must be positive");
    if (!(tx_incidence_rad > 0.0) || !(tx_incidence_rad < M_PI / 2.0) ||
        !(rx_incidence_rad > 0.0) || !(rx_incidence_rad < M_PI / 2.0))
      throw std::invalid_argument("bistatic: incidences must lie in (0, pi/2)");
  }
};

// Exact bi-static image SNR from the full budget: resolution cell is ground
// range resolution c/(B(sin tx + sin rx)) times azimuth resolution
// lambda*R_eff*R_rx/(L_a(R_tx+R_rx)) with R_eff the mean range.
inline double bistatic_snr_exact(const BistaticGeometry& g, const RadarLinkBudget& b) {
  g.validate();
  b.validate();
  const double ground_range_res =
      kSpeedOfLight /
      (b.pulse_bandwidth_hz * (std::sin(g.tx_incidence_rad) + std::sin(g.rx_incidence_rad)));
  const double effective_range = 0.5 * (g.tx_slant_range_m + g.rx_slant_range_m);
  const double azimuth_res = b.wavelength_m * effective_range * g.rx_slant_range_m /
                             (g.aperture_length_m * (g.tx_slant_range_m + g.rx_slant_range_m));
  const double cell_area = ground_range_res * azimuth_res;
  const double four_pi = 4.0 * M_PI;
  const double numerator = b.sigma0 * cell_area * b.tx_power_w * b.tx_gain * b.rx_gain *
                           b.wavelength_m * b.wavelength_m * b.duty_product *
                           g.aperture_length_m;
  const double denominator = four_pi * four_pi * four_pi * g.tx_slant_range_m *
                             g.tx_slant_range_m * g.rx_slant_range_m * g.rx_slant_range_m *
                             b.velocity_mps * kBoltzmann * b.system_temperature_k *
                             b.noise_figure * b.losses;
  return numerator / denominator;
}

inline double snr_decorrelation(double snr0, double snrk) {
  if (!(snr0 > 0.0) || !(snrk > 0.0)) throw std::invalid_argument("coherence: SNRs must be positive");
  return 1.0 / std::sqrt((1.0 + 1.0 / snr0) * (1.0 + 1.0 / snrk));
}

// Relative spectral shift between the two acquisitions of a pair; always in
// [1, 2) because the larger look angle goes on top.
inline double spectral_shift_ratio(double theta0_rad, double thetak_rad) {
  const double s0 = std::sin(theta0_rad);
  const double sk = std::sin(thetak_rad);
  if (!(s0 > 0.0) || !(sk > 0.0))
    throw std::domain_error("coherence: look angles must have positive sine");
  return 2.0 * std::max(s0, sk) / (s0 + sk);
}

// Common-band coherence after range filtering as a function of the spectral
// shift ratio. No clamping: out-of-domain input means broken geometry
// upstream and must surface.
inline double range_spectral_coherence(double shift_ratio, double fractional_bandwidth) {
  if (!(shift_ratio > 0.0) || !(shift_ratio < 2.0))
    throw std::domain_error("coherence: spectral shift ratio outside (0,2)");
  if (!(fractional_bandwidth > 0.0) || !(fractional_bandwidth < 2.0))
    throw std::domain_error("coherence: fractional bandwidth outside (0,2)");
  const double bp = fractional_bandwidth;
  return ((2.0 + bp) / (1.0 + shift_ratio) - (2.0 - bp) / (1.0 + 1.0 / shift_ratio)) / bp;
}

inline double baseline_decorrelation(const Position& qk, double target_x_m, double theta0_rad,
                                     const RadarConfig& radar) {
  const double thetak = look_angle(qk, target_x_m);
  return range_spectral_coherence(spectral_shift_ratio(theta0_rad, thetak),
                                  radar.fractional_bandwidth);
}

// Inverse of range_spectral_coherence: the spectral shift ratio that yields
// the requested coherence. Closed form; domain-checked against (0,2).
inline double inverse_baseline_decorrelation(double gamma, const RadarConfig& radar) {
  const double bp = radar.fractional_bandwidth;
  if (!(bp > 0.0) || !(bp < 2.0))
    throw std::domain_error("coherence: fractional bandwidth outside (0,2)");
  const double x = (bp * gamma - 2.0 - bp) / (bp - 2.0 - gamma * bp);
  if (!(x > 0.0) || !(x < 2.0))
    throw std::domain_error("coherence: requested value outside the attainable range");
  return x;
}

struct CoherenceBreakdown {
  double snr_decorrelation;
  double baseline_decorrelation;
  double other;
  double total;
};

inline CoherenceBreakdown total_coherence(double r0_m, double rk_m, double theta0_rad,
                                          double thetak_rad, const RadarConfig& radar) {
  CoherenceBreakdown c{};
  c.snr_decorrelation = snr_decorrelation(monostatic_snr(r0_m, radar),
                                          bistatic_snr_approx(r0_m, rk_m, radar));
  c.baseline_decorrelation = range_spectral_coherence(
      spectral_shift_ratio(theta0_rad, thetak_rad), radar.fractional_bandwidth);
  c.other = radar.other_coherence;
  c.total = c.snr_decorrelation * c.baseline_decorrelation * c.other;
  return c;
}

inline double height_of_ambiguity(double r0_m, double theta0_rad, double b_perp_m,
                                  const RadarConfig& radar) {
  if (!(b_perp_m > 0.0))
    throw std::domain_error("height of ambiguity: perpendicular baseline must be positive");
  return radar.wavelength_m * r0_m * std::sin(theta0_rad) / b_perp_m;
}

inline double crb_phase_std(double coherence, int looks) {
  if (looks < 1) throw std::invalid_argument("phase std: looks must be >= 1");
  if (coherence == 1.0) return 0.0;
  if (!(coherence > 0.0) || !(coherence < 1.0))
    throw std::domain_error("phase std: coherence must lie in (0,1]");
  return std::sqrt((1.0 - coherence * coherence) / (2.0 * looks)) / coherence;
}

inline double pair_height_error(double hoa_m, double phase_std_rad) {
  if (!(hoa_m > 0.0) || !(phase_std_rad >= 0.0))
    throw std::invalid_argument("height error: hoa must be positive, phase std nonnegative");
  return hoa_m * phase_std_rad / (2.0 * M_PI);
}

// Inverse-variance weighted fusion of two independent DEM estimates.
inline double fused_height_error(double sigma1_m, double sigma2_m) {
  if (!(sigma1_m > 0.0) || !(sigma2_m > 0.0))
    throw std::invalid_argument("fusion: per-pair errors must be positive");
  return 1.0 / std::sqrt(1.0 / (sigma1_m * sigma1_m) + 1.0 / (sigma2_m * sigma2_m));
}

// Product of the coherence floors: the lowest total coherence any feasible
// pair can have.
inline double worst_case_coherence(const RadarConfig& radar, const ConstraintConfig& limits) {
  return limits.gamma_rg_min * limits.gamma_snr_min * radar.other_coherence;
}

// Upper bound on the fused height error when every coherence sits at its
// floor; the optimization objective.
inline double worst_case_height_error(double r0_m, double theta0_rad, double b_perp1_m,
                                      double b_perp2_m, const RadarConfig& radar,
                                      const ConstraintConfig& limits) {
  const double bsq = b_perp1_m * b_perp1_m + b_perp2_m * b_perp2_m;
  if (!(bsq > 0.0))
    throw std::invalid_argument("worst-case bound: at least one baseline must be nonzero");
  const double a = worst_case_coherence(radar, limits);
  if (!(a > 0.0) || !(a < 1.0))
    throw std::invalid_argument("worst-case bound: coherence floor product must lie in (0,1)");
  const double lam_r_sin = radar.wavelength_m * r0_m * std::sin(theta0_rad);
  return std::sqrt(lam_r_sin * lam_r_sin * (1.0 - a * a) /
                   (8.0 * M_PI * M_PI * a * a * radar.looks * bsq));
}

// Actual (not worst-case) height error of the pair (master, qk) from the
// model chain: total coherence -> CRB phase std -> HoA scaling.
inline double pair_height_error_at(const Position& q0, const Position& qk, double target_x_m,
                                   double theta0_rad, const RadarConfig& radar) {
  const double r0 = slant_range(q0, target_x_m);
  const double rk = slant_range(qk, target_x_m);
  const double thetak = look_angle(qk, target_x_m);
  const double bperp = perpendicular_baseline(qk, target_x_m, theta0_rad);
  const CoherenceBreakdown c = total_coherence(r0, rk, theta0_rad, thetak, radar);
  const double hoa = height_of_ambiguity(r0, theta0_rad, bperp, radar);
  return pair_height_error(hoa, crb_phase_std(c.total, radar.looks));
}

inline double fused_height_error_at(const SwarmFormation& swarm, double target_x_m,
                                    double theta0_rad, const RadarConfig& radar) {
  return fused_height_error(
      pair_height_error_at(swarm.master, swarm.slave1, target_x_m, theta0_rad, radar),
      pair_height_error_at(swarm.master, swarm.slave2, target_x_m, theta0_rad, radar));
}

}  // namespace insaropt
