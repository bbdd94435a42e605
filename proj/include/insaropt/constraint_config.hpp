#pragma once

// Scalar limits of the formation feasible set: altitude box, look-angle
// window, collision separation, swath floor, coherence floors, and the
// height-of-ambiguity floor. Communication limits (power cap, rate floors,
// energy budget) live in CommConfig.

#include <cmath>
#include <stdexcept>

namespace insaropt {

struct ConstraintConfig {
  double z_min_m = 1.0;
  double z_max_m = 100.0;
  double theta_min_rad = 0.65;
  double theta_max_rad = 0.85;
  double d_min_m = 1.5;
  double s_min_m = 55.0;
  double gamma_snr_min = 0.8;
  double gamma_rg_min = 0.8;
  double h_amb_min_m = 1.2;

  void validate() const {
    if (!(z_min_m > 0.0) || !(z_max_m >= z_min_m))
      throw std::invalid_argument("limits: altitude box must satisfy 0 < z_min <= z_max");
    if (!(theta_min_rad > 0.0) || !(theta_max_rad < M_PI / 2.0) || !(theta_max_rad >= theta_min_rad))
      throw std::invalid_argument("limits: look-angle window must satisfy 0 < theta_min <= theta_max < pi/2");
    if (!(d_min_m > 0.0)) throw std::invalid_argument("limits: d_min must be positive");
    if (!(s_min_m >= 0.0)) throw std::invalid_argument("limits: s_min must be nonnegative");
    if (!(gamma_snr_min > 0.0) || !(gamma_snr_min < 1.0))
      throw std::invalid_argument("limits: gamma_snr_min must lie in (0,1)");
    if (!(gamma_rg_min > 0.0) || !(gamma_rg_min < 1.0))
      throw std::invalid_argument("limits: gamma_rg_min must lie in (0,1)");
    if (!(h_amb_min_m > 0.0)) throw std::invalid_argument("limits: h_amb_min must be positive");
  }
};

}  // namespace insaropt
