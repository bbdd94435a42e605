#pragma once

// Across-track mission geometry for a three-UAV interferometric swarm: slant
// ranges, look angles, swath widths, and baselines. All UAVs share one
// along-track trajectory; positions are (x, z) pairs in the across-track
// plane. Angles are radians internally, meters everywhere.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace insaropt {

struct MissionConfig {
  int n_slots = 1;
  double slot_duration_s = 1.0;
  double velocity_mps = 1.0;
  double target_x_m = 0.0;
  double master_look_angle_rad = 0.0;

  void validate() const {
    if (n_slots < 1) throw std::invalid_argument("mission: n_slots must be >= 1");
    if (!(slot_duration_s > 0.0)) throw std::invalid_argument("mission: slot_duration must be positive");
    if (!(velocity_mps > 0.0)) throw std::invalid_argument("mission: velocity must be positive");
    if (!(master_look_angle_rad > 0.0) || !(master_look_angle_rad < M_PI / 2.0))
      throw std::invalid_argument("mission: master look angle must lie in (0, pi/2)");
  }
};

// Altitude must be positive from the moment a position exists; every formula
// below divides by z or assumes the platform is airborne.
struct Position {
  double x_m;
  double z_m;

  Position(double x, double z) : x_m(x), z_m(z) {
    if (!(z > 0.0)) throw std::invalid_argument("position: altitude must be positive");
  }
};

inline bool same_position(const Position& a, const Position& b) {
  return a.x_m == b.x_m && a.z_m == b.z_m;
}

struct SwarmFormation {
  Position master;
  Position slave1;
  Position slave2;

  void validate() const {
    if (same_position(master, slave1) || same_position(master, slave2) ||
        same_position(slave1, slave2))
      throw std::invalid_argument("formation: UAV positions must be pairwise distinct");
  }
};

// Slot-start y coordinates; the whole swarm flies the same along-track law
// y[n+1] = y[n] + v*dt starting at zero.
inline std::vector<double> along_track_positions(const MissionConfig& mission) {
  mission.validate();
  std::vector<double> y(static_cast<size_t>(mission.n_slots));
  for (size_t n = 0; n < y.size(); ++n)
    y[n] = static_cast<double>(n) * mission.velocity_mps * mission.slot_duration_s;
  return y;
}

inline double slant_range(const Position& q, double target_x_m) {
  return std::hypot(q.x_m - target_x_m, q.z_m);
}

// Angle between nadir and the line of sight to the target; positive when the
// UAV sits on the negative-x side of the target.
inline double look_angle(const Position& q, double target_x_m) {
  return std::atan((target_x_m - q.x_m) / q.z_m);
}

inline double swath_width(const Position& q, double target_x_m, double beamwidth_rad) {
  if (!(beamwidth_rad > 0.0)) throw std::invalid_argument("swath: beamwidth must be positive");
  return beamwidth_rad * slant_range(q, target_x_m) / std::cos(look_angle(q, target_x_m));
}

inline double baseline(const Position& a, const Position& b) {
  return std::hypot(a.x_m - b.x_m, a.z_m - b.z_m);
}

// Signed offset of q from the master line of sight, measured along x at
// fixed z. Negative on the steep-look side (look angle below theta0),
// positive on the shallow side. The perpendicular baseline is its absolute
// value scaled by cos(theta0), independent of where the master sits on the
// line of sight.
inline double los_offset(const Position& q, double target_x_m, double theta0_rad) {
  return (target_x_m - q.x_m) - std::tan(theta0_rad) * q.z_m;
}

inline double perpendicular_baseline(const Position& qk, double target_x_m, double theta0_rad) {
  return std::abs(los_offset(qk, target_x_m, theta0_rad)) * std::cos(theta0_rad);
}

// Same quantity computed from the physical baseline vector and its tilt
// angle relative to horizontal. Kept as an independent route for
// cross-checking; requires the master to sit on its line-of-sight locus.
inline double perpendicular_baseline_from_tilt(const Position& q0, const Position& qk,
                                               double theta0_rad) {
  const double b = baseline(q0, qk);
  if (b == 0.0) return 0.0;
  const double tilt = std::atan2(qk.z_m - q0.z_m, qk.x_m - q0.x_m);
  return std::abs(b * std::cos(theta0_rad - tilt));
}

// x coordinate of the master line-of-sight locus at altitude z.
inline double los_locus_x(double z_m, double target_x_m, double theta0_rad) {
  return target_x_m - z_m * std::tan(theta0_rad);
}

}  // namespace insaropt
