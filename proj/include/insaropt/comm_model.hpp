#pragma once

// Air-to-ground FDMA link: per-slot UAV-to-ground-station distances,
// free-space throughput, minimal power for a rate floor, and the checks for
// the power cap, per-slot rate floor, and energy budget.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "insaropt/geometry.hpp"

namespace insaropt {

inline constexpr int kUavCount = 3;

struct CommConfig {
  std::array<double, 3> gs_position_m = {70.0, 149.37, 25.0};
  std::array<double, kUavCount> bandwidth_hz = {1.0e9, 1.0e9, 1.0e9};
  std::array<double, kUavCount> ref_gain_over_noise = {73.9605, 73.9605, 73.9605};
  std::array<double, kUavCount> rate_floor_bps = {10.0e6, 16.95e6, 1.0e6};
  double max_power_w = 10.2329;
  double max_energy_j = 594.0;
  // The energy budget as stated sums per-slot powers; the switch multiplies
  // by the slot duration instead (identical when slots last one second).
  bool energy_includes_slot_duration = false;

  void validate() const {
    for (int k = 0; k < kUavCount; ++k) {
      if (!(bandwidth_hz[k] > 0.0)) throw std::invalid_argument("comm: bandwidth must be positive");
      if (!(ref_gain_over_noise[k] > 0.0))
        throw std::invalid_argument("comm: reference gain over noise must be positive");
      if (!(rate_floor_bps[k] >= 0.0) || !std::isfinite(rate_floor_bps[k]))
        throw std::invalid_argument("comm: rate floors must be finite and nonnegative");
    }
    if (!(max_power_w > 0.0)) throw std::invalid_argument("comm: power cap must be positive");
    if (!(max_energy_j > 0.0)) throw std::invalid_argument("comm: energy budget must be positive");
  }
};

struct PowerSchedule {
  std::array<std::vector<double>, kUavCount> power_w;

  static PowerSchedule uniform(int n_slots, double level_w) {
    PowerSchedule s;
    for (auto& p : s.power_w) p.assign(static_cast<size_t>(n_slots), level_w);
    return s;
  }
};

inline double slot_distance(const Position& q, double y_n, const std::array<double, 3>& gs) {
  const double dx = q.x_m - gs[0];
  const double dy = y_n - gs[1];
  const double dz = q.z_m - gs[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline double throughput(double power_w, double distance_m, const CommConfig& comm, int uav) {
  if (!(power_w >= 0.0)) throw std::invalid_argument("throughput: power must be nonnegative");
  if (!(distance_m > 0.0)) throw std::invalid_argument("throughput: distance must be positive");
  const double snr = power_w * comm.ref_gain_over_noise[uav] / (distance_m * distance_m);
  return comm.bandwidth_hz[uav] * std::log2(1.0 + snr);
}

inline double min_power_for_rate(double rate_bps, double distance_m, const CommConfig& comm,
                                 int uav) {
  if (!(rate_bps >= 0.0)) throw std::invalid_argument("min power: rate must be nonnegative");
  if (!(distance_m > 0.0)) throw std::invalid_argument("min power: distance must be positive");
  const double snr_needed = std::exp2(rate_bps / comm.bandwidth_hz[uav]) - 1.0;
  return snr_needed * distance_m * distance_m / comm.ref_gain_over_noise[uav];
}

struct PowerFeasibilityReport {
  bool power_cap_ok = true;
  bool rate_floor_ok = true;
  bool energy_ok = true;
  // Tightest margins over all UAVs and slots; negative means violated.
  double power_margin_w = 0.0;
  double rate_margin_bps = 0.0;
  double energy_margin_j = 0.0;
  int worst_power_uav = -1, worst_power_slot = -1;
  int worst_rate_uav = -1, worst_rate_slot = -1;
  int worst_energy_uav = -1;
  std::array<double, kUavCount> energy_j = {0.0, 0.0, 0.0};

  bool all_ok() const { return power_cap_ok && rate_floor_ok && energy_ok; }
};

inline PowerFeasibilityReport check_power_constraints(const PowerSchedule& schedule,
                                                      const SwarmFormation& swarm,
                                                      const MissionConfig& mission,
                                                      const CommConfig& comm) {
  comm.validate();
  const std::vector<double> y = along_track_positions(mission);
  const Position* uavs[kUavCount] = {&swarm.master, &swarm.slave1, &swarm.slave2};

  PowerFeasibilityReport report;
  report.power_margin_w = std::numeric_limits<double>::infinity();
  report.rate_margin_bps = std::numeric_limits<double>::infinity();
  report.energy_margin_j = std::numeric_limits<double>::infinity();

  const double slot_weight = comm.energy_includes_slot_duration ? mission.slot_duration_s : 1.0;
  for (int k = 0; k < kUavCount; ++k) {
    const auto& p = schedule.power_w[k];
    if (p.size() != y.size())
      throw std::invalid_argument("power check: schedule length must match slot count");
    double energy = 0.0;
    for (size_t n = 0; n < y.size(); ++n) {
      energy += p[n] * slot_weight;
      const double power_margin = comm.max_power_w - p[n];
      if (power_margin < report.power_margin_w) {
        report.power_margin_w = power_margin;
        report.worst_power_uav = k;
        report.worst_power_slot = static_cast<int>(n);
      }
      const double d = slot_distance(*uavs[k], y[n], comm.gs_position_m);
      const double rate_margin = throughput(std::max(p[n], 0.0), d, comm, k) - comm.rate_floor_bps[k];
      if (rate_margin < report.rate_margin_bps) {
        report.rate_margin_bps = rate_margin;
        report.worst_rate_uav = k;
        report.worst_rate_slot = static_cast<int>(n);
      }
      if (p[n] < 0.0) {
        report.power_cap_ok = false;
        report.power_margin_w = std::min(report.power_margin_w, p[n]);
        report.worst_power_uav = k;
        report.worst_power_slot = static_cast<int>(n);
      }
    }
    report.energy_j[k] = energy;
    const double energy_margin = comm.max_energy_j - energy;
    if (energy_margin < report.energy_margin_j) {
      report.energy_margin_j = energy_margin;
      report.worst_energy_uav = k;
    }
  }
  if (report.power_margin_w < 0.0) report.power_cap_ok = false;
  if (report.rate_margin_bps < 0.0) report.rate_floor_ok = false;
  if (report.energy_margin_j < 0.0) report.energy_ok = false;
  return report;
}

// Cheapest feasible schedule at a fixed formation: per-slot minimal power
// for each UAV's rate floor. Any feasible schedule dominates it entrywise.
inline PowerSchedule minimal_power_schedule(const SwarmFormation& swarm,
                                            const MissionConfig& mission,
                                            const CommConfig& comm) {
  const std::vector<double> y = along_track_positions(mission);
  const Position* uavs[kUavCount] = {&swarm.master, &swarm.slave1, &swarm.slave2};
  PowerSchedule s;
  for (int k = 0; k < kUavCount; ++k) {
    s.power_w[k].resize(y.size());
    for (size_t n = 0; n < y.size(); ++n)
      s.power_w[k][n] = min_power_for_rate(comm.rate_floor_bps[k],
                                           slot_distance(*uavs[k], y[n], comm.gs_position_m),
                                           comm, k);
  }
  return s;
}

}  // namespace insaropt
