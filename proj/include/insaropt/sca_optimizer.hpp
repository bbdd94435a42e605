#pragma once

// Joint formation and communication-power optimizer. The nonconvex problem
// (minimize the worst-case fused height error subject to geometry, coherence,
// and communication constraints) is attacked by alternating optimization over
// three blocks (master position+powers, each slave position+powers). Every
// block subproblem is convexified with inner approximations (tangent
// minorants of squared distances, angle windows in linear half-plane form,
// coherence floors as bisected range caps), so accepted iterates stay
// feasible for the original constraints. Slave subproblems split into two
// branches by which side of the master line of sight the slave occupies;
// both are solved and the better one kept.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "insaropt/comm_model.hpp"
#include "insaropt/constraint_config.hpp"
#include "insaropt/convex_core.hpp"
#include "insaropt/geometry.hpp"
#include "insaropt/insar_metrics.hpp"

namespace insaropt {

struct Scenario {
  MissionConfig mission;
  RadarConfig radar;
  CommConfig comm;
  ConstraintConfig limits;

  void validate() const {
    mission.validate();
    radar.validate();
    comm.validate();
    limits.validate();
  }
};

// Which blocks are optimized; covers the benchmark variants as restrictions
// of the full problem.
struct OptimizationMode {
  bool optimize_master = true;
  int slave_count = 2;
  bool static_powers = false;
  double static_power_w = 0.0;
  std::optional<Position> fixed_master;
};

// Positions (master first) and per-UAV power schedules of every active UAV.
struct SwarmState {
  std::vector<Position> uavs;
  std::vector<std::vector<double>> powers_w;
};

enum class LookBranch { steep, shallow };

inline const char* to_string(LookBranch b) {
  return b == LookBranch::steep ? "steep" : "shallow";
}

// Smallest admissible look angle on the steep side of the master line of
// sight such that the spectral coherence floor holds.
inline double steep_angle_floor(double theta0_rad, double gamma_rg_min,
                                const RadarConfig& radar) {
  const double shift_cap = inverse_baseline_decorrelation(gamma_rg_min, radar);
  const double s = (2.0 - shift_cap) / shift_cap * std::sin(theta0_rad);
  return std::asin(s);
}

// Largest admissible look angle on the shallow side; empty when the floor
// cannot bind there (any window angle keeps enough common band).
inline std::optional<double> shallow_angle_cap(double theta0_rad, double gamma_rg_min,
                                               const RadarConfig& radar) {
  const double shift_cap = inverse_baseline_decorrelation(gamma_rg_min, radar);
  const double s = shift_cap / (2.0 - shift_cap) * std::sin(theta0_rad);
  if (s >= 1.0) return std::nullopt;
  return std::asin(s);
}

// Largest partner range keeping the SNR coherence of the pair above the
// floor, at fixed master range. Monotone bisection to 1e-9 m.
inline double c6_max_slave_range(double r0_m, const RadarConfig& radar, double gamma_snr_min,
                                 double tol_m = 1e-9) {
  auto ok = [&](double rk) {
    return snr_decorrelation(monostatic_snr(r0_m, radar), bistatic_snr_approx(r0_m, rk, radar)) >=
           gamma_snr_min;
  };
  double lo = 1e-6, hi = 1e7;
  if (!ok(lo)) return 0.0;
  if (ok(hi)) return hi;
  while (hi - lo > tol_m) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

// Largest master range keeping the pair's SNR coherence above the floor, at
// fixed partner range.
inline double c6_max_master_range(double rk_m, const RadarConfig& radar, double gamma_snr_min,
                                  double tol_m = 1e-9) {
  auto ok = [&](double r0) {
    return snr_decorrelation(monostatic_snr(r0, radar), bistatic_snr_approx(r0, rk_m, radar)) >=
           gamma_snr_min;
  };
  double lo = 1e-6, hi = 1e7;
  if (!ok(lo)) return 0.0;
  if (ok(hi)) return hi;
  while (hi - lo > tol_m) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

struct AuditEntry {
  std::string name;
  double slack;  // nonnegative means satisfied; natural units per constraint
};

struct ConstraintAudit {
  std::vector<AuditEntry> entries;
  double min_slack = std::numeric_limits<double>::infinity();
  std::string argmin;

  void push(std::string name, double slack) {
    if (slack < min_slack) {
      min_slack = slack;
      argmin = name;
    }
    entries.push_back({std::move(name), slack});
  }
  bool feasible(double tol = 1e-8) const { return min_slack >= -tol; }
  std::string violated_names(double tol = 1e-8) const {
    std::string out;
    for (const auto& e : entries)
      if (e.slack < -tol) out += (out.empty() ? "" : ", ") + e.name;
    return out;
  }
};

// Exact audit of the original (nonconvex) constraint set at a state. Rate
// floors are expressed in power units so every slack is O(1)-scaled.
inline ConstraintAudit audit_constraints(const Scenario& sc, const SwarmState& state) {
  const double theta0 = sc.mission.master_look_angle_rad;
  const double xt = sc.mission.target_x_m;
  const size_t n_uav = state.uavs.size();
  if (n_uav < 2 || n_uav > 3 || state.powers_w.size() != n_uav)
    throw std::invalid_argument("audit: state must hold a master and one or two slaves");
  ConstraintAudit audit;

  const Position& master = state.uavs[0];
  audit.push("los_locus[u0]", -std::abs(master.x_m - los_locus_x(master.z_m, xt, theta0)));

  const std::vector<double> y = along_track_positions(sc.mission);
  for (size_t k = 0; k < n_uav; ++k) {
    const Position& q = state.uavs[k];
    const std::string tag = "[u" + std::to_string(k) + "]";
    audit.push("altitude_min" + tag, q.z_m - sc.limits.z_min_m);
    audit.push("altitude_max" + tag, sc.limits.z_max_m - q.z_m);
    const double theta = look_angle(q, xt);
    audit.push("look_min" + tag, theta - sc.limits.theta_min_rad);
    audit.push("look_max" + tag, sc.limits.theta_max_rad - theta);
    audit.push("swath_min" + tag, swath_width(q, xt, sc.radar.beamwidth_rad) - sc.limits.s_min_m);

    const auto& p = state.powers_w[k];
    if (p.size() != y.size()) throw std::invalid_argument("audit: power schedule length mismatch");
    double worst_cap = std::numeric_limits<double>::infinity();
    double worst_nonneg = std::numeric_limits<double>::infinity();
    double worst_rate = std::numeric_limits<double>::infinity();
    double energy = 0.0;
    const double w = sc.comm.energy_includes_slot_duration ? sc.mission.slot_duration_s : 1.0;
    for (size_t n = 0; n < y.size(); ++n) {
      worst_cap = std::min(worst_cap, sc.comm.max_power_w - p[n]);
      worst_nonneg = std::min(worst_nonneg, p[n]);
      const double d = slot_distance(q, y[n], sc.comm.gs_position_m);
      worst_rate = std::min(
          worst_rate, p[n] - min_power_for_rate(sc.comm.rate_floor_bps[k], d, sc.comm,
                                                static_cast<int>(k)));
      energy += p[n] * w;
    }
    audit.push("power_cap" + tag, worst_cap);
    audit.push("power_nonneg" + tag, worst_nonneg);
    audit.push("rate_floor" + tag, worst_rate);
    audit.push("energy_budget" + tag, sc.comm.max_energy_j - energy);
  }

  for (size_t i = 0; i < n_uav; ++i)
    for (size_t j = i + 1; j < n_uav; ++j)
      audit.push("separation[u" + std::to_string(i) + ",u" + std::to_string(j) + "]",
                 baseline(state.uavs[i], state.uavs[j]) - sc.limits.d_min_m);

  const double r0 = slant_range(master, xt);
  for (size_t k = 1; k < n_uav; ++k) {
    const Position& q = state.uavs[k];
    const std::string tag = "[u0,u" + std::to_string(k) + "]";
    const double rk = slant_range(q, xt);
    audit.push("snr_floor" + tag,
               snr_decorrelation(monostatic_snr(r0, sc.radar),
                                 bistatic_snr_approx(r0, rk, sc.radar)) -
                   sc.limits.gamma_snr_min);
    audit.push("spectral_floor" + tag,
               baseline_decorrelation(q, xt, theta0, sc.radar) - sc.limits.gamma_rg_min);
    // Ambiguity-height floor in baseline units: b_perp may not exceed
    // lambda*r0*sin(theta0)/h_amb_min.
    const double b_cap = sc.radar.wavelength_m * r0 * std::sin(theta0) / sc.limits.h_amb_min_m;
    audit.push("ambiguity_floor" + tag, b_cap - perpendicular_baseline(q, xt, theta0));
  }
  return audit;
}

// Worst-case fused height error of a state (the optimization objective).
inline double state_bound(const Scenario& sc, const SwarmState& state) {
  const double xt = sc.mission.target_x_m;
  const double theta0 = sc.mission.master_look_angle_rad;
  const double r0 = slant_range(state.uavs[0], xt);
  const double b1 = perpendicular_baseline(state.uavs[1], xt, theta0);
  const double b2 = state.uavs.size() > 2 ? perpendicular_baseline(state.uavs[2], xt, theta0) : 0.0;
  return worst_case_height_error(r0, theta0, b1, b2, sc.radar, sc.limits);
}

// Model height error of a state: fused over the active pairs.
inline double state_sigma(const Scenario& sc, const SwarmState& state) {
  const double xt = sc.mission.target_x_m;
  const double theta0 = sc.mission.master_look_angle_rad;
  const double s1 = pair_height_error_at(state.uavs[0], state.uavs[1], xt, theta0, sc.radar);
  if (state.uavs.size() < 3) return s1;
  const double s2 = pair_height_error_at(state.uavs[0], state.uavs[2], xt, theta0, sc.radar);
  return fused_height_error(s1, s2);
}

struct ScaTraceEntry {
  std::string phase;
  int iteration = 0;
  double bound_m = std::numeric_limits<double>::quiet_NaN();
  double sigma_h_m = std::numeric_limits<double>::quiet_NaN();
  std::string branch;
  std::string solver_status;
  double max_constraint_violation = 0.0;
};

struct AoOptions {
  int max_iterations = 30;
  double epsilon_m = 1e-2;        // stop when a full pass improves the bound less
  bool sequential_updates = false;  // default: parallel block pass with audit fallback
  bool allow_infeasible_start = false;
  double power_headroom = 1.1;
  SolverTolerances solver;
};

struct AoResult {
  bool feasible = false;
  std::string infeasibility_reason;
  SwarmState state;
  double bound_m = std::numeric_limits<double>::quiet_NaN();
  double sigma_h_m = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool converged = false;
  std::vector<ScaTraceEntry> trace;
  ConstraintAudit final_audit;
};

namespace detail {

inline double rate_snr_factor(const CommConfig& comm, int uav) {
  return std::exp2(comm.rate_floor_bps[uav] / comm.bandwidth_hz[uav]) - 1.0;
}

// Squared cross-track distance from (x, z) to the ground-station, plus the
// per-slot along-track offsets squared.
inline std::vector<double> slot_offsets_sq(const Scenario& sc) {
  const std::vector<double> y = along_track_positions(sc.mission);
  std::vector<double> dy2(y.size());
  for (size_t n = 0; n < y.size(); ++n) {
    const double dy = y[n] - sc.comm.gs_position_m[1];
    dy2[n] = dy * dy;
  }
  return dy2;
}

// Tangent minorant of ||q - p||^2 at q_hat, as a linear row over (coeff on
// q) with the constraint ||q - p||^2 >= rhs:
//   2(q_hat - p).q >= rhs + ||q_hat||^2 - ||p||^2
// Fills a row "-2(q_hat-p).q <= -(rhs + ||q_hat||^2 - ||p||^2)" in the two
// given variable slots. Degenerate expansion points are nudged so the
// gradient never vanishes.
struct TangentRow {
  double ax, az, b;
};

inline TangentRow separation_tangent(Position q_hat, const double px, const double pz,
                                     double rhs_sq) {
  double gx = q_hat.x_m - px, gz = q_hat.z_m - pz;
  if (gx * gx + gz * gz < 1e-18) gz = 1e-6;
  const double qhat_sq = q_hat.x_m * q_hat.x_m + q_hat.z_m * q_hat.z_m;
  const double p_sq = px * px + pz * pz;
  return {-2.0 * gx, -2.0 * gz, -(rhs_sq + qhat_sq - p_sq)};
}

struct BlockSolution {
  bool accepted = false;
  Position position{0.0, 1.0};
  std::vector<double> powers_w;
  SolveStatus status = SolveStatus::max_iterations;
  LookBranch branch = LookBranch::steep;
};

// Master subproblem: variables (z0, powers). The master x is eliminated by
// the line-of-sight locus, making the slant range proportional to z0; the
// objective is then simply to descend in altitude.
inline BlockSolution solve_master_block(const Scenario& sc, const OptimizationMode& mode,
                                        const SwarmState& anchor, const SwarmState& warm_state,
                                        const AoOptions& opts) {
  const double theta0 = sc.mission.master_look_angle_rad;
  const double xt = sc.mission.target_x_m;
  const double t0 = std::tan(theta0);
  const double cos0 = std::cos(theta0);
  const int n_slots = sc.mission.n_slots;
  const bool with_powers = !mode.static_powers;
  const int nvars = 1 + (with_powers ? n_slots : 0);

  ConvexProgram prog(nvars);
  prog.objective[0] = 1.0;
  prog.set_bounds(0, sc.limits.z_min_m, sc.limits.z_max_m);

  // Swath floor is exact and linear in z0 on the locus.
  const double swath_floor_z = sc.limits.s_min_m * cos0 * cos0 / sc.radar.beamwidth_rad;
  {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(nvars);
    a[0] = -1.0;
    prog.add_linear(std::move(a), -swath_floor_z, "swath_min");
  }
  // Ambiguity-height floor per pair: r0 must carry the current baseline.
  double c6_cap_r0 = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= mode.slave_count; ++k) {
    const Position& qs = anchor.uavs[static_cast<size_t>(k)];
    const double b_perp = perpendicular_baseline(qs, xt, theta0);
    const double r0_floor =
        sc.limits.h_amb_min_m * b_perp / (sc.radar.wavelength_m * std::sin(theta0));
    Eigen::VectorXd a = Eigen::VectorXd::Zero(nvars);
    a[0] = -1.0;
    prog.add_linear(std::move(a), -r0_floor * cos0, "ambiguity_floor_u" + std::to_string(k));
    c6_cap_r0 = std::min(
        c6_cap_r0, c6_max_master_range(slant_range(qs, xt), sc.radar, sc.limits.gamma_snr_min));
  }
  if (std::isfinite(c6_cap_r0)) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(nvars);
    a[0] = 1.0;
    prog.add_linear(std::move(a), c6_cap_r0 * cos0, "snr_floor_cap");
  }
  // Separation vs each slave, as tangent rows in the eliminated coordinates:
  // q0(z0) = (xt - t0 z0, z0).
  const Position q0_hat = anchor.uavs[0];
  for (int k = 1; k <= mode.slave_count; ++k) {
    const Position& qs = anchor.uavs[static_cast<size_t>(k)];
    const TangentRow row =
        separation_tangent(q0_hat, qs.x_m, qs.z_m, sc.limits.d_min_m * sc.limits.d_min_m);
    // Substitute x0 = xt - t0 z0: coefficient on z0 and constant shift.
    Eigen::VectorXd a = Eigen::VectorXd::Zero(nvars);
    a[0] = row.ax * (-t0) + row.az;
    prog.add_linear(std::move(a), row.b - row.ax * xt, "separation_u" + std::to_string(k));
  }

  // Rate floors: quadratic in z0 after the substitution, linear in power.
  const std::vector<double> dy2 = slot_offsets_sq(sc);
  const double kappa = rate_snr_factor(sc.comm, 0);
  const double beta = sc.comm.ref_gain_over_noise[0];
  const double ax = xt - sc.comm.gs_position_m[0];
  const double gz = sc.comm.gs_position_m[2];
  const double quad_coef = kappa * (t0 * t0 + 1.0);
  const double lin_coef = -2.0 * kappa * (ax * t0 + gz);
  const double const_xz = kappa * (ax * ax + gz * gz);
  if (with_powers) {
    for (int n = 0; n < n_slots; ++n) {
      Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(nvars, nvars);
      Q(0, 0) = quad_coef;
      Eigen::VectorXd q = Eigen::VectorXd::Zero(nvars);
      q[0] = lin_coef;
      q[1 + n] = -beta;
      prog.add_quadratic(std::move(Q), std::move(q), -(const_xz + kappa * dy2[n]),
                         "rate_floor_n" + std::to_string(n));
      prog.set_bounds(1 + n, 0.0, sc.comm.max_power_w);
    }
    const double w = sc.comm.energy_includes_slot_duration ? sc.mission.slot_duration_s : 1.0;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(nvars);
    a.tail(n_slots).setConstant(w);
    prog.add_linear(std::move(a), sc.comm.max_energy_j, "energy_budget");
  } else {
    // Static power: one position constraint at the worst slot.
    const double dy2_max = *std::max_element(dy2.begin(), dy2.end());
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(nvars, nvars);
    Q(0, 0) = quad_coef;
    Eigen::VectorXd q = Eigen::VectorXd::Zero(nvars);
    q[0] = lin_coef;
    prog.add_quadratic(std::move(Q), std::move(q),
                       beta * mode.static_power_w - (const_xz + kappa * dy2_max),
                       "rate_floor_static");
  }

  Eigen::VectorXd warm(nvars);
  warm[0] = warm_state.uavs[0].z_m;
  if (with_powers)
    for (int n = 0; n < n_slots; ++n) warm[1 + n] = warm_state.powers_w[0][static_cast<size_t>(n)];

  const SolveResult res = solve(prog, opts.solver, &warm);
  BlockSolution out;
  out.status = res.status;
  if (res.status != SolveStatus::optimal) return out;
  const double z0 = res.solution[0];
  out.position = Position(los_locus_x(z0, xt, theta0), z0);
  if (with_powers) {
    out.powers_w.resize(static_cast<size_t>(n_slots));
    for (int n = 0; n < n_slots; ++n) out.powers_w[static_cast<size_t>(n)] = res.solution[1 + n];
  } else {
    out.powers_w.assign(static_cast<size_t>(n_slots), mode.static_power_w);
  }
  out.accepted = true;
  return out;
}

// One branch of the slave subproblem: variables (x, z, powers), objective
// pushes the signed line-of-sight offset outward to grow the perpendicular
// baseline.
inline BlockSolution solve_slave_branch(const Scenario& sc, const OptimizationMode& mode, int k,
                                        LookBranch branch, const SwarmState& anchor,
                                        const SwarmState& warm_state, const AoOptions& opts) {
  const double theta0 = sc.mission.master_look_angle_rad;
  const double xt = sc.mission.target_x_m;
  const double t0 = std::tan(theta0);
  const int n_slots = sc.mission.n_slots;
  const bool with_powers = !mode.static_powers;
  const int nvars = 2 + (with_powers ? n_slots : 0);
  const Position& q0 = anchor.uavs[0];
  const double r0 = slant_range(q0, xt);

  BlockSolution out;
  out.branch = branch;

  ConvexProgram prog(nvars);
  // Maximize the line-of-sight offset magnitude on the chosen side.
  const double sign = (branch == LookBranch::steep) ? -1.0 : 1.0;
  prog.objective[0] = sign * 1.0;
  prog.objective[1] = sign * t0;
  prog.set_bounds(0, xt - sc.limits.z_max_m * std::tan(sc.limits.theta_max_rad),
                  xt - sc.limits.z_min_m * std::tan(sc.limits.theta_min_rad));
  prog.set_bounds(1, sc.limits.z_min_m, sc.limits.z_max_m);

  auto add_xz_row = [&prog, nvars](double cx, double cz, double rhs, std::string name) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(nvars);
    a[0] = cx;
    a[1] = cz;
    prog.add_linear(std::move(a), rhs, std::move(name));
  };

  // Look-angle window: theta >= theta_min  <=>  x + z tan(theta_min) <= xt.
  add_xz_row(1.0, std::tan(sc.limits.theta_min_rad), xt, "look_min");
  add_xz_row(-1.0, -std::tan(sc.limits.theta_max_rad), -xt, "look_max");
  // Side of the master line of sight.
  if (branch == LookBranch::steep)
    add_xz_row(-1.0, -t0, -xt, "branch_steep");
  else
    add_xz_row(1.0, t0, xt, "branch_shallow");
  // Spectral coherence floor, exact on each branch.
  if (branch == LookBranch::steep) {
    const double floor = steep_angle_floor(theta0, sc.limits.gamma_rg_min, sc.radar);
    add_xz_row(1.0, std::tan(floor), xt, "spectral_floor");
  } else if (auto cap = shallow_angle_cap(theta0, sc.limits.gamma_rg_min, sc.radar)) {
    add_xz_row(-1.0, -std::tan(*cap), -xt, "spectral_floor");
  }
  // Ambiguity-height floor: signed baseline cap at the anchored master range.
  {
    const double b_cap = sc.radar.wavelength_m * r0 * std::sin(theta0) / sc.limits.h_amb_min_m;
    const double cos0 = std::cos(theta0);
    if (branch == LookBranch::steep)
      add_xz_row(cos0, cos0 * t0, b_cap + cos0 * xt, "ambiguity_floor");
    else
      add_xz_row(-cos0, -cos0 * t0, b_cap - cos0 * xt, "ambiguity_floor");
  }
  // Separation from master and, when present, the other slave. Tangent rows
  // anchor at the incumbent when it already sits on this branch's side;
  // otherwise at its mirror image across the line-of-sight locus, which
  // preserves the baseline magnitude and keeps the surrogate region from
  // collapsing onto the wrong side.
  Position q_hat = warm_state.uavs[static_cast<size_t>(k)];
  {
    const double s_inc = los_offset(q_hat, xt, theta0);
    const bool wrong_side = (branch == LookBranch::steep) ? s_inc > 0.0 : s_inc < 0.0;
    if (wrong_side) {
      const double m = (q_hat.x_m + q_hat.z_m * t0 - xt) / (1.0 + t0 * t0);
      q_hat = Position(q_hat.x_m - 2.0 * m, std::max(q_hat.z_m - 2.0 * m * t0, 1e-3));
    }
  }
  {
    const TangentRow row =
        separation_tangent(q_hat, q0.x_m, q0.z_m, sc.limits.d_min_m * sc.limits.d_min_m);
    add_xz_row(row.ax, row.az, row.b, "separation_u0");
  }
  if (mode.slave_count == 2) {
    const int other = (k == 1) ? 2 : 1;
    const Position& qo = anchor.uavs[static_cast<size_t>(other)];
    const TangentRow row =
        separation_tangent(q_hat, qo.x_m, qo.z_m, sc.limits.d_min_m * sc.limits.d_min_m);
    add_xz_row(row.ax, row.az, row.b, "separation_u" + std::to_string(other));
  }
  // Swath floor: tangent minorant of the squared range against its linear
  // upper envelope in z.
  {
    const double ratio = sc.limits.s_min_m / sc.radar.beamwidth_rad;
    double gx = q_hat.x_m - xt, gz = q_hat.z_m;
    if (gx * gx + gz * gz < 1e-18) gz = 1e-6;
    // ||q - pt||^2 >= ratio * z  linearized:
    // 2 gx x + (2 gz - ... ) handled via the shared tangent helper form.
    const double qhat_sq = q_hat.x_m * q_hat.x_m + q_hat.z_m * q_hat.z_m;
    const double pt_sq = xt * xt;
    // -2 g.q + ratio*z <= -(qhat_sq - pt_sq)
    add_xz_row(-2.0 * gx, -2.0 * gz + ratio, -(qhat_sq - pt_sq), "swath_min");
  }
  // SNR coherence floor: range cap bisected at the anchored master range.
  {
    const double r_cap = c6_max_slave_range(r0, sc.radar, sc.limits.gamma_snr_min);
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(nvars, nvars);
    Q(0, 0) = 1.0;
    Q(1, 1) = 1.0;
    Eigen::VectorXd q = Eigen::VectorXd::Zero(nvars);
    q[0] = -2.0 * xt;
    prog.add_quadratic(std::move(Q), std::move(q), r_cap * r_cap - xt * xt, "snr_floor");
  }
  // Rate floors and energy budget.
  const std::vector<double> dy2 = slot_offsets_sq(sc);
  const double kappa = rate_snr_factor(sc.comm, k);
  const double beta = sc.comm.ref_gain_over_noise[k];
  const double gx_gs = sc.comm.gs_position_m[0];
  const double gz_gs = sc.comm.gs_position_m[2];
  if (with_powers) {
    for (int n = 0; n < n_slots; ++n) {
      Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(nvars, nvars);
      Q(0, 0) = kappa;
      Q(1, 1) = kappa;
      Eigen::VectorXd q = Eigen::VectorXd::Zero(nvars);
      q[0] = -2.0 * kappa * gx_gs;
      q[1] = -2.0 * kappa * gz_gs;
      q[2 + n] = -beta;
      prog.add_quadratic(std::move(Q), std::move(q),
                         -kappa * (gx_gs * gx_gs + gz_gs * gz_gs + dy2[n]),
                         "rate_floor_n" + std::to_string(n));
      prog.set_bounds(2 + n, 0.0, sc.comm.max_power_w);
    }
    const double w = sc.comm.energy_includes_slot_duration ? sc.mission.slot_duration_s : 1.0;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(nvars);
    a.tail(n_slots).setConstant(w);
    prog.add_linear(std::move(a), sc.comm.max_energy_j, "energy_budget");
  } else {
    const double dy2_max = *std::max_element(dy2.begin(), dy2.end());
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(nvars, nvars);
    Q(0, 0) = kappa;
    Q(1, 1) = kappa;
    Eigen::VectorXd q = Eigen::VectorXd::Zero(nvars);
    q[0] = -2.0 * kappa * gx_gs;
    q[1] = -2.0 * kappa * gz_gs;
    prog.add_quadratic(std::move(Q), std::move(q),
                       beta * mode.static_power_w -
                           kappa * (gx_gs * gx_gs + gz_gs * gz_gs + dy2_max),
                       "rate_floor_static");
  }

  Eigen::VectorXd warm(nvars);
  warm[0] = q_hat.x_m;
  warm[1] = q_hat.z_m;
  if (with_powers)
    for (int n = 0; n < n_slots; ++n)
      warm[2 + n] = warm_state.powers_w[static_cast<size_t>(k)][static_cast<size_t>(n)];

  const SolveResult res = solve(prog, opts.solver, &warm);
  out.status = res.status;
  if (res.status != SolveStatus::optimal) return out;
  out.position = Position(res.solution[0], res.solution[1]);
  if (with_powers) {
    out.powers_w.resize(static_cast<size_t>(n_slots));
    for (int n = 0; n < n_slots; ++n) out.powers_w[static_cast<size_t>(n)] = res.solution[2 + n];
  } else {
    out.powers_w.assign(static_cast<size_t>(n_slots), mode.static_power_w);
  }
  out.accepted = true;
  return out;
}

// Solve both branches and keep the larger perpendicular baseline. The
// incumbent placement stays in force unless a branch strictly improves on
// it, so a failed or tangent-clipped subproblem can never shrink the
// baseline and exact ties never shuffle the formation. An incumbent that
// itself violates this UAV's exact constraints (possible only under an
// allowed infeasible start) never blocks an accepted branch.
inline BlockSolution solve_slave_block(const Scenario& sc, const OptimizationMode& mode, int k,
                                       const SwarmState& anchor, const SwarmState& warm_state,
                                       const AoOptions& opts) {
  const double theta0 = sc.mission.master_look_angle_rad;
  const double xt = sc.mission.target_x_m;
  BlockSolution steep = solve_slave_branch(sc, mode, k, LookBranch::steep, anchor, warm_state, opts);
  BlockSolution shallow =
      solve_slave_branch(sc, mode, k, LookBranch::shallow, anchor, warm_state, opts);
  BlockSolution* best = nullptr;
  if (steep.accepted) best = &steep;
  if (shallow.accepted &&
      (!best || perpendicular_baseline(shallow.position, xt, theta0) >
                    perpendicular_baseline(steep.position, xt, theta0)))
    best = &shallow;

  const Position& incumbent = warm_state.uavs[static_cast<size_t>(k)];
  const double b_incumbent = perpendicular_baseline(incumbent, xt, theta0);
  bool incumbent_ok = true;
  {
    SwarmState probe = anchor;
    probe.uavs[static_cast<size_t>(k)] = incumbent;
    probe.powers_w[static_cast<size_t>(k)] = warm_state.powers_w[static_cast<size_t>(k)];
    const std::string tag = "u" + std::to_string(k);
    for (const auto& e : audit_constraints(sc, probe).entries)
      if (e.slack < -1e-8 && e.name.find(tag) != std::string::npos) {
        incumbent_ok = false;
        break;
      }
  }
  // Relative margin well above solver tolerance: an exact cap tie on the
  // other branch must not shuffle the formation.
  if (best && (!incumbent_ok || perpendicular_baseline(best->position, xt, theta0) >=
                                    b_incumbent * (1.0 + 1e-4)))
    return *best;

  BlockSolution keep;
  keep.accepted = true;
  keep.position = incumbent;
  keep.powers_w = warm_state.powers_w[static_cast<size_t>(k)];
  keep.branch = los_offset(incumbent, xt, theta0) <= 0.0 ? LookBranch::steep : LookBranch::shallow;
  keep.status = best ? best->status : steep.status;
  return keep;
}

}  // namespace detail

// Deterministic feasible-point constructor. The master descends to the low
// end of its admissible altitude window; each slave is picked by a coarse
// scan over (look angle, range) inside its branch window, keeping the
// feasible candidate with the largest perpendicular baseline and a doubled
// separation margin. Returns no state (with a reason) when the scan proves
// empty, which is the infeasibility report of the whole problem.
struct InitOutcome {
  std::optional<SwarmState> state;
  std::string reason;
};

inline InitOutcome construct_initial_state(const Scenario& sc, const OptimizationMode& mode,
                                           const AoOptions& opts = {}) {
  sc.validate();
  const double theta0 = sc.mission.master_look_angle_rad;
  const double xt = sc.mission.target_x_m;
  const double cos0 = std::cos(theta0);
  const int n_slots = sc.mission.n_slots;
  const std::vector<double> y = along_track_positions(sc.mission);

  if (theta0 < sc.limits.theta_min_rad || theta0 > sc.limits.theta_max_rad)
    return {std::nullopt, "master look angle outside the allowed window"};

  // Feasible power schedule at a fixed position, or empty if none exists.
  auto schedule_for = [&](const Position& q, int uav) -> std::optional<std::vector<double>> {
    std::vector<double> p(static_cast<size_t>(n_slots));
    const double w = sc.comm.energy_includes_slot_duration ? sc.mission.slot_duration_s : 1.0;
    if (mode.static_powers) {
      for (size_t n = 0; n < y.size(); ++n) {
        const double need = min_power_for_rate(sc.comm.rate_floor_bps[uav],
                                               slot_distance(q, y[n], sc.comm.gs_position_m),
                                               sc.comm, uav);
        if (need > mode.static_power_w) return std::nullopt;
        p[n] = mode.static_power_w;
      }
      if (mode.static_power_w > sc.comm.max_power_w) return std::nullopt;
      return p;
    }
    for (const double headroom : {opts.power_headroom, 1.0}) {
      double energy = 0.0;
      bool ok = true;
      for (size_t n = 0; n < y.size(); ++n) {
        const double need = min_power_for_rate(sc.comm.rate_floor_bps[uav],
                                               slot_distance(q, y[n], sc.comm.gs_position_m),
                                               sc.comm, uav);
        if (need > sc.comm.max_power_w) {
          ok = false;
          break;
        }
        p[n] = std::min(need * headroom, sc.comm.max_power_w);
        energy += p[n] * w;
      }
      if (ok && energy <= sc.comm.max_energy_j) return p;
    }
    return std::nullopt;
  };

  // Master altitude window.
  const double swath_floor_z = sc.limits.s_min_m * cos0 * cos0 / sc.radar.beamwidth_rad;
  const double z_lo = std::max(sc.limits.z_min_m, swath_floor_z);
  // Necessary SNR-coherence cap with the partner range free.
  const double g = sc.limits.gamma_snr_min;
  const double r0_solo_cap =
      std::cbrt(sc.radar.radar_constant_m3 * (1.0 - g * g) / (g * g));
  const double z_hi = std::min(sc.limits.z_max_m, r0_solo_cap * cos0);
  if (z_lo > z_hi) return {std::nullopt, "master altitude window is empty"};

  std::vector<Position> master_candidates;
  if (mode.fixed_master) {
    const Position& q0 = *mode.fixed_master;
    if (std::abs(q0.x_m - los_locus_x(q0.z_m, xt, theta0)) > 1e-6)
      throw std::invalid_argument("fixed master must sit on the line-of-sight locus");
    if (q0.z_m < sc.limits.z_min_m - 1e-9 || q0.z_m > sc.limits.z_max_m + 1e-9 ||
        swath_width(q0, xt, sc.radar.beamwidth_rad) < sc.limits.s_min_m - 1e-9)
      throw std::invalid_argument("fixed master violates its altitude or swath constraints");
    if (!schedule_for(q0, 0))
      return {std::nullopt, "fixed master cannot meet its data-rate floor"};
    master_candidates.push_back(q0);
  } else {
    // Low altitudes first: they lead to the smallest master range the swath
    // floor allows, which the descent step favors anyway.
    const int steps = 48;
    for (int i = 0; i <= steps; ++i) {
      const double z = z_lo + (z_hi - z_lo) * (i + 0.25) / (steps + 1.0);
      master_candidates.push_back(Position(los_locus_x(z, xt, theta0), z));
    }
  }

  const double sep2 = 2.0 * sc.limits.d_min_m;

  struct BranchWindow {
    double theta_lo, theta_hi;
  };
  auto branch_window = [&](LookBranch b) -> std::optional<BranchWindow> {
    if (b == LookBranch::steep) {
      const double lo =
          std::max(sc.limits.theta_min_rad, steep_angle_floor(theta0, sc.limits.gamma_rg_min, sc.radar));
      const double hi = std::min(theta0, sc.limits.theta_max_rad);
      if (lo > hi) return std::nullopt;
      return BranchWindow{lo, hi};
    }
    double hi = sc.limits.theta_max_rad;
    if (auto cap = shallow_angle_cap(theta0, sc.limits.gamma_rg_min, sc.radar))
      hi = std::min(hi, *cap);
    const double lo = std::max(theta0, sc.limits.theta_min_rad);
    if (lo > hi) return std::nullopt;
    return BranchWindow{lo, hi};
  };

  for (const Position& q0 : master_candidates) {
    auto p0 = schedule_for(q0, 0);
    if (!p0) continue;
    const double r0 = slant_range(q0, xt);
    const double b_cap = sc.radar.wavelength_m * r0 * std::sin(theta0) / sc.limits.h_amb_min_m;
    const double r_c6_cap = c6_max_slave_range(r0, sc.radar, sc.limits.gamma_snr_min);

    // Scan one branch for the best feasible slave position.
    auto scan_branch = [&](LookBranch b, int uav,
                           const std::vector<Position>& avoid) -> std::optional<Position> {
      auto win = branch_window(b);
      if (!win) return std::nullopt;
      const int n_theta = 48, n_r = 48;
      std::optional<Position> best;
      double best_b = -1.0;
      for (int i = 0; i <= n_theta; ++i) {
        const double theta =
            win->theta_lo + (win->theta_hi - win->theta_lo) * i / static_cast<double>(n_theta);
        const double cos_t = std::cos(theta);
        const double r_lo =
            std::max(sc.limits.z_min_m / cos_t, sc.limits.s_min_m * cos_t / sc.radar.beamwidth_rad);
        const double r_hi = std::min(sc.limits.z_max_m / cos_t, r_c6_cap);
        if (r_lo > r_hi) continue;
        for (int j = 0; j <= n_r; ++j) {
          const double r = r_lo + (r_hi - r_lo) * j / static_cast<double>(n_r);
          const Position q(xt - r * std::sin(theta), r * cos_t);
          const double b_perp = perpendicular_baseline(q, xt, theta0);
          if (b_perp > b_cap || b_perp <= best_b) continue;
          bool clear = true;
          for (const Position& p : avoid)
            if (baseline(q, p) < sep2) {
              clear = false;
              break;
            }
          if (!clear) continue;
          if (baseline_decorrelation(q, xt, theta0, sc.radar) < sc.limits.gamma_rg_min - 1e-12)
            continue;
          if (!schedule_for(q, uav)) continue;
          best = q;
          best_b = b_perp;
        }
      }
      return best;
    };

    std::vector<Position> placed = {q0};
    std::vector<Position> slaves;
    std::vector<LookBranch> preferred = {LookBranch::steep, LookBranch::shallow};
    bool ok = true;
    for (int k = 1; k <= mode.slave_count; ++k) {
      const LookBranch first = preferred[static_cast<size_t>(k - 1)];
      const LookBranch second =
          (first == LookBranch::steep) ? LookBranch::shallow : LookBranch::steep;
      auto q = scan_branch(first, k, placed);
      // Both branches compete, but the preferred side keeps near ties: the
      // scan grid resolves baselines to a couple of percent, so only a
      // structural advantage justifies switching sides.
      if (auto alt = scan_branch(second, k, placed)) {
        if (!q || perpendicular_baseline(*alt, xt, theta0) >
                      perpendicular_baseline(*q, xt, theta0) * 1.02)
          q = alt;
      }
      if (!q) {
        ok = false;
        break;
      }
      slaves.push_back(*q);
      placed.push_back(*q);
    }
    if (!ok) continue;

    SwarmState state;
    state.uavs.push_back(q0);
    state.powers_w.push_back(*p0);
    for (int k = 1; k <= mode.slave_count; ++k) {
      state.uavs.push_back(slaves[static_cast<size_t>(k - 1)]);
      state.powers_w.push_back(*schedule_for(slaves[static_cast<size_t>(k - 1)], k));
    }
    return {state, ""};
  }
  return {std::nullopt,
          mode.fixed_master ? "no feasible slave placement exists for the fixed master"
                            : "no feasible formation found over the construction scan"};
}

// Alternating optimization driver. Default mode solves all blocks against
// the same pass-start snapshot (parallel update) and audits the combined
// iterate; if the audit fails the pass is redone sequentially, which
// restores the inner-approximation guarantee. `sequential_updates` skips the
// parallel attempt entirely.
inline AoResult alternating_optimize(const Scenario& sc, const OptimizationMode& mode,
                                     const AoOptions& opts = {},
                                     const SwarmState* start = nullptr) {
  sc.validate();
  if (mode.slave_count < 1 || mode.slave_count > 2)
    throw std::invalid_argument("optimizer: slave_count must be 1 or 2");

  AoResult result;
  SwarmState state;
  if (start) {
    state = *start;
  } else {
    InitOutcome init = construct_initial_state(sc, mode, opts);
    if (!init.state) {
      result.feasible = false;
      result.infeasibility_reason = init.reason;
      return result;
    }
    state = *init.state;
  }
  if (state.uavs.size() != static_cast<size_t>(1 + mode.slave_count))
    throw std::invalid_argument("optimizer: start state does not match the mode's UAV count");

  ConstraintAudit audit0 = audit_constraints(sc, state);
  if (!audit0.feasible() && !opts.allow_infeasible_start)
    throw std::invalid_argument("optimizer: start state violates " + audit0.violated_names());

  auto trace_push = [&result](std::string phase, int iter, double bound, double sigma,
                              std::string branch, std::string status, double viol) {
    result.trace.push_back(
        {std::move(phase), iter, bound, sigma, std::move(branch), std::move(status), viol});
  };

  auto safe_sigma = [&sc](const SwarmState& s) {
    const double xt = sc.mission.target_x_m;
    const double th = sc.mission.master_look_angle_rad;
    for (size_t k = 1; k < s.uavs.size(); ++k)
      if (perpendicular_baseline(s.uavs[k], xt, th) <= 1e-12)
        return std::numeric_limits<double>::infinity();
    return state_sigma(sc, s);
  };

  double bound = state_bound(sc, state);
  trace_push("init", 0, bound, safe_sigma(state), "", "", std::max(0.0, -audit0.min_slack));

  int pass = 0;
  for (pass = 1; pass <= opts.max_iterations; ++pass) {
    const SwarmState snapshot = state;
    bool fallback = false;

    auto run_sequential = [&](SwarmState& s) {
      if (mode.optimize_master) {
        detail::BlockSolution m = detail::solve_master_block(sc, mode, s, s, opts);
        if (m.accepted) {
          s.uavs[0] = m.position;
          s.powers_w[0] = m.powers_w;
        }
        trace_push(fallback ? "master_seq" : "master", pass, state_bound(sc, s), safe_sigma(s), "",
                   to_string(m.status), std::max(0.0, -audit_constraints(sc, s).min_slack));
      }
      for (int k = 1; k <= mode.slave_count; ++k) {
        detail::BlockSolution b = detail::solve_slave_block(sc, mode, k, s, s, opts);
        if (b.accepted) {
          s.uavs[static_cast<size_t>(k)] = b.position;
          s.powers_w[static_cast<size_t>(k)] = b.powers_w;
        }
        trace_push((fallback ? "slave_seq" : "slave") + std::to_string(k), pass, state_bound(sc, s),
                   safe_sigma(s), to_string(b.branch), to_string(b.status),
                   std::max(0.0, -audit_constraints(sc, s).min_slack));
      }
    };

    if (opts.sequential_updates) {
      run_sequential(state);
    } else {
      // Parallel pass: every block anchored at the snapshot.
      SwarmState candidate = snapshot;
      if (mode.optimize_master) {
        detail::BlockSolution m = detail::solve_master_block(sc, mode, snapshot, snapshot, opts);
        if (m.accepted) {
          candidate.uavs[0] = m.position;
          candidate.powers_w[0] = m.powers_w;
        }
        trace_push("master", pass, state_bound(sc, candidate), safe_sigma(candidate), "",
                   to_string(m.status), 0.0);
      }
      for (int k = 1; k <= mode.slave_count; ++k) {
        detail::BlockSolution b = detail::solve_slave_block(sc, mode, k, snapshot, snapshot, opts);
        if (b.accepted) {
          candidate.uavs[static_cast<size_t>(k)] = b.position;
          candidate.powers_w[static_cast<size_t>(k)] = b.powers_w;
        }
        trace_push("slave" + std::to_string(k), pass, state_bound(sc, candidate),
                   safe_sigma(candidate), to_string(b.branch), to_string(b.status), 0.0);
      }
      const ConstraintAudit joint = audit_constraints(sc, candidate);
      if (joint.feasible()) {
        state = candidate;
      } else {
        // Parallel blocks disagreed on the coupled constraints; redo the
        // pass sequentially from the snapshot.
        fallback = true;
        run_sequential(state);
      }
    }

    const double new_bound = state_bound(sc, state);
    const ConstraintAudit pass_audit = audit_constraints(sc, state);
    trace_push("pass", pass, new_bound, safe_sigma(state), "",
               fallback ? "accepted_after_fallback" : "accepted",
               std::max(0.0, -pass_audit.min_slack));
    const double decrease = bound - new_bound;
    bound = new_bound;
    if (decrease <= opts.epsilon_m && pass >= 1) {
      result.converged = true;
      break;
    }
  }

  result.feasible = true;
  result.state = state;
  result.bound_m = bound;
  result.sigma_h_m = safe_sigma(state);
  result.iterations = std::min(pass, opts.max_iterations);
  result.final_audit = audit_constraints(sc, state);
  return result;
}

}  // namespace insaropt
