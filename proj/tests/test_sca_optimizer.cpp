#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "insaropt/experiment.hpp"
#include "insaropt/sca_optimizer.hpp"

using namespace insaropt;
using Catch::Approx;

namespace {
constexpr double kPi = 3.14159265358979323846;

Scenario table_scenario() { return resolve_experiment(RawExperimentConfig{}).scenario; }

std::vector<double> min_powers(const Scenario& sc, const Position& q, int uav) {
  const std::vector<double> y = along_track_positions(sc.mission);
  std::vector<double> p(y.size());
  for (size_t n = 0; n < y.size(); ++n)
    p[n] = min_power_for_rate(sc.comm.rate_floor_bps[uav],
                              slot_distance(q, y[n], sc.comm.gs_position_m), sc.comm, uav);
  return p;
}

SwarmState state_from_positions(const Scenario& sc, const std::vector<Position>& qs) {
  SwarmState s;
  for (size_t k = 0; k < qs.size(); ++k) {
    s.uavs.push_back(qs[k]);
    s.powers_w.push_back(min_powers(sc, qs[k], static_cast<int>(k)));
  }
  return s;
}
}  // namespace

TEST_CASE("steep angle floor matches the hand value and sits on the coherence floor") {
  const Scenario sc = table_scenario();
  const double theta0 = sc.mission.master_look_angle_rad;
  const double floor = steep_angle_floor(theta0, sc.limits.gamma_rg_min, sc.radar);
  CHECK(floor == Approx(0.41595208695010732).epsilon(1e-12));
  // A partner exactly at the floor angle keeps exactly the minimum coherence.
  const double gamma = range_spectral_coherence(spectral_shift_ratio(theta0, floor),
                                                sc.radar.fractional_bandwidth);
  CHECK(gamma == Approx(sc.limits.gamma_rg_min).margin(1e-12));
}

TEST_CASE("shallow angle cap vanishes at the default floor and binds at stricter ones") {
  const Scenario sc = table_scenario();
  const double theta0 = sc.mission.master_look_angle_rad;
  // At the shipped floor every shallow angle keeps enough common band.
  CHECK_FALSE(shallow_angle_cap(theta0, sc.limits.gamma_rg_min, sc.radar).has_value());
  // A stricter floor produces a finite cap lying exactly on the floor.
  const auto cap = shallow_angle_cap(theta0, 0.95, sc.radar);
  REQUIRE(cap.has_value());
  CHECK(*cap > theta0);
  const double gamma = range_spectral_coherence(spectral_shift_ratio(theta0, *cap),
                                                sc.radar.fractional_bandwidth);
  CHECK(gamma == Approx(0.95).margin(1e-12));
}

TEST_CASE("partner range cap sits on the snr coherence floor") {
  const Scenario sc = table_scenario();
  const double r0 = 104.65180361560904;
  const double cap = c6_max_slave_range(r0, sc.radar, sc.limits.gamma_snr_min);
  CHECK(cap == Approx(83.489387864845042).margin(1e-6));
  const double gamma =
      snr_decorrelation(monostatic_snr(r0, sc.radar), bistatic_snr_approx(r0, cap, sc.radar));
  CHECK(gamma == Approx(sc.limits.gamma_snr_min).margin(1e-7));
}

TEST_CASE("master range cap sits on the snr coherence floor") {
  const Scenario sc = table_scenario();
  const double cap = c6_max_master_range(80.0, sc.radar, sc.limits.gamma_snr_min);
  const double gamma =
      snr_decorrelation(monostatic_snr(cap, sc.radar), bistatic_snr_approx(cap, 80.0, sc.radar));
  CHECK(gamma == Approx(sc.limits.gamma_snr_min).margin(1e-7));
  // With a vanishing partner range the cap approaches the solo limit.
  CHECK(c6_max_master_range(1e-3, sc.radar, sc.limits.gamma_snr_min) ==
        Approx(132.28983232508261).margin(1e-3));
}

TEST_CASE("constraint audit names each violated row with its natural-unit slack") {
  const Scenario sc = table_scenario();
  const double theta0 = sc.mission.master_look_angle_rad;

  SwarmState s = state_from_positions(
      sc, {Position(los_locus_x(74.0, 20.0, theta0), 74.0), Position(-36.0, 59.0),
           Position(-35.0, 52.0)});
  const ConstraintAudit ok = audit_constraints(sc, s);
  CHECK(ok.feasible(1e-8));
  // 1 locus row, 5 geometry rows and 4 power rows per UAV, 3 separations,
  // 3 coherence rows per pair.
  CHECK(ok.entries.size() == 1 + 3 * 5 + 3 * 4 + 3 + 2 * 3);

  SECTION("altitude violation") {
    SwarmState bad = s;
    bad.uavs[1] = Position(-41.0, 104.0);
    const ConstraintAudit audit = audit_constraints(sc, bad);
    CHECK_FALSE(audit.feasible());
    CHECK(audit.violated_names().find("altitude_max[u1]") != std::string::npos);
  }
  SECTION("master off the line-of-sight locus") {
    SwarmState bad = s;
    bad.uavs[0] = Position(-50.0, 74.0);
    const ConstraintAudit audit = audit_constraints(sc, bad);
    CHECK(audit.violated_names().find("los_locus[u0]") != std::string::npos);
  }
  SECTION("separation violation carries the distance shortfall") {
    SwarmState bad = s;
    bad.uavs[2] = Position(-36.5, 59.0);
    const ConstraintAudit audit = audit_constraints(sc, bad);
    bool found = false;
    for (const auto& e : audit.entries)
      if (e.name == "separation[u1,u2]") {
        found = true;
        CHECK(e.slack == Approx(0.5 - sc.limits.d_min_m).margin(1e-12));
      }
    CHECK(found);
  }
  SECTION("starved power schedule breaks the rate floor") {
    SwarmState bad = s;
    bad.powers_w[1].assign(bad.powers_w[1].size(), 1e-9);
    const ConstraintAudit audit = audit_constraints(sc, bad);
    CHECK(audit.violated_names().find("rate_floor[u1]") != std::string::npos);
  }
  SECTION("oversized baseline breaks the ambiguity floor") {
    SwarmState bad = s;
    bad.uavs[1] = Position(-90.0, 99.0);
    const ConstraintAudit audit = audit_constraints(sc, bad);
    CHECK(audit.violated_names().find("ambiguity_floor[u0,u1]") != std::string::npos);
  }
}

TEST_CASE("audit rejects malformed states") {
  const Scenario sc = table_scenario();
  SwarmState s = state_from_positions(sc, {Position(-54.0, 74.0)});
  CHECK_THROWS_AS(audit_constraints(sc, s), std::invalid_argument);
  s = state_from_positions(
      sc, {Position(-54.0, 74.0), Position(-36.0, 59.0), Position(-35.0, 52.0)});
  s.powers_w[2].pop_back();
  CHECK_THROWS_AS(audit_constraints(sc, s), std::invalid_argument);
}

TEST_CASE("initial state construction is deterministic and feasible") {
  const Scenario sc = table_scenario();
  const OptimizationMode mode;
  const InitOutcome a = construct_initial_state(sc, mode);
  const InitOutcome b = construct_initial_state(sc, mode);
  REQUIRE(a.state.has_value());
  REQUIRE(b.state.has_value());
  CHECK(audit_constraints(sc, *a.state).feasible(1e-8));
  for (size_t k = 0; k < a.state->uavs.size(); ++k) {
    CHECK(a.state->uavs[k].x_m == b.state->uavs[k].x_m);
    CHECK(a.state->uavs[k].z_m == b.state->uavs[k].z_m);
  }
  // The master starts on its locus inside the altitude window the swath
  // floor and the coherence cap allow.
  const double theta0 = sc.mission.master_look_angle_rad;
  const Position& q0 = a.state->uavs[0];
  CHECK(std::abs(q0.x_m - los_locus_x(q0.z_m, 20.0, theta0)) < 1e-9);
  CHECK(q0.z_m >= 47.0);
  CHECK(q0.z_m <= 93.6);
}

TEST_CASE("initial state construction reports impossible scenarios") {
  Scenario sc = table_scenario();
  sc.limits.s_min_m = 1000.0;
  const InitOutcome out = construct_initial_state(sc, OptimizationMode{});
  CHECK_FALSE(out.state.has_value());
  CHECK_FALSE(out.reason.empty());
}

TEST_CASE("fixed master placements are validated up front") {
  const Scenario sc = table_scenario();
  OptimizationMode mode;
  mode.optimize_master = false;

  mode.fixed_master = Position(-50.0, 74.0);  // off the locus
  CHECK_THROWS_AS(construct_initial_state(sc, mode), std::invalid_argument);

  mode.fixed_master = Position(los_locus_x(30.0, 20.0, sc.mission.master_look_angle_rad), 30.0);
  CHECK_THROWS_AS(construct_initial_state(sc, mode), std::invalid_argument);  // swath too narrow

  mode.fixed_master = Position(-54.0, 74.0);
  const InitOutcome out = construct_initial_state(sc, mode);
  REQUIRE(out.state.has_value());
  CHECK(out.state->uavs[0].x_m == -54.0);
  CHECK(audit_constraints(sc, *out.state).feasible(1e-8));
}

TEST_CASE("alternating optimization reaches the plateau on the reference problem") {
  const Scenario sc = table_scenario();
  const AoResult r = alternating_optimize(sc, OptimizationMode{});
  REQUIRE(r.feasible);
  CHECK(r.converged);
  CHECK(r.iterations <= 30);
  CHECK(r.bound_m == Approx(0.114807051433).margin(1e-6));
  CHECK(r.final_audit.feasible(1e-8));
  // The model error never exceeds its worst-case bound.
  CHECK(r.sigma_h_m <= r.bound_m + 1e-12);

  // Both baselines are pinned at the ambiguity cap at the plateau.
  const double theta0 = sc.mission.master_look_angle_rad;
  const double r0 = slant_range(r.state.uavs[0], 20.0);
  const double b_cap = sc.radar.wavelength_m * r0 * std::sin(theta0) / sc.limits.h_amb_min_m;
  CHECK(perpendicular_baseline(r.state.uavs[1], 20.0, theta0) == Approx(b_cap).margin(1e-3));
  CHECK(perpendicular_baseline(r.state.uavs[2], 20.0, theta0) == Approx(b_cap).margin(1e-3));
  // One slave on each side of the master line of sight.
  const double off1 = los_offset(r.state.uavs[1], 20.0, theta0);
  const double off2 = los_offset(r.state.uavs[2], 20.0, theta0);
  CHECK(off1 * off2 < 0.0);

  // The per-pass trace never increases.
  double prev = std::numeric_limits<double>::infinity();
  int passes = 0;
  for (const auto& e : r.trace) {
    if (e.phase != "pass") continue;
    ++passes;
    CHECK(e.bound_m <= prev + 1e-9);
    prev = e.bound_m;
  }
  CHECK(passes == r.iterations);
}

TEST_CASE("sequential updates reach the same plateau") {
  const Scenario sc = table_scenario();
  AoOptions opts;
  opts.sequential_updates = true;
  const AoResult r = alternating_optimize(sc, OptimizationMode{}, opts);
  REQUIRE(r.feasible);
  CHECK(r.bound_m == Approx(0.114807051433).margin(1e-5));
  CHECK(r.final_audit.feasible(1e-8));
}

TEST_CASE("a loose stopping tolerance ends the optimization after one pass") {
  const Scenario sc = table_scenario();
  AoOptions opts;
  opts.epsilon_m = 10.0;
  const AoResult r = alternating_optimize(sc, OptimizationMode{}, opts);
  REQUIRE(r.feasible);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
}

TEST_CASE("infeasible starting formations are rejected unless explicitly allowed") {
  const Scenario sc = table_scenario();
  // Slave 2 sits below the swath floor here.
  const SwarmState start = state_from_positions(
      sc, {Position(-40.0, 60.0), Position(-27.0, 52.0), Position(-25.0, 52.0)});
  REQUIRE_FALSE(audit_constraints(sc, start).feasible(1e-8));

  CHECK_THROWS_AS(alternating_optimize(sc, OptimizationMode{}, AoOptions{}, &start),
                  std::invalid_argument);

  AoOptions opts;
  opts.allow_infeasible_start = true;
  const AoResult r = alternating_optimize(sc, OptimizationMode{}, opts, &start);
  REQUIRE(r.feasible);
  CHECK(r.converged);
  CHECK(r.bound_m <= 0.2);
  CHECK(r.final_audit.feasible(1e-8));
}

TEST_CASE("optimizer rejects malformed modes and mismatched starts") {
  const Scenario sc = table_scenario();
  OptimizationMode mode;
  mode.slave_count = 3;
  CHECK_THROWS_AS(alternating_optimize(sc, mode), std::invalid_argument);

  const SwarmState two = state_from_positions(
      sc, {Position(-54.0, 74.0), Position(-41.0, 61.0)});
  CHECK_THROWS_AS(alternating_optimize(sc, OptimizationMode{}, AoOptions{}, &two),
                  std::invalid_argument);
}

TEST_CASE("state bound and state sigma agree with the metric layer") {
  const Scenario sc = table_scenario();
  const SwarmState s = state_from_positions(
      sc, {Position(-54.0, 74.0), Position(-36.0, 59.0), Position(-35.0, 52.0)});
  const double theta0 = sc.mission.master_look_angle_rad;
  const double b1 = perpendicular_baseline(s.uavs[1], 20.0, theta0);
  const double b2 = perpendicular_baseline(s.uavs[2], 20.0, theta0);
  CHECK(state_bound(sc, s) ==
        Approx(worst_case_height_error(104.65180361560904, theta0, b1, b2, sc.radar, sc.limits))
            .epsilon(1e-12));
  const SwarmFormation swarm{s.uavs[0], s.uavs[1], s.uavs[2]};
  CHECK(state_sigma(sc, s) ==
        Approx(fused_height_error_at(swarm, 20.0, theta0, sc.radar)).epsilon(1e-12));
}
