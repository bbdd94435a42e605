#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "insaropt/experiment.hpp"
#include "insaropt/validation.hpp"

using namespace insaropt;
using Catch::Approx;

namespace {
Scenario table_scenario() { return resolve_experiment(RawExperimentConfig{}).scenario; }
}  // namespace

TEST_CASE("gaussian sampler is deterministic with sane moments") {
  GaussianSampler a(42), b(42), c(43);
  bool identical = true;
  bool all_same_vs_other_seed = true;
  for (int i = 0; i < 1000; ++i) {
    const double xa = a(), xb = b(), xc = c();
    identical = identical && xa == xb;
    all_same_vs_other_seed = all_same_vs_other_seed && xa == xc;
  }
  CHECK(identical);
  CHECK_FALSE(all_same_vs_other_seed);

  GaussianSampler g(7);
  const int n = 100000;
  double mean = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = g();
    mean += x;
    sq += x * x;
  }
  mean /= n;
  const double stddev = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean) < 0.02);
  CHECK(stddev == Approx(1.0).margin(0.02));
}

TEST_CASE("multilook phase noise simulation is deterministic") {
  const double s1 = simulate_phase_std(0.9, 4, 5000, 3);
  const double s2 = simulate_phase_std(0.9, 4, 5000, 3);
  CHECK(s1 == s2);
  CHECK(s1 != simulate_phase_std(0.9, 4, 5000, 4));
}

TEST_CASE("multilook phase noise tracks the analytic deviation") {
  auto ratio = [](double g, int looks) {
    return simulate_phase_std(g, looks, 20000, 7) / crb_phase_std(g, looks);
  };
  // At high coherence and many looks the analytic deviation is tight.
  const double high = ratio(0.95, 16);
  CHECK(high == Approx(1.03107935786).margin(1e-9));
  CHECK(high >= 1.0);
  CHECK(high <= 1.07);
  // With few looks the estimator is biased wide of the analytic value.
  const double few = ratio(0.95, 4);
  CHECK(few == Approx(1.16869843519).margin(1e-9));
  CHECK(few >= 1.10);
  CHECK(few <= 1.25);
  // At the worst-case coherence the gap widens further.
  const double low = ratio(0.384, 4);
  CHECK(low == Approx(1.23820742587).margin(1e-9));
  CHECK(low >= 1.15);
  CHECK(low <= 1.35);
}

TEST_CASE("phase noise simulation rejects malformed inputs") {
  CHECK_THROWS_AS(simulate_phase_std(0.0, 4, 100, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_phase_std(1.0, 4, 100, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_phase_std(0.9, 0, 100, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_phase_std(0.9, 4, 1, 1), std::invalid_argument);
}

TEST_CASE("fused-height simulation matches the inverse-variance rule") {
  const FusedSimulation fs = simulate_fused_height_error(8.88, 0.9, 6.5, 0.85, 4, 100000, 11);
  CHECK(fs.fused_std_m / fs.predicted_from_pairs_m == Approx(1.00012230181).margin(1e-9));
  CHECK(std::abs(fs.fused_std_m / fs.predicted_from_pairs_m - 1.0) < 0.01);
  // The fusion actually helps: tighter than either pair alone.
  CHECK(fs.fused_std_m < fs.pair1_std_m);
  CHECK(fs.fused_std_m < fs.pair2_std_m);
  // Per-pair empirical deviations sit near (wide of) the analytic values.
  const double model1 = pair_height_error(8.88, crb_phase_std(0.9, 4));
  const double model2 = pair_height_error(6.5, crb_phase_std(0.85, 4));
  CHECK(fs.pair1_std_m / model1 == Approx(1.0).margin(0.25));
  CHECK(fs.pair2_std_m / model2 == Approx(1.0).margin(0.25));
  // Deterministic replay.
  const FusedSimulation again = simulate_fused_height_error(8.88, 0.9, 6.5, 0.85, 4, 100000, 11);
  CHECK(again.fused_std_m == fs.fused_std_m);
}

TEST_CASE("grid search finds the known lattice optimum at the defaults") {
  const Scenario sc = table_scenario();
  const GridSearchResult g = grid_search_formation(sc, 0.5);
  REQUIRE(g.feasible);
  CHECK(g.bound_m == Approx(0.114812908773).margin(1e-9));
  CHECK(g.bound_m > 0.1147);
  CHECK(g.bound_m < 0.1150);
  CHECK(g.candidate_count == 5697);
  // The winning formation survives the exact constraint audit.
  const ConstraintAudit audit = audit_constraints(sc, g.best);
  CHECK(audit.feasible(1e-8));
  // Master sits on the line-of-sight locus.
  const double theta0 = sc.mission.master_look_angle_rad;
  CHECK(g.best.uavs[0].x_m ==
        Approx(los_locus_x(g.best.uavs[0].z_m, sc.mission.target_x_m, theta0)).margin(1e-9));
  CHECK_THROWS_AS(grid_search_formation(sc, 0.05), std::invalid_argument);
}

TEST_CASE("finer grids never do worse") {
  const Scenario sc = table_scenario();
  const GridSearchResult coarse = grid_search_formation(sc, 1.0);
  const GridSearchResult fine = grid_search_formation(sc, 0.5);
  REQUIRE(coarse.feasible);
  REQUIRE(fine.feasible);
  CHECK(coarse.bound_m == Approx(0.115276799313).margin(1e-9));
  CHECK(fine.bound_m <= coarse.bound_m + 1e-12);
}

TEST_CASE("optimizer result is at least as good as the half-meter lattice") {
  const Scenario sc = table_scenario();
  const GridSearchResult g = grid_search_formation(sc, 0.5);
  const AoResult ao = run_scheme(sc, Scheme::proposed);
  REQUIRE(g.feasible);
  REQUIRE(ao.feasible);
  CHECK(ao.bound_m <= g.bound_m + 1e-9);
  CHECK(ao.bound_m >= g.bound_m * (1.0 - 1e-3));
}

TEST_CASE("tightening the swath floor never enlarges the feasible grid") {
  const Scenario sc = table_scenario();
  std::vector<long> counts;
  for (double s_min : {55.0, 60.0, 70.0}) {
    Scenario t = sc;
    t.limits.s_min_m = s_min;
    counts.push_back(grid_feasible_cell_count(t, 2.0));
  }
  CHECK(counts[0] == 363);
  CHECK(counts[1] == 341);
  CHECK(counts[2] == 292);
  CHECK(counts[0] >= counts[1]);
  CHECK(counts[1] >= counts[2]);
}

TEST_CASE("oracle checks pass at reduced sample counts") {
  const Scenario sc = table_scenario();
  const RadarLinkBudget budget = link_budget_from_config(RawExperimentConfig{});

  const OracleCheck swath = check_swath_identity(sc, 1000, 5);
  CHECK(swath.pass);
  CHECK(swath.value < 1e-12);

  const OracleCheck dom = check_bound_dominance(sc, 2000, 5);
  CHECK(dom.pass);
  CHECK(dom.value == 0.0);

  const OracleCheck branch = check_branch_forms(sc, 500, 5);
  CHECK(branch.pass);
  CHECK(branch.value == 0.0);

  const OracleCheck rt = check_coherence_round_trip(sc.radar, 500);
  CHECK(rt.pass);
  CHECK(rt.value < 1e-12);

  const OracleCheck bi = check_bistatic_approx(sc, budget, 2000, 5);
  CHECK(bi.pass);
  CHECK(bi.value == Approx(0.045448).margin(1e-4));

  const OracleCheck mcp = check_mc_phase_std(0.95, 16, 20000, 7);
  CHECK(mcp.pass);

  const OracleCheck mcf = check_mc_fused(8.88, 0.9, 6.5, 0.85, 4, 100000, 11);
  CHECK(mcf.pass);
  CHECK(mcf.value < 0.01);
}

TEST_CASE("oracle check helper applies its threshold rule") {
  CHECK(make_check("x", 0.5, 0.5).pass);
  CHECK_FALSE(make_check("x", 0.500001, 0.5).pass);
  CHECK(make_check("x", 0.0, 0.0).pass);
}
