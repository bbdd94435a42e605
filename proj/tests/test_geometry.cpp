#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "insaropt/geometry.hpp"

using namespace insaropt;
using Catch::Approx;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTheta0 = kPi / 4.0;
constexpr double kTargetX = 20.0;
}  // namespace

TEST_CASE("slant range matches hand values") {
  CHECK(slant_range(Position(-54.0, 74.0), kTargetX) ==
        Approx(104.65180361560904).epsilon(1e-12));
  CHECK(slant_range(Position(-41.0, 61.0), kTargetX) ==
        Approx(86.267027304758798).epsilon(1e-12));
  // 3-4-5 triangle.
  CHECK(slant_range(Position(-10.0, 40.0), kTargetX) == Approx(50.0).epsilon(1e-15));
}

TEST_CASE("look angle matches hand values") {
  CHECK(look_angle(Position(-22.0, 45.0), kTargetX) * 180.0 / kPi ==
        Approx(43.025065989118026).epsilon(1e-12));
  // Directly below the locus point: 45 degrees.
  CHECK(look_angle(Position(-25.0, 45.0), kTargetX) == Approx(kTheta0).epsilon(1e-15));
  // Closer in horizontal distance than altitude: steep side, below 45 degrees.
  CHECK(look_angle(Position(-10.0, 45.0), kTargetX) < kTheta0);
}

TEST_CASE("swath width matches hand values and both closed forms agree") {
  const double bw = 33.44 * kPi / 180.0;
  CHECK(swath_width(Position(-54.0, 74.0), kTargetX, bw) ==
        Approx(86.37843907630176).epsilon(1e-11));
  CHECK(swath_width(Position(-41.0, 61.0), kTargetX, bw) ==
        Approx(71.203848427762253).epsilon(1e-11));

  // Theta*r/cos(theta) and Theta*r^2/z describe the same quantity.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(-90.0, 10.0), uz(5.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const Position q(ux(rng), uz(rng));
    const double r = slant_range(q, kTargetX);
    const double via_angle = bw * r / std::cos(look_angle(q, kTargetX));
    const double via_altitude = bw * r * r / q.z_m;
    CHECK(swath_width(q, kTargetX, bw) == Approx(via_angle).epsilon(1e-12));
    CHECK(via_angle == Approx(via_altitude).epsilon(1e-12));
  }

  CHECK_THROWS_AS(swath_width(Position(0.0, 10.0), kTargetX, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(swath_width(Position(0.0, 10.0), kTargetX, -0.1), std::invalid_argument);
}

TEST_CASE("line-of-sight offset is signed and vanishes on the locus") {
  // Steep side (closer to the target line than the locus) is negative.
  CHECK(los_offset(Position(-10.0, 45.0), kTargetX, kTheta0) < 0.0);
  // Shallow side is positive.
  CHECK(los_offset(Position(-40.0, 45.0), kTargetX, kTheta0) > 0.0);
  // On the locus the offset vanishes.
  const double z = 37.5;
  CHECK(los_offset(Position(los_locus_x(z, kTargetX, kTheta0), z), kTargetX, kTheta0) ==
        Approx(0.0).margin(1e-12));
  // Hand value: (20-(-22)) - 45 = -3 at 45 degrees.
  CHECK(los_offset(Position(-22.0, 45.0), kTargetX, kTheta0) == Approx(-3.0).epsilon(1e-12));
}

TEST_CASE("perpendicular baseline matches hand values") {
  CHECK(perpendicular_baseline(Position(-22.0, 45.0), kTargetX, kTheta0) ==
        Approx(2.1213203435596428).epsilon(1e-12));
  // Sign of the offset does not matter.
  CHECK(perpendicular_baseline(Position(-28.0, 45.0), kTargetX, kTheta0) ==
        Approx(perpendicular_baseline(Position(-22.0, 45.0), kTargetX, kTheta0))
            .epsilon(1e-12));
  // Zero on the locus.
  CHECK(perpendicular_baseline(Position(-25.0, 45.0), kTargetX, kTheta0) ==
        Approx(0.0).margin(1e-12));
}

TEST_CASE("tilt route and offset route agree for a master on the locus") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uz(20.0, 100.0), dx(-20.0, 20.0), dz(-15.0, 15.0);
  for (int i = 0; i < 1000; ++i) {
    const double z0 = uz(rng);
    const Position q0(los_locus_x(z0, kTargetX, kTheta0), z0);
    Position qk(q0.x_m + dx(rng), std::max(1.0, q0.z_m + dz(rng)));
    if (same_position(q0, qk)) continue;
    const double via_offset = perpendicular_baseline(qk, kTargetX, kTheta0);
    const double via_tilt = perpendicular_baseline_from_tilt(q0, qk, kTheta0);
    CHECK(via_offset == Approx(via_tilt).margin(1e-9));
  }
}

TEST_CASE("baseline is the euclidean separation") {
  CHECK(baseline(Position(0.0, 10.0), Position(3.0, 14.0)) == Approx(5.0).epsilon(1e-15));
  CHECK(baseline(Position(-54.0, 74.0), Position(-54.0, 74.0)) == 0.0);
}

TEST_CASE("along-track positions advance by speed times slot duration") {
  MissionConfig mission;
  mission.master_look_angle_rad = kTheta0;
  mission.n_slots = 4;
  mission.slot_duration_s = 1.0;
  mission.velocity_mps = 4.3;
  const std::vector<double> y = along_track_positions(mission);
  REQUIRE(y.size() == 4);
  CHECK(y[0] == 0.0);
  CHECK(y[1] == Approx(4.3).epsilon(1e-15));
  CHECK(y[2] == Approx(8.6).epsilon(1e-12));
  CHECK(y[3] == Approx(12.9).epsilon(1e-12));

  mission.slot_duration_s = 0.5;
  const std::vector<double> y2 = along_track_positions(mission);
  CHECK(y2[3] == Approx(6.45).epsilon(1e-12));
}

TEST_CASE("position and formation validation reject degenerate inputs") {
  CHECK_THROWS_AS(Position(0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Position(0.0, -5.0), std::invalid_argument);

  SwarmFormation swarm{Position(-54.0, 74.0), Position(-41.0, 61.0), Position(-41.0, 61.0)};
  CHECK_THROWS_AS(swarm.validate(), std::invalid_argument);
  swarm.slave2 = Position(-22.0, 45.0);
  CHECK_NOTHROW(swarm.validate());
}

TEST_CASE("mission validation rejects non-positive slot counts and durations") {
  MissionConfig mission;
  mission.master_look_angle_rad = kTheta0;
  mission.n_slots = 0;
  CHECK_THROWS_AS(mission.validate(), std::invalid_argument);
  mission.n_slots = 10;
  mission.slot_duration_s = -1.0;
  CHECK_THROWS_AS(mission.validate(), std::invalid_argument);
  mission.slot_duration_s = 1.0;
  CHECK_NOTHROW(mission.validate());
}

TEST_CASE("locus x places the point at the master look angle") {
  for (double z : {10.0, 45.0, 74.0, 99.0}) {
    const Position q(los_locus_x(z, kTargetX, kTheta0), z);
    CHECK(look_angle(q, kTargetX) == Approx(kTheta0).epsilon(1e-14));
  }
  // At 45 degrees the locus is x = xt - z.
  CHECK(los_locus_x(74.0, kTargetX, kTheta0) == Approx(-54.0).epsilon(1e-12));
}
