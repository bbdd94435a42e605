#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "insaropt/convex_core.hpp"

using namespace insaropt;
using Catch::Approx;

namespace {
Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("linear program lands on the unique vertex") {
  ConvexProgram p(2);
  p.objective = vec2(-2.0, -1.0);
  p.set_bounds(0, 0.0, 10.0);
  p.set_bounds(1, 0.0, 10.0);
  p.add_linear(vec2(1.0, 1.0), 1.0, "simplex");
  const SolveResult r = solve(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.objective_value == Approx(-2.0).margin(1e-5));
  CHECK(r.solution[0] == Approx(1.0).margin(1e-4));
  CHECK(r.solution[1] == Approx(0.0).margin(1e-4));
  CHECK(r.primal_residual <= 1e-8);
}

TEST_CASE("box-only program rides the bound and honors the constant") {
  ConvexProgram p(1);
  p.objective = Eigen::VectorXd::Ones(1);
  p.objective_constant = 5.0;
  p.set_bounds(0, -3.0, 5.0);
  const SolveResult r = solve(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.solution[0] == Approx(-3.0).margin(1e-5));
  CHECK(r.objective_value == Approx(2.0).margin(1e-5));
}

TEST_CASE("degenerate optimal face still certifies the optimal value") {
  ConvexProgram p(2);
  p.objective = vec2(1.0, 1.0);
  p.set_bounds(0, 0.0, 2.0);
  p.set_bounds(1, 0.0, 2.0);
  p.add_linear(vec2(-1.0, -1.0), -1.0, "floor");
  const SolveResult r = solve(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.objective_value == Approx(1.0).margin(1e-5));
  CHECK(r.solution[0] + r.solution[1] == Approx(1.0).margin(1e-5));
}

TEST_CASE("quadratic disc constraint is active at the optimum") {
  ConvexProgram p(2);
  p.objective = vec2(1.0, 1.0);
  p.add_quadratic(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2), 2.0, "disc");
  const SolveResult r = solve(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.objective_value == Approx(-2.0).margin(1e-5));
  CHECK(r.solution[0] == Approx(-1.0).margin(1e-4));
  CHECK(r.solution[1] == Approx(-1.0).margin(1e-4));
}

TEST_CASE("cone row measures the distance from a box to a point") {
  ConvexProgram p(3);
  p.objective = Eigen::VectorXd::Zero(3);
  p.objective[2] = 1.0;
  p.set_bounds(0, 0.0, 1.0);
  p.set_bounds(1, 0.0, 1.0);
  p.set_bounds(2, 0.0, 100.0);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 3);
  A(0, 0) = 1.0;
  A(1, 1) = 1.0;
  Eigen::VectorXd c = vec2(-3.0, -4.0);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(3);
  d[2] = 1.0;
  p.add_soc(A, c, d, 0.0, "reach");
  const SolveResult r = solve(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.objective_value == Approx(std::sqrt(13.0)).margin(1e-4));
  CHECK(r.solution[0] == Approx(1.0).margin(1e-3));
  CHECK(r.solution[1] == Approx(1.0).margin(1e-3));
}

TEST_CASE("contradictory rows are certified infeasible") {
  ConvexProgram p(1);
  p.objective = Eigen::VectorXd::Ones(1);
  p.set_bounds(0, -5.0, 5.0);
  Eigen::VectorXd a(1);
  a << 1.0;
  p.add_linear(a, -1.0, "upper");
  a << -1.0;
  p.add_linear(a, -1.0, "lower");
  const SolveResult r = solve(p);
  CHECK(r.status == SolveStatus::infeasible);
  // The gap between the rows is 2, so any point violates one of them by >= 1.
  CHECK(r.infeasibility_measure > 0.5);
  CHECK_FALSE(r.worst_constraint.empty());
}

TEST_CASE("phase one recovers an interior point when the default start is outside") {
  ConvexProgram p(1);
  p.objective = Eigen::VectorXd::Ones(1);
  p.set_bounds(0, 0.0, 10.0);  // midpoint 5 violates the window below
  Eigen::VectorXd a(1);
  a << 1.0;
  p.add_linear(a, 9.0, "win_hi");
  a << -1.0;
  p.add_linear(a, -8.0, "win_lo");
  const SolveResult r = solve(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.solution[0] == Approx(8.0).margin(1e-5));
}

TEST_CASE("random box programs reach the sign vertex") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> uc(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 6;
    ConvexProgram p(n);
    p.objective.resize(n);
    double best = 0.0;
    for (int j = 0; j < n; ++j) {
      p.objective[j] = uc(rng);
      p.set_bounds(j, -1.0, 1.0);
      best -= std::abs(p.objective[j]);
    }
    const SolveResult r = solve(p);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.objective_value == Approx(best).margin(1e-4));
  }
}

TEST_CASE("pure feasibility programs return a strictly feasible point") {
  ConvexProgram p(2);
  p.objective = Eigen::VectorXd::Zero(2);
  p.set_bounds(0, -1.0, 1.0);
  p.set_bounds(1, -1.0, 1.0);
  p.add_quadratic(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2), 0.5, "disc");
  const SolveResult r = solve(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.solution.squaredNorm() < 0.5);
}

TEST_CASE("warm start reproduces the cold solution") {
  ConvexProgram p(2);
  p.objective = vec2(1.0, 2.0);
  p.set_bounds(0, -1.0, 3.0);
  p.set_bounds(1, -2.0, 3.0);
  p.add_quadratic(Eigen::MatrixXd::Identity(2, 2), vec2(0.5, -0.5), 4.0, "cell");
  const SolveResult cold = solve(p);
  REQUIRE(cold.status == SolveStatus::optimal);
  // Warm-start from a strictly interior nudge of the solution.
  Eigen::VectorXd warm = 0.9 * cold.solution;
  const SolveResult warmed = solve(p, {}, &warm);
  REQUIRE(warmed.status == SolveStatus::optimal);
  CHECK(warmed.objective_value == Approx(cold.objective_value).margin(1e-6));
}

TEST_CASE("repeated solves are bitwise deterministic") {
  ConvexProgram p(3);
  p.objective = Eigen::VectorXd::Zero(3);
  p.objective << 0.3, -0.7, 0.1;
  for (int j = 0; j < 3; ++j) p.set_bounds(j, -2.0, 2.0);
  p.add_linear(Eigen::VectorXd::Ones(3), 1.5, "cap");
  const SolveResult a = solve(p);
  const SolveResult b = solve(p);
  REQUIRE(a.status == b.status);
  CHECK(a.objective_value == b.objective_value);
  CHECK((a.solution - b.solution).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.newton_iterations == b.newton_iterations);
}

TEST_CASE("solution validation reports slacks and the tightest row") {
  ConvexProgram p(2);
  p.objective = vec2(0.0, 0.0);
  p.set_bounds(0, 0.0, 4.0);
  p.add_linear(vec2(1.0, 0.0), 3.0, "wall");
  p.add_quadratic(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2), 9.0, "ball");
  Eigen::VectorXd x = vec2(2.5, 0.0);
  const ResidualReport rep = validate_solution(p, x);
  CHECK(rep.min_slack == Approx(0.5).margin(1e-12));
  CHECK(rep.argmin == "wall");
  // Violations show up as negative slack; the ball is the worst offender at
  // this point (9 - 3.5^2 = -3.25 against the wall's -0.5).
  x = vec2(3.5, 0.0);
  const ResidualReport bad = validate_solution(p, x);
  CHECK(bad.min_slack == Approx(-3.25).margin(1e-12));
  CHECK(bad.argmin == "ball");
}

TEST_CASE("program construction rejects malformed pieces") {
  CHECK_THROWS_AS(solve(ConvexProgram()), std::invalid_argument);

  ConvexProgram p(2);
  CHECK_THROWS_AS(p.add_linear(Eigen::VectorXd::Zero(3), 1.0, "bad"), std::invalid_argument);
  CHECK_THROWS_AS(p.set_bounds(5, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(p.set_bounds(0, 2.0, 1.0), std::invalid_argument);

  // Indefinite quadratic terms are refused by the structural check.
  ConvexProgram q(2);
  q.objective = vec2(1.0, 0.0);
  Eigen::MatrixXd bad(2, 2);
  bad << 0.0, 1.0, 1.0, 0.0;
  q.add_quadratic(bad, Eigen::VectorXd::Zero(2), 1.0, "saddle");
  CHECK_THROWS_AS(solve(q), std::invalid_argument);
}

TEST_CASE("program text lists every row for external checking") {
  ConvexProgram p(1);
  p.objective = Eigen::VectorXd::Ones(1);
  p.set_bounds(0, 0.0, 1.0);
  Eigen::VectorXd a(1);
  a << 2.0;
  p.add_linear(a, 0.5, "half");
  const std::string text = program_to_text(p);
  CHECK(text.find("half") != std::string::npos);
  CHECK(text.find("box x0") != std::string::npos);
}
