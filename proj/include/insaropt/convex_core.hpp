#pragma once

// Dense convex-program container and a log-barrier interior-point solver for
// the subproblem family this project produces: linear objective over linear,
// convex-quadratic, and second-order-cone constraints plus box bounds, at
// most around a hundred variables. Feasibility verdicts come from an elastic
// phase-1 program, optimality from the barrier duality gap. The solver is
// deterministic: no randomness, no time-dependent behavior.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace insaropt {

struct LinearConstraint {
  Eigen::VectorXd a;  // a.dot(x) <= b
  double b = 0.0;
  std::string name;
};

struct QuadraticConstraint {
  Eigen::MatrixXd Q;  // x'Qx + q.dot(x) <= b, Q positive semidefinite
  Eigen::VectorXd q;
  double b = 0.0;
  std::string name;
};

struct SocConstraint {
  Eigen::MatrixXd A;  // ||A x + c|| <= d.dot(x) + e
  Eigen::VectorXd c;
  Eigen::VectorXd d;
  double e = 0.0;
  std::string name;
};

enum class SolveStatus { optimal, infeasible, max_iterations };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    default: return "max_iterations";
  }
}

struct SolveResult {
  SolveStatus status = SolveStatus::max_iterations;
  Eigen::VectorXd solution;
  double objective_value = std::numeric_limits<double>::quiet_NaN();
  double primal_residual = std::numeric_limits<double>::quiet_NaN();
  double dual_residual = std::numeric_limits<double>::quiet_NaN();
  double relative_gap = std::numeric_limits<double>::quiet_NaN();
  // Phase-1 certified lower bound on the maximum violation when infeasible.
  double infeasibility_measure = 0.0;
  std::string worst_constraint;
  int newton_iterations = 0;
};

struct SolverTolerances {
  double feasibility = 1e-8;
  double relative_gap = 1e-7;
  double infeasibility_threshold = 1e-7;
  int max_newton_per_center = 60;
  int max_outer_rounds = 60;
  double barrier_growth = 30.0;
};

struct ConvexProgram {
  int variable_count = 0;
  Eigen::VectorXd objective;
  double objective_constant = 0.0;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<LinearConstraint> linear;
  std::vector<QuadraticConstraint> quadratic;
  std::vector<SocConstraint> soc;

  ConvexProgram() = default;
  explicit ConvexProgram(int nvars)
      : variable_count(nvars),
        objective(Eigen::VectorXd::Zero(nvars)),
        lower(Eigen::VectorXd::Constant(nvars, -std::numeric_limits<double>::infinity())),
        upper(Eigen::VectorXd::Constant(nvars, std::numeric_limits<double>::infinity())) {}

  void add_linear(Eigen::VectorXd a, double b, std::string name) {
    if (a.size() != variable_count) throw std::invalid_argument("program: linear row dimension mismatch");
    linear.push_back({std::move(a), b, std::move(name)});
  }
  void add_quadratic(Eigen::MatrixXd Q, Eigen::VectorXd q, double b, std::string name) {
    if (Q.rows() != variable_count || Q.cols() != variable_count || q.size() != variable_count)
      throw std::invalid_argument("program: quadratic row dimension mismatch");
    quadratic.push_back({std::move(Q), std::move(q), b, std::move(name)});
  }
  void add_soc(Eigen::MatrixXd A, Eigen::VectorXd c, Eigen::VectorXd d, double e, std::string name) {
    if (A.cols() != variable_count || c.size() != A.rows() || d.size() != variable_count)
      throw std::invalid_argument("program: cone row dimension mismatch");
    soc.push_back({std::move(A), std::move(c), std::move(d), e, std::move(name)});
  }
  void set_bounds(int var, double lo, double hi) {
    if (var < 0 || var >= variable_count) throw std::invalid_argument("program: bound index out of range");
    if (lo > hi) throw std::invalid_argument("program: empty box bound");
    lower[var] = lo;
    upper[var] = hi;
  }

  // Structural validation: dimensions plus a positive-semidefiniteness check
  // of every quadratic term restricted to its support.
  void check() const {
    if (objective.size() != variable_count || lower.size() != variable_count ||
        upper.size() != variable_count)
      throw std::invalid_argument("program: vector sizes disagree with variable_count");
    for (const auto& qc : quadratic) {
      std::vector<int> sup;
      for (int j = 0; j < variable_count; ++j)
        if (qc.Q.col(j).cwiseAbs().maxCoeff() > 0.0 || qc.Q.row(j).cwiseAbs().maxCoeff() > 0.0)
          sup.push_back(j);
      if (sup.empty()) continue;
      Eigen::MatrixXd sub(sup.size(), sup.size());
      for (size_t r = 0; r < sup.size(); ++r)
        for (size_t col = 0; col < sup.size(); ++col)
          sub(r, col) = 0.5 * (qc.Q(sup[r], sup[col]) + qc.Q(sup[col], sup[r]));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
      const double scale = std::max(1.0, sub.cwiseAbs().maxCoeff());
      if (es.eigenvalues().minCoeff() < -1e-9 * scale)
        throw std::invalid_argument("program: quadratic term '" + qc.name + "' is not positive semidefinite");
    }
  }
};

// One constraint per line, for external cross-checking of a built program.
inline std::string program_to_text(const ConvexProgram& p) {
  std::ostringstream out;
  out.precision(17);
  out << "minimize " << p.objective.transpose() << " + " << p.objective_constant << "\n";
  for (int j = 0; j < p.variable_count; ++j)
    out << "box x" << j << " in [" << p.lower[j] << ", " << p.upper[j] << "]\n";
  for (const auto& r : p.linear) out << "lin " << r.name << ": " << r.a.transpose() << " <= " << r.b << "\n";
  for (const auto& r : p.quadratic) {
    out << "quad " << r.name << ": Q=[";
    for (int i = 0; i < r.Q.rows(); ++i)
      for (int j = 0; j < r.Q.cols(); ++j)
        if (r.Q(i, j) != 0.0) out << " (" << i << "," << j << ")=" << r.Q(i, j);
    out << " ] q=" << r.q.transpose() << " <= " << r.b << "\n";
  }
  for (const auto& r : p.soc)
    out << "soc " << r.name << ": ||Ax+c|| <= " << r.d.transpose() << "x + " << r.e << "\n";
  return out.str();
}

struct ResidualEntry {
  std::string name;
  double slack;  // nonnegative means satisfied
};

struct ResidualReport {
  std::vector<ResidualEntry> entries;
  double min_slack = std::numeric_limits<double>::infinity();
  std::string argmin;
};

inline ResidualReport validate_solution(const ConvexProgram& p, const Eigen::VectorXd& x) {
  if (x.size() != p.variable_count) throw std::invalid_argument("validate: point dimension mismatch");
  ResidualReport rep;
  auto push = [&rep](const std::string& name, double slack) {
    rep.entries.push_back({name, slack});
    if (slack < rep.min_slack) {
      rep.min_slack = slack;
      rep.argmin = name;
    }
  };
  for (int j = 0; j < p.variable_count; ++j) {
    if (std::isfinite(p.lower[j])) push("box_lower_x" + std::to_string(j), x[j] - p.lower[j]);
    if (std::isfinite(p.upper[j])) push("box_upper_x" + std::to_string(j), p.upper[j] - x[j]);
  }
  for (const auto& r : p.linear) push(r.name, r.b - r.a.dot(x));
  for (const auto& r : p.quadratic) push(r.name, r.b - x.dot(r.Q * x) - r.q.dot(x));
  for (const auto& r : p.soc) push(r.name, r.d.dot(x) + r.e - (r.A * x + r.c).norm());
  return rep;
}

namespace detail {

struct LinRow {
  Eigen::VectorXd a;
  double b;
  const std::string* name;
  std::vector<int> sup;
};
struct QuadRow {
  Eigen::MatrixXd Qsub2;  // 2 * symmetrized Q restricted to support
  Eigen::VectorXd qsub;
  double b;
  const std::string* name;
  std::vector<int> sup;
  const QuadraticConstraint* src;
};
struct SocRow {
  const SocConstraint* src;
  Eigen::MatrixXd curv;  // 2(A'A - dd') restricted to support
  std::vector<int> sup;
};

struct RowSet {
  std::vector<LinRow> lin;
  std::vector<QuadRow> quad;
  std::vector<SocRow> soc;
  std::vector<std::string> box_names;  // storage for synthesized names
  size_t count() const { return lin.size() + quad.size() + soc.size(); }
};

inline std::vector<int> dense_support(const Eigen::VectorXd& v) {
  std::vector<int> sup;
  for (int j = 0; j < v.size(); ++j)
    if (v[j] != 0.0) sup.push_back(j);
  return sup;
}

inline RowSet build_rows(const ConvexProgram& p) {
  RowSet rows;
  rows.box_names.reserve(2 * static_cast<size_t>(p.variable_count));
  for (int j = 0; j < p.variable_count; ++j) {
    if (std::isfinite(p.lower[j])) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(p.variable_count);
      a[j] = -1.0;
      rows.box_names.push_back("box_lower_x" + std::to_string(j));
      rows.lin.push_back({std::move(a), -p.lower[j], &rows.box_names.back(), {j}});
    }
    if (std::isfinite(p.upper[j])) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(p.variable_count);
      a[j] = 1.0;
      rows.box_names.push_back("box_upper_x" + std::to_string(j));
      rows.lin.push_back({std::move(a), p.upper[j], &rows.box_names.back(), {j}});
    }
  }
  for (const auto& r : p.linear) rows.lin.push_back({r.a, r.b, &r.name, dense_support(r.a)});
  for (const auto& r : p.quadratic) {
    QuadRow qr;
    qr.src = &r;
    qr.b = r.b;
    qr.name = &r.name;
    std::vector<bool> used(p.variable_count, false);
    for (int j = 0; j < p.variable_count; ++j)
      if (r.Q.col(j).cwiseAbs().maxCoeff() > 0.0 || r.Q.row(j).cwiseAbs().maxCoeff() > 0.0 ||
          r.q[j] != 0.0)
        used[j] = true;
    for (int j = 0; j < p.variable_count; ++j)
      if (used[j]) qr.sup.push_back(j);
    const size_t m = qr.sup.size();
    qr.Qsub2.resize(m, m);
    qr.qsub.resize(m);
    for (size_t i = 0; i < m; ++i) {
      qr.qsub[i] = r.q[qr.sup[i]];
      for (size_t j = 0; j < m; ++j)
        qr.Qsub2(i, j) = r.Q(qr.sup[i], qr.sup[j]) + r.Q(qr.sup[j], qr.sup[i]);
    }
    rows.quad.push_back(std::move(qr));
  }
  for (const auto& r : p.soc) {
    SocRow sr;
    sr.src = &r;
    std::vector<bool> used(p.variable_count, false);
    for (int j = 0; j < p.variable_count; ++j)
      if (r.A.col(j).cwiseAbs().maxCoeff() > 0.0 || r.d[j] != 0.0) used[j] = true;
    for (int j = 0; j < p.variable_count; ++j)
      if (used[j]) sr.sup.push_back(j);
    const size_t m = sr.sup.size();
    Eigen::MatrixXd Asub(r.A.rows(), m);
    Eigen::VectorXd dsub(m);
    for (size_t j = 0; j < m; ++j) {
      Asub.col(j) = r.A.col(sr.sup[j]);
      dsub[j] = r.d[sr.sup[j]];
    }
    sr.curv = 2.0 * (Asub.transpose() * Asub - dsub * dsub.transpose());
    rows.soc.push_back(std::move(sr));
  }
  return rows;
}

// Slack of every row at x. Returns false as soon as the point is not
// strictly interior. SOC slack is the barrier argument (d'x+e)^2-||Ax+c||^2
// together with the positivity of d'x+e.
inline bool eval_slacks(const RowSet& rows, const Eigen::VectorXd& x, std::vector<double>& s) {
  s.clear();
  s.reserve(rows.count());
  for (const auto& r : rows.lin) {
    const double v = r.b - r.a.dot(x);
    if (!(v > 0.0)) return false;
    s.push_back(v);
  }
  for (const auto& r : rows.quad) {
    double g = 0.0;
    const size_t m = r.sup.size();
    for (size_t i = 0; i < m; ++i) {
      const double xi = x[r.sup[i]];
      g += r.qsub[i] * xi;
      double acc = 0.0;
      for (size_t j = 0; j < m; ++j) acc += r.Qsub2(i, j) * x[r.sup[j]];
      g += 0.5 * acc * xi;
    }
    const double v = r.b - g;
    if (!(v > 0.0)) return false;
    s.push_back(v);
  }
  for (const auto& r : rows.soc) {
    const double t = r.src->d.dot(x) + r.src->e;
    if (!(t > 0.0)) return false;
    const double v = t * t - (r.src->A * x + r.src->c).squaredNorm();
    if (!(v > 0.0)) return false;
    s.push_back(v);
  }
  return true;
}

inline double barrier_value(const std::vector<double>& s) {
  double phi = 0.0;
  for (double v : s) phi -= std::log(v);
  return phi;
}

// Gradient and Hessian of the log barrier at x, given precomputed slacks in
// the same order eval_slacks produced them.
inline void barrier_derivatives(const RowSet& rows, const Eigen::VectorXd& x,
                                const std::vector<double>& s, Eigen::VectorXd& grad,
                                Eigen::MatrixXd& hess) {
  grad.setZero();
  hess.setZero();
  size_t si = 0;
  for (const auto& r : rows.lin) {
    const double inv = 1.0 / s[si++];
    for (size_t i = 0; i < r.sup.size(); ++i) {
      const int gi = r.sup[i];
      const double ai = r.a[gi];
      grad[gi] += ai * inv;
      for (size_t j = 0; j < r.sup.size(); ++j)
        hess(gi, r.sup[j]) += ai * r.a[r.sup[j]] * inv * inv;
    }
  }
  for (const auto& r : rows.quad) {
    const double inv = 1.0 / s[si++];
    const size_t m = r.sup.size();
    Eigen::VectorXd g(m);
    for (size_t i = 0; i < m; ++i) {
      double acc = r.qsub[i];
      for (size_t j = 0; j < m; ++j) acc += r.Qsub2(i, j) * x[r.sup[j]];
      g[i] = acc;
    }
    for (size_t i = 0; i < m; ++i) {
      const int gi = r.sup[i];
      grad[gi] += g[i] * inv;
      for (size_t j = 0; j < m; ++j)
        hess(gi, r.sup[j]) += g[i] * g[j] * inv * inv + r.Qsub2(i, j) * inv;
    }
  }
  for (const auto& r : rows.soc) {
    const double inv = 1.0 / s[si++];
    const double t = r.src->d.dot(x) + r.src->e;
    const Eigen::VectorXd u = r.src->A * x + r.src->c;
    const Eigen::VectorXd atu = r.src->A.transpose() * u;
    const size_t m = r.sup.size();
    Eigen::VectorXd ds(m);  // gradient of the slack t^2 - u'u
    for (size_t i = 0; i < m; ++i) ds[i] = 2.0 * t * r.src->d[r.sup[i]] - 2.0 * atu[r.sup[i]];
    for (size_t i = 0; i < m; ++i) {
      const int gi = r.sup[i];
      grad[gi] -= ds[i] * inv;
      for (size_t j = 0; j < m; ++j)
        hess(gi, r.sup[j]) += ds[i] * ds[j] * inv * inv + r.curv(i, j) * inv;
    }
  }
}

// Exact worst violation of the original constraints (boxes included) at x,
// with the offending row's name.
inline std::pair<double, std::string> max_violation(const ConvexProgram& p,
                                                    const Eigen::VectorXd& x) {
  const ResidualReport rep = validate_solution(p, x);
  if (rep.entries.empty()) return {0.0, ""};
  return {-rep.min_slack, rep.argmin};
}

struct CenterOutcome {
  bool converged = false;
  int newton_steps = 0;
};

// Damped Newton minimization of t*c.x + barrier(x), in place.
inline CenterOutcome center(const RowSet& rows, const Eigen::VectorXd& c, double t,
                            Eigen::VectorXd& x, const SolverTolerances& tol,
                            const std::function<bool(const Eigen::VectorXd&)>& early_stop) {
  const int n = static_cast<int>(x.size());
  CenterOutcome out;
  std::vector<double> s;
  Eigen::VectorXd grad(n);
  Eigen::MatrixXd hess(n, n);
  if (!eval_slacks(rows, x, s)) return out;  // caller guarantees interior; be safe
  for (int iter = 0; iter < tol.max_newton_per_center; ++iter) {
    if (early_stop && early_stop(x)) {
      out.converged = true;
      return out;
    }
    barrier_derivatives(rows, x, s, grad, hess);
    Eigen::VectorXd g = t * c + grad;
    if (!g.allFinite()) return out;
    // A vanishing gradient means the centering optimum is attained exactly;
    // no descent direction exists to be found below.
    if (!(g.cwiseAbs().maxCoeff() > 0.0)) {
      out.converged = true;
      return out;
    }
    Eigen::VectorXd step;
    double ridge = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::MatrixXd H = hess;
      if (ridge > 0.0) H.diagonal().array() += ridge;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
      if (ldlt.info() == Eigen::Success) {
        step = ldlt.solve(-g);
        if (step.allFinite() && g.dot(step) < 0.0) break;
      }
      ridge = (ridge == 0.0) ? 1e-12 * std::max(1.0, hess.diagonal().maxCoeff()) : ridge * 100.0;
      step.resize(0);
    }
    if (step.size() == 0) return out;  // numerical breakdown
    const double decrement = -g.dot(step);
    const double f0 = t * c.dot(x) + barrier_value(s);
    // Decrease below the rounding floor of the centering objective cannot be
    // measured, so treat it as converged rather than as a stalled search.
    const double noise = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(f0);
    if (decrement / 2.0 <= std::max(1e-10, noise)) {
      out.converged = true;
      return out;
    }
    // Backtrack to stay strictly interior, then to make progress.
    double alpha = 1.0;
    std::vector<double> s_try;
    Eigen::VectorXd x_try;
    bool accepted = false;
    for (int bt = 0; bt < 70; ++bt) {
      x_try = x + alpha * step;
      if (eval_slacks(rows, x_try, s_try)) {
        const double f_try = t * c.dot(x_try) + barrier_value(s_try);
        if (f_try <= f0 - 0.25 * alpha * decrement + noise) {
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    ++out.newton_steps;
    if (!accepted) {
      // Step-size underflow: trust the gap certificate only when the Newton
      // decrement says we are already inside the quadratic zone.
      out.converged = (decrement / 2.0 <= 1e-4);
      return out;
    }
    x = std::move(x_try);
    s = std::move(s_try);
  }
  return out;
}

inline Eigen::VectorXd default_start(const ConvexProgram& p) {
  Eigen::VectorXd x(p.variable_count);
  for (int j = 0; j < p.variable_count; ++j) {
    const double lo = p.lower[j], hi = p.upper[j];
    if (std::isfinite(lo) && std::isfinite(hi))
      x[j] = 0.5 * (lo + hi);
    else if (std::isfinite(lo))
      x[j] = lo + 1.0;
    else if (std::isfinite(hi))
      x[j] = hi - 1.0;
    else
      x[j] = 0.0;
  }
  return x;
}

}  // namespace detail

// Solves the program. An optional warm-start point is used when it is
// strictly interior; otherwise a phase-1 elastic program finds one or
// certifies infeasibility.
inline SolveResult solve(const ConvexProgram& p, const SolverTolerances& tol = {},
                         const Eigen::VectorXd* warm_start = nullptr) {
  p.check();
  const int n = p.variable_count;
  SolveResult result;
  if (n == 0) throw std::invalid_argument("solve: empty program");

  detail::RowSet rows = detail::build_rows(p);

  // Objective normalization makes the stopping rule invariant to positive
  // rescaling of the objective.
  const double c_scale = p.objective.cwiseAbs().maxCoeff();
  const bool pure_feasibility = (c_scale == 0.0);
  const Eigen::VectorXd c_hat = pure_feasibility ? p.objective : (p.objective / c_scale).eval();

  int newton_total = 0;
  Eigen::VectorXd x;
  std::vector<double> s_probe;

  bool have_interior = false;
  if (warm_start && warm_start->size() == n && detail::eval_slacks(rows, *warm_start, s_probe)) {
    x = *warm_start;
    have_interior = true;
  }
  if (!have_interior) {
    Eigen::VectorXd x0 = detail::default_start(p);
    if (detail::eval_slacks(rows, x0, s_probe)) {
      x = std::move(x0);
      have_interior = true;
    }
  }

  if (!have_interior) {
    // Phase 1: minimize the elastic margin sigma added to every row.
    ConvexProgram relaxed(n + 1);
    relaxed.objective[n] = 1.0;
    relaxed.set_bounds(n, -1.0, std::numeric_limits<double>::infinity());
    for (int j = 0; j < n; ++j) {
      if (std::isfinite(p.lower[j])) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(n + 1);
        a[j] = -1.0;
        a[n] = -1.0;
        relaxed.add_linear(std::move(a), -p.lower[j], "box_lower_x" + std::to_string(j));
      }
      if (std::isfinite(p.upper[j])) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(n + 1);
        a[j] = 1.0;
        a[n] = -1.0;
        relaxed.add_linear(std::move(a), p.upper[j], "box_upper_x" + std::to_string(j));
      }
    }
    for (const auto& r : p.linear) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(n + 1);
      a.head(n) = r.a;
      a[n] = -1.0;
      relaxed.add_linear(std::move(a), r.b, r.name);
    }
    for (const auto& r : p.quadratic) {
      Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n + 1, n + 1);
      Q.topLeftCorner(n, n) = r.Q;
      Eigen::VectorXd q = Eigen::VectorXd::Zero(n + 1);
      q.head(n) = r.q;
      q[n] = -1.0;
      relaxed.add_quadratic(std::move(Q), std::move(q), r.b, r.name);
    }
    for (const auto& r : p.soc) {
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(r.A.rows(), n + 1);
      A.leftCols(n) = r.A;
      Eigen::VectorXd d = Eigen::VectorXd::Zero(n + 1);
      d.head(n) = r.d;
      d[n] = 1.0;
      relaxed.add_soc(std::move(A), r.c, std::move(d), r.e, r.name);
    }
    detail::RowSet relaxed_rows = detail::build_rows(relaxed);

    Eigen::VectorXd xr(n + 1);
    xr.head(n) = (warm_start && warm_start->size() == n) ? *warm_start : detail::default_start(p);
    xr[n] = std::max(0.0, detail::max_violation(p, xr.head(n)).first) + 1.0;

    const Eigen::VectorXd c1 = relaxed.objective;
    auto strictly_feasible = [&](const Eigen::VectorXd& point) {
      return detail::max_violation(p, point.head(n)).first <= -1e-9;
    };
    double t = 1.0;
    const double m1 = static_cast<double>(relaxed_rows.count());
    bool found = false;
    for (int round = 0; round < tol.max_outer_rounds; ++round) {
      detail::CenterOutcome c_out =
          detail::center(relaxed_rows, c1, t, xr, tol, strictly_feasible);
      newton_total += c_out.newton_steps;
      if (strictly_feasible(xr)) {
        found = true;
        break;
      }
      if (!c_out.converged) break;
      const double gap = m1 / t;
      const double sigma_lower = xr[n] - gap;
      if (gap <= 0.25 * tol.infeasibility_threshold) {
        if (sigma_lower > tol.infeasibility_threshold) {
          result.status = SolveStatus::infeasible;
          result.solution = xr.head(n);
          result.infeasibility_measure = sigma_lower;
          auto [viol, name] = detail::max_violation(p, result.solution);
          result.primal_residual = std::max(0.0, viol);
          result.worst_constraint = name;
          result.newton_iterations = newton_total;
          return result;
        }
        break;  // margin certified near zero but never strictly negative
      }
      t *= tol.barrier_growth;
    }
    if (!found) {
      result.status = SolveStatus::max_iterations;
      result.solution = xr.head(n);
      result.infeasibility_measure = xr[n];
      auto [viol, name] = detail::max_violation(p, result.solution);
      result.primal_residual = std::max(0.0, viol);
      result.worst_constraint = name;
      result.newton_iterations = newton_total;
      return result;
    }
    x = xr.head(n);
    if (!detail::eval_slacks(rows, x, s_probe)) {
      // Interior by margin check yet not by slack sign: numerically razor
      // thin. Report honestly.
      result.status = SolveStatus::max_iterations;
      result.solution = x;
      result.newton_iterations = newton_total;
      return result;
    }
  }

  const double m = static_cast<double>(rows.count());
  double t = 1.0;
  bool gap_met = false;
  if (pure_feasibility) {
    detail::CenterOutcome c_out = detail::center(rows, c_hat, 1.0, x, tol, nullptr);
    newton_total += c_out.newton_steps;
    gap_met = true;
  } else {
    for (int round = 0; round < tol.max_outer_rounds; ++round) {
      detail::CenterOutcome c_out = detail::center(rows, c_hat, t, x, tol, nullptr);
      newton_total += c_out.newton_steps;
      const double obj_now = c_scale * c_hat.dot(x) + p.objective_constant;
      const double gap_abs = c_scale * m / t;
      // The barrier certificate at the current t is checked even when the
      // centering stalled: a stall only happens after progress at this t,
      // and primal feasibility is verified independently below.
      if (gap_abs <= tol.relative_gap * std::max(1.0, std::abs(obj_now))) {
        gap_met = true;
        break;
      }
      if (!c_out.converged) break;
      t *= tol.barrier_growth;
    }
  }

  result.solution = x;
  result.objective_value = p.objective.dot(x) + p.objective_constant;
  auto [viol, name] = detail::max_violation(p, x);
  result.primal_residual = std::max(0.0, viol);
  result.worst_constraint = name;
  result.relative_gap =
      pure_feasibility
          ? 0.0
          : (c_scale * m / t) / std::max(1.0, std::abs(result.objective_value));
  {
    std::vector<double> s;
    Eigen::VectorXd grad(n);
    Eigen::MatrixXd hess(n, n);
    if (detail::eval_slacks(rows, x, s)) {
      detail::barrier_derivatives(rows, x, s, grad, hess);
      result.dual_residual =
          pure_feasibility ? 0.0 : c_scale * (c_hat + grad / t).cwiseAbs().maxCoeff();
    }
  }
  result.newton_iterations = newton_total;
  result.status = (gap_met && result.primal_residual <= tol.feasibility)
                      ? SolveStatus::optimal
                      : SolveStatus::max_iterations;
  return result;
}

}  // namespace insaropt
