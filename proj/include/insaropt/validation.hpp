#pragma once

// Independent oracles for the analytic model and the optimizer: a Monte
// Carlo simulator of multilook interferometric phase noise (jointly circular
// complex Gaussian looks at a prescribed coherence), a fused-estimate
// simulator, and a brute-force grid search over formations with exact
// constraint filtering.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "insaropt/benchmarks.hpp"
#include "insaropt/sca_optimizer.hpp"

namespace insaropt {

// Deterministic standard-normal sampler: fixed engine, fixed Box-Muller
// transform, no library distributions whose stream is implementation
// defined.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log1p(-u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  double uniform01() {
    // 53-bit mantissa draw in [0, 1).
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }
  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

namespace detail {

inline double sample_std(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

// One multilook interferometric phase draw: looks are pairs (u, v) of unit
// circular complex Gaussians with correlation `coherence`; the phase is the
// argument of the look-averaged cross product.
inline double multilook_phase(GaussianSampler& g, double coherence, int looks) {
  const double ortho = std::sqrt(1.0 - coherence * coherence);
  double re = 0.0, im = 0.0;
  for (int i = 0; i < looks; ++i) {
    const double ur = g() * M_SQRT1_2, ui = g() * M_SQRT1_2;
    const double wr = g() * M_SQRT1_2, wi = g() * M_SQRT1_2;
    const double vr = coherence * ur + ortho * wr;
    const double vi = coherence * ui + ortho * wi;
    // u * conj(v)
    re += ur * vr + ui * vi;
    im += ui * vr - ur * vi;
  }
  return std::atan2(im, re);
}

}  // namespace detail

// Empirical standard deviation of the multilook phase estimate.
inline double simulate_phase_std(double coherence, int looks, int samples, std::uint64_t seed) {
  if (!(coherence > 0.0 && coherence < 1.0) || looks < 1 || samples < 2)
    throw std::invalid_argument("phase simulation: coherence in (0,1), looks >= 1, samples >= 2");
  GaussianSampler g(seed);
  std::vector<double> phases(static_cast<size_t>(samples));
  for (auto& p : phases) p = detail::multilook_phase(g, coherence, looks);
  return detail::sample_std(phases);
}

struct FusedSimulation {
  double fused_std_m = 0.0;
  double pair1_std_m = 0.0;
  double pair2_std_m = 0.0;
  // Inverse-variance prediction applied to the empirical pair deviations.
  double predicted_from_pairs_m = 0.0;
};

// Simulate two independent interferometric pairs, convert phase noise to
// height through each pair's height of ambiguity, and fuse with
// inverse-variance weights computed from the model deviations.
inline FusedSimulation simulate_fused_height_error(double hoa1_m, double coherence1,
                                                   double hoa2_m, double coherence2, int looks,
                                                   int samples, std::uint64_t seed) {
  const double sigma1 = pair_height_error(hoa1_m, crb_phase_std(coherence1, looks));
  const double sigma2 = pair_height_error(hoa2_m, crb_phase_std(coherence2, looks));
  const double w1 = 1.0 / (sigma1 * sigma1);
  const double w2 = 1.0 / (sigma2 * sigma2);
  GaussianSampler g(seed);
  std::vector<double> h1(static_cast<size_t>(samples)), h2(h1.size()), fused(h1.size());
  for (size_t i = 0; i < h1.size(); ++i) {
    h1[i] = hoa1_m * detail::multilook_phase(g, coherence1, looks) / (2.0 * M_PI);
    h2[i] = hoa2_m * detail::multilook_phase(g, coherence2, looks) / (2.0 * M_PI);
    fused[i] = (w1 * h1[i] + w2 * h2[i]) / (w1 + w2);
  }
  FusedSimulation out;
  out.pair1_std_m = detail::sample_std(h1);
  out.pair2_std_m = detail::sample_std(h2);
  out.fused_std_m = detail::sample_std(fused);
  out.predicted_from_pairs_m =
      1.0 / std::sqrt(1.0 / (out.pair1_std_m * out.pair1_std_m) +
                      1.0 / (out.pair2_std_m * out.pair2_std_m));
  return out;
}

struct GridSearchResult {
  bool feasible = false;
  double bound_m = std::numeric_limits<double>::quiet_NaN();
  SwarmState best;
  double grid_step_m = 0.0;
  long candidate_count = 0;  // slave lattice points passing the exact filter
};

// Brute-force oracle: masters on the line-of-sight locus and slaves on a
// lattice of `grid_step` multiples, filtered by the exact constraint set
// with minimal-power schedules. For each master the best pair is selected
// among the top slave candidates of each side ranked by perpendicular
// baseline; the objective is the same worst-case bound the optimizer
// minimizes.
inline GridSearchResult grid_search_formation(const Scenario& sc, double grid_step_m,
                                              int top_k = 64) {
  if (grid_step_m < 0.1) throw std::invalid_argument("grid search: step below 0.1 m");
  sc.validate();
  const double theta0 = sc.mission.master_look_angle_rad;
  const double xt = sc.mission.target_x_m;
  const double cos0 = std::cos(theta0);
  const std::vector<double> y = along_track_positions(sc.mission);
  const double w = sc.comm.energy_includes_slot_duration ? sc.mission.slot_duration_s : 1.0;

  GridSearchResult out;
  out.grid_step_m = grid_step_m;
  if (theta0 < sc.limits.theta_min_rad || theta0 > sc.limits.theta_max_rad) return out;

  auto snap_up = [&](double v) { return std::ceil(v / grid_step_m - 1e-12) * grid_step_m; };

  // Minimal-power schedule feasibility at a position, for one UAV's floor.
  auto power_ok = [&](const Position& q, int uav, std::vector<double>* schedule) {
    double energy = 0.0;
    std::vector<double> p(y.size());
    for (size_t n = 0; n < y.size(); ++n) {
      const double need = min_power_for_rate(sc.comm.rate_floor_bps[uav],
                                             slot_distance(q, y[n], sc.comm.gs_position_m),
                                             sc.comm, uav);
      if (need > sc.comm.max_power_w) return false;
      p[n] = need;
      energy += need * w;
    }
    if (energy > sc.comm.max_energy_j) return false;
    if (schedule) *schedule = std::move(p);
    return true;
  };

  struct SlaveCell {
    Position q;
    double b_perp;
    double range;
    bool steep;
    bool power_ok_as_s1;
    bool power_ok_as_s2;
  };

  // Master-independent filter pass over the slave lattice: altitude box,
  // look window, swath floor, spectral coherence floor, rate/energy floors.
  std::vector<SlaveCell> cells;
  {
    const double x_lo = snap_up(xt - sc.limits.z_max_m * std::tan(sc.limits.theta_max_rad));
    const double z_lo = snap_up(sc.limits.z_min_m);
    for (double z = z_lo; z <= sc.limits.z_max_m + 1e-9; z += grid_step_m) {
      for (double x = x_lo; x <= xt - sc.limits.z_min_m * std::tan(sc.limits.theta_min_rad) + 1e-9;
           x += grid_step_m) {
        const Position q(x, z);
        const double theta = look_angle(q, xt);
        if (theta < sc.limits.theta_min_rad || theta > sc.limits.theta_max_rad) continue;
        if (swath_width(q, xt, sc.radar.beamwidth_rad) < sc.limits.s_min_m) continue;
        if (baseline_decorrelation(q, xt, theta0, sc.radar) < sc.limits.gamma_rg_min) continue;
        const bool ok1 = power_ok(q, 1, nullptr);
        const bool ok2 = power_ok(q, 2, nullptr);
        if (!ok1 && !ok2) continue;
        cells.push_back({q, perpendicular_baseline(q, xt, theta0), slant_range(q, xt),
                         los_offset(q, xt, theta0) <= 0.0, ok1, ok2});
      }
    }
  }
  out.candidate_count = static_cast<long>(cells.size());

  const double z0_floor = sc.limits.s_min_m * cos0 * cos0 / sc.radar.beamwidth_rad;
  double best_bound = std::numeric_limits<double>::infinity();
  Position best_master{0.0, 1.0};
  Position best_s1{0.0, 1.0}, best_s2{0.0, 1.0};

  std::vector<const SlaveCell*> pool;
  for (double z0 = snap_up(std::max(sc.limits.z_min_m, z0_floor)); z0 <= sc.limits.z_max_m + 1e-9;
       z0 += grid_step_m) {
    const Position q0(los_locus_x(z0, xt, theta0), z0);
    if (!power_ok(q0, 0, nullptr)) continue;
    const double r0 = slant_range(q0, xt);
    const double b_cap = sc.radar.wavelength_m * r0 * std::sin(theta0) / sc.limits.h_amb_min_m;
    const double r_cap = c6_max_slave_range(r0, sc.radar, sc.limits.gamma_snr_min);

    // Top candidates per side, ranked by perpendicular baseline.
    std::vector<const SlaveCell*> steep, shallow;
    for (const SlaveCell& c : cells) {
      if (c.b_perp > b_cap || c.range > r_cap) continue;
      if (baseline(c.q, q0) < sc.limits.d_min_m) continue;
      (c.steep ? steep : shallow).push_back(&c);
    }
    auto by_baseline = [](const SlaveCell* a, const SlaveCell* b) {
      if (a->b_perp != b->b_perp) return a->b_perp > b->b_perp;
      if (a->q.z_m != b->q.z_m) return a->q.z_m < b->q.z_m;
      return a->q.x_m < b->q.x_m;
    };
    auto shrink = [&](std::vector<const SlaveCell*>& v) {
      const size_t keep = std::min(v.size(), static_cast<size_t>(top_k));
      std::partial_sort(v.begin(), v.begin() + static_cast<long>(keep), v.end(), by_baseline);
      v.resize(keep);
    };
    shrink(steep);
    shrink(shallow);
    pool.clear();
    pool.insert(pool.end(), steep.begin(), steep.end());
    pool.insert(pool.end(), shallow.begin(), shallow.end());

    for (size_t i = 0; i < pool.size(); ++i) {
      for (size_t j = i + 1; j < pool.size(); ++j) {
        if (baseline(pool[i]->q, pool[j]->q) < sc.limits.d_min_m) continue;
        const SlaveCell* s1 = nullptr;
        const SlaveCell* s2 = nullptr;
        if (pool[i]->power_ok_as_s1 && pool[j]->power_ok_as_s2) {
          s1 = pool[i];
          s2 = pool[j];
        } else if (pool[j]->power_ok_as_s1 && pool[i]->power_ok_as_s2) {
          s1 = pool[j];
          s2 = pool[i];
        } else {
          continue;
        }
        const double bound =
            worst_case_height_error(r0, theta0, s1->b_perp, s2->b_perp, sc.radar, sc.limits);
        if (bound < best_bound) {
          best_bound = bound;
          best_master = q0;
          best_s1 = s1->q;
          best_s2 = s2->q;
        }
      }
    }
  }

  if (!std::isfinite(best_bound)) return out;
  out.feasible = true;
  out.bound_m = best_bound;
  out.best.uavs = {best_master, best_s1, best_s2};
  out.best.powers_w.resize(3);
  power_ok(best_master, 0, &out.best.powers_w[0]);
  power_ok(best_s1, 1, &out.best.powers_w[1]);
  power_ok(best_s2, 2, &out.best.powers_w[2]);
  return out;
}

// Count of slave lattice cells passing the master-independent exact filter;
// used to check that tightening a constraint never enlarges the feasible
// grid.
inline long grid_feasible_cell_count(const Scenario& sc, double grid_step_m) {
  GridSearchResult r = grid_search_formation(sc, grid_step_m, 1);
  return r.candidate_count;
}

// Deterministic uniform draw helper for the oracle suites.
class UniformSampler {
 public:
  explicit UniformSampler(std::uint64_t seed) : rng_(seed) {}
  double operator()(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng_() >> 11) * 0x1.0p-53);
  }

 private:
  std::mt19937_64 rng_;
};

struct OracleCheck {
  std::string name;
  double value = 0.0;      // measured error or violation count
  double threshold = 0.0;  // pass when value <= threshold
  bool pass = false;
  std::string detail;
};

inline OracleCheck make_check(std::string name, double value, double threshold,
                              std::string detail = "") {
  OracleCheck c;
  c.name = std::move(name);
  c.value = value;
  c.threshold = threshold;
  c.pass = value <= threshold;
  c.detail = std::move(detail);
  return c;
}

// The swath of a beam-limited footprint has two algebraically identical
// forms (range over cosine vs squared range over altitude); both must agree
// to floating-point accuracy on random geometries.
inline OracleCheck check_swath_identity(const Scenario& sc, int samples, std::uint64_t seed) {
  UniformSampler u(seed);
  const double xt = sc.mission.target_x_m;
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Position q(u(xt - 140.0, xt - 0.5), u(1.0, 120.0));
    const double r = slant_range(q, xt);
    const double theta = look_angle(q, xt);
    const double form_a = sc.radar.beamwidth_rad * r / std::cos(theta);
    const double form_b = sc.radar.beamwidth_rad * r * r / q.z_m;
    worst = std::max(worst, std::abs(form_a / form_b - 1.0));
    worst = std::max(worst, std::abs(swath_width(q, xt, sc.radar.beamwidth_rad) / form_b - 1.0));
  }
  return make_check("swath_identity_rel_err", worst, 1e-9);
}

// Model-vs-bound dominance: on geometries meeting the coherence floors, the
// fused model error never exceeds the worst-case bound.
inline OracleCheck check_bound_dominance(const Scenario& sc, int samples, std::uint64_t seed) {
  UniformSampler u(seed);
  const double xt = sc.mission.target_x_m;
  int violations = 0;
  double worst_ratio = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double theta0 = u(sc.limits.theta_min_rad, sc.limits.theta_max_rad);
    const double r0 = u(40.0, 110.0);
    const Position master(xt - r0 * std::sin(theta0), r0 * std::cos(theta0));
    const double r_cap = 0.999 * c6_max_slave_range(r0, sc.radar, sc.limits.gamma_snr_min);
    if (r_cap < 10.0) continue;
    const double alpha_a = steep_angle_floor(theta0, sc.limits.gamma_rg_min, sc.radar);
    const auto alpha_b = shallow_angle_cap(theta0, sc.limits.gamma_rg_min, sc.radar);
    Position slaves[2] = {master, master};
    bool ok = true;
    for (int k = 0; k < 2; ++k) {
      const bool steep = u(0.0, 1.0) < 0.5;
      double theta;
      if (steep) {
        theta = u(alpha_a + 1e-4, theta0 - 2e-3);
      } else {
        const double hi = alpha_b ? std::min(*alpha_b - 1e-4, theta0 + 0.35) : theta0 + 0.35;
        theta = u(theta0 + 2e-3, hi);
      }
      if (!(theta > 0.0 && theta < M_PI_2)) {
        ok = false;
        break;
      }
      const double rk = u(10.0, std::min(r_cap, 200.0));
      slaves[k] = Position(xt - rk * std::sin(theta), rk * std::cos(theta));
    }
    if (!ok) continue;
    const SwarmFormation swarm{master, slaves[0], slaves[1]};
    const double sigma = fused_height_error_at(swarm, xt, theta0, sc.radar);
    const double bound =
        worst_case_height_error(r0, theta0, perpendicular_baseline(slaves[0], xt, theta0),
                                perpendicular_baseline(slaves[1], xt, theta0), sc.radar, sc.limits);
    worst_ratio = std::max(worst_ratio, sigma / bound);
    if (sigma > bound * (1.0 + 1e-12)) ++violations;
  }
  return make_check("bound_dominance_violations", violations, 0.0,
                    "worst sigma/bound ratio " + std::to_string(worst_ratio));
}

// The spectral-coherence floor and its per-branch linear angle form must
// agree everywhere away from the decision boundary.
inline OracleCheck check_branch_forms(const Scenario& sc, int samples_per_branch,
                                      std::uint64_t seed, double margin = 1e-6) {
  UniformSampler u(seed);
  const double xt = sc.mission.target_x_m;
  const double theta0 = sc.mission.master_look_angle_rad;
  const double alpha_a = steep_angle_floor(theta0, sc.limits.gamma_rg_min, sc.radar);
  const auto alpha_b = shallow_angle_cap(theta0, sc.limits.gamma_rg_min, sc.radar);
  int mismatches = 0;
  int tested = 0;
  for (int branch = 0; branch < 2; ++branch) {
    int accepted = 0;
    while (accepted < samples_per_branch) {
      const double theta = branch == 0 ? u(0.02, theta0) : u(theta0, 1.45);
      const double z = u(1.0, 100.0);
      const Position q(xt - z * std::tan(theta), z);
      const double gamma = baseline_decorrelation(q, xt, theta0, sc.radar);
      if (std::abs(gamma - sc.limits.gamma_rg_min) <= margin) continue;
      ++accepted;
      ++tested;
      const bool exact = gamma >= sc.limits.gamma_rg_min;
      bool linear;
      if (branch == 0) {
        linear = q.x_m + q.z_m * std::tan(alpha_a) <= xt;
      } else {
        linear = !alpha_b || q.x_m + q.z_m * std::tan(*alpha_b) >= xt;
      }
      if (exact != linear) ++mismatches;
    }
  }
  return make_check("branch_form_mismatches", mismatches, 0.0,
                    std::to_string(tested) + " positions tested");
}

// Round trip between the spectral coherence function and its inverse.
inline OracleCheck check_coherence_round_trip(const RadarConfig& radar, int grid_points) {
  double worst = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    const double lo = range_spectral_coherence(2.0 - 1e-9, radar.fractional_bandwidth) + 1e-6;
    const double gamma = lo + (1.0 - 2e-6 - lo) * i / static_cast<double>(grid_points - 1);
    const double back = range_spectral_coherence(inverse_baseline_decorrelation(gamma, radar),
                                                 radar.fractional_bandwidth);
    worst = std::max(worst, std::abs(back - gamma));
  }
  return make_check("coherence_round_trip_abs_err", worst, 1e-10);
}

// Product-form SNR approximation against the full bistatic link budget over
// small bistatic angles around the master's look angle.
inline OracleCheck check_bistatic_approx(const Scenario& sc, const RadarLinkBudget& budget,
                                         int samples, std::uint64_t seed,
                                         double max_offset_deg = 5.0) {
  UniformSampler u(seed);
  const double theta0 = sc.mission.master_look_angle_rad;
  const double alpha_a = steep_angle_floor(theta0, sc.limits.gamma_rg_min, sc.radar);
  const auto alpha_b = shallow_angle_cap(theta0, sc.limits.gamma_rg_min, sc.radar);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double offset = u(-max_offset_deg, max_offset_deg) * M_PI / 180.0;
    const double theta_k = theta0 + offset;
    if (theta_k < alpha_a) continue;  // outside the admissible steep window
    if (alpha_b && theta_k > *alpha_b) continue;
    BistaticGeometry geom;
    geom.tx_slant_range_m = u(40.0, 130.0);
    geom.rx_slant_range_m = u(20.0, 200.0);
    geom.tx_incidence_rad = theta0;
    geom.rx_incidence_rad = theta_k;
    geom.aperture_length_m = 1.0;
    const double exact = bistatic_snr_exact(geom, budget);
    const double approx =
        bistatic_snr_approx(geom.tx_slant_range_m, geom.rx_slant_range_m, sc.radar);
    worst = std::max(worst, std::abs(approx / exact - 1.0));
  }
  return make_check("bistatic_approx_rel_err", worst, 0.05);
}

// Monte Carlo phase noise against the analytic multilook deviation.
inline OracleCheck check_mc_phase_std(double coherence, int looks, int samples,
                                      std::uint64_t seed) {
  const double mc = simulate_phase_std(coherence, looks, samples, seed);
  const double model = crb_phase_std(coherence, looks);
  char name[96];
  std::snprintf(name, sizeof(name), "mc_phase_std_gamma%.2f_looks%d", coherence, looks);
  return make_check(name, std::abs(mc / model - 1.0), 0.05,
                    "mc " + std::to_string(mc) + " model " + std::to_string(model));
}

// Monte Carlo fused error against the inverse-variance prediction built from
// the empirical pair deviations.
inline OracleCheck check_mc_fused(double hoa1_m, double gamma1, double hoa2_m, double gamma2,
                                  int looks, int samples, std::uint64_t seed) {
  const FusedSimulation sim =
      simulate_fused_height_error(hoa1_m, gamma1, hoa2_m, gamma2, looks, samples, seed);
  char name[96];
  std::snprintf(name, sizeof(name), "mc_fused_hoa%.2f_%.2f_looks%d", hoa1_m, hoa2_m, looks);
  return make_check(name, std::abs(sim.fused_std_m / sim.predicted_from_pairs_m - 1.0), 0.03,
                    "fused " + std::to_string(sim.fused_std_m) + " predicted " +
                        std::to_string(sim.predicted_from_pairs_m));
}

}  // namespace insaropt
