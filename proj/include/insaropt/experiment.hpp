#pragma once

// Experiment harness: flat key=value configuration with units encoded in the
// key names (every dB or degree quantity is converted exactly once, at
// resolution), sweep orchestration over any numeric key, and deterministic
// result persistence (CSV tables, JSONL optimizer traces, a JSON metadata
// record of every resolved value).

#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "insaropt/benchmarks.hpp"
#include "insaropt/sca_optimizer.hpp"

namespace insaropt {

// Raw configuration exactly as written in a config file. Defaults are the
// shipped mission baseline (configs/table1.cfg mirrors them).
struct RawExperimentConfig {
  // mission
  double n_slots = 80;
  double slot_duration_s = 1.0;
  double velocity_mps = 4.3;
  double target_x_m = 20.0;
  double master_look_angle_deg = 45.0;
  // radar link budget
  double wavelength_m = 0.12;
  double center_frequency_hz = 2.5e9;
  double pulse_bandwidth_hz = 3e9;
  double fractional_bandwidth = 1.2;
  double looks = 4;
  double other_coherence = 0.6;
  double beamwidth_deg = 33.44;
  double sigma0_db = -10.0;
  double tx_power_dbm = 26.02;
  double tx_gain_dbi = 5.0;
  double rx_gain_dbi = 5.0;
  double duty_product = 1e-4;
  double system_temperature_k = 400.0;
  double noise_figure_db = 5.0;
  double losses_db = 6.0;
  double radar_constant_m3 = 0.0;  // 0: derive from the link budget above
  // constraint limits
  double z_min_m = 1.0;
  double z_max_m = 100.0;
  double theta_min_deg = 37.24;
  double theta_max_deg = 48.7;
  double d_min_m = 1.5;
  double s_min_m = 55.0;
  double gamma_snr_min = 0.8;
  double gamma_rg_min = 0.8;
  double h_amb_min_m = 1.2;
  // communication
  double gs_x_m = 70.0;
  double gs_y_m = 149.37;
  double gs_z_m = 25.0;
  double bandwidth_ghz = 1.0;
  double r_min0_mbps = 10.0;
  double r_min1_mbps = 16.95;
  double r_min2_mbps = 1.0;
  double p_com_max_dbw = 10.1;
  double e_com_max_j = 594.0;
  double gs_gain_over_noise_db = 18.69;
  double energy_includes_slot_duration = 0;
  // optimizer
  double ao_max_iterations = 30;
  double ao_epsilon_m = 1e-2;
  double ao_sequential_updates = 0;
  double ao_allow_infeasible_start = 0;
  double power_headroom = 1.1;
  // fixed-master benchmark
  double bench2_q0_x_m = -54.0;
  double bench2_q0_z_m = 74.0;
  double bench2_p_com_max_dbw = std::numeric_limits<double>::quiet_NaN();  // NaN: inherit
};

inline const std::map<std::string, double RawExperimentConfig::*>& config_key_table() {
  static const std::map<std::string, double RawExperimentConfig::*> table = {
      {"n_slots", &RawExperimentConfig::n_slots},
      {"slot_duration_s", &RawExperimentConfig::slot_duration_s},
      {"velocity_mps", &RawExperimentConfig::velocity_mps},
      {"target_x_m", &RawExperimentConfig::target_x_m},
      {"master_look_angle_deg", &RawExperimentConfig::master_look_angle_deg},
      {"wavelength_m", &RawExperimentConfig::wavelength_m},
      {"center_frequency_hz", &RawExperimentConfig::center_frequency_hz},
      {"pulse_bandwidth_hz", &RawExperimentConfig::pulse_bandwidth_hz},
      {"fractional_bandwidth", &RawExperimentConfig::fractional_bandwidth},
      {"looks", &RawExperimentConfig::looks},
      {"other_coherence", &RawExperimentConfig::other_coherence},
      {"beamwidth_deg", &RawExperimentConfig::beamwidth_deg},
      {"sigma0_db", &RawExperimentConfig::sigma0_db},
      {"tx_power_dbm", &RawExperimentConfig::tx_power_dbm},
      {"tx_gain_dbi", &RawExperimentConfig::tx_gain_dbi},
      {"rx_gain_dbi", &RawExperimentConfig::rx_gain_dbi},
      {"duty_product", &RawExperimentConfig::duty_product},
      {"system_temperature_k", &RawExperimentConfig::system_temperature_k},
      {"noise_figure_db", &RawExperimentConfig::noise_figure_db},
      {"losses_db", &RawExperimentConfig::losses_db},
      {"radar_constant_m3", &RawExperimentConfig::radar_constant_m3},
      {"z_min_m", &RawExperimentConfig::z_min_m},
      {"z_max_m", &RawExperimentConfig::z_max_m},
      {"theta_min_deg", &RawExperimentConfig::theta_min_deg},
      {"theta_max_deg", &RawExperimentConfig::theta_max_deg},
      {"d_min_m", &RawExperimentConfig::d_min_m},
      {"s_min_m", &RawExperimentConfig::s_min_m},
      {"gamma_snr_min", &RawExperimentConfig::gamma_snr_min},
      {"gamma_rg_min", &RawExperimentConfig::gamma_rg_min},
      {"h_amb_min_m", &RawExperimentConfig::h_amb_min_m},
      {"gs_x_m", &RawExperimentConfig::gs_x_m},
      {"gs_y_m", &RawExperimentConfig::gs_y_m},
      {"gs_z_m", &RawExperimentConfig::gs_z_m},
      {"bandwidth_ghz", &RawExperimentConfig::bandwidth_ghz},
      {"r_min0_mbps", &RawExperimentConfig::r_min0_mbps},
      {"r_min1_mbps", &RawExperimentConfig::r_min1_mbps},
      {"r_min2_mbps", &RawExperimentConfig::r_min2_mbps},
      {"p_com_max_dbw", &RawExperimentConfig::p_com_max_dbw},
      {"e_com_max_j", &RawExperimentConfig::e_com_max_j},
      {"gs_gain_over_noise_db", &RawExperimentConfig::gs_gain_over_noise_db},
      {"energy_includes_slot_duration", &RawExperimentConfig::energy_includes_slot_duration},
      {"ao_max_iterations", &RawExperimentConfig::ao_max_iterations},
      {"ao_epsilon_m", &RawExperimentConfig::ao_epsilon_m},
      {"ao_sequential_updates", &RawExperimentConfig::ao_sequential_updates},
      {"ao_allow_infeasible_start", &RawExperimentConfig::ao_allow_infeasible_start},
      {"power_headroom", &RawExperimentConfig::power_headroom},
      {"bench2_q0_x_m", &RawExperimentConfig::bench2_q0_x_m},
      {"bench2_q0_z_m", &RawExperimentConfig::bench2_q0_z_m},
      {"bench2_p_com_max_dbw", &RawExperimentConfig::bench2_p_com_max_dbw},
  };
  return table;
}

inline bool is_config_key(const std::string& key) {
  return config_key_table().count(key) > 0;
}

inline void apply_config_key(RawExperimentConfig& cfg, const std::string& key, double value) {
  auto it = config_key_table().find(key);
  if (it == config_key_table().end())
    throw std::runtime_error("unknown config key '" + key + "'");
  cfg.*(it->second) = value;
}

namespace detail {

inline std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline double parse_number(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  if (t.empty()) throw std::runtime_error(where + ": empty value");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) throw std::runtime_error(where + ": cannot parse '" + t + "'");
  return v;
}

inline int checked_int(double v, const std::string& name) {
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-9 || r < 0)
    throw std::runtime_error("config value " + name + " must be a nonnegative integer");
  return static_cast<int>(r);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace detail

inline RawExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  RawExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    const std::string where = path + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw std::runtime_error(where + ": expected key = value");
    const std::string key = detail::trim(t.substr(0, eq));
    try {
      apply_config_key(cfg, key, detail::parse_number(t.substr(eq + 1), where));
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(where + ": " + e.what());
    }
  }
  return cfg;
}

inline RadarLinkBudget link_budget_from_config(const RawExperimentConfig& raw) {
  RadarLinkBudget budget;
  budget.sigma0 = detail::db_to_linear(raw.sigma0_db);
  budget.tx_power_w = detail::db_to_linear(raw.tx_power_dbm - 30.0);
  budget.tx_gain = detail::db_to_linear(raw.tx_gain_dbi);
  budget.rx_gain = detail::db_to_linear(raw.rx_gain_dbi);
  budget.wavelength_m = raw.wavelength_m;
  budget.pulse_bandwidth_hz = raw.pulse_bandwidth_hz;
  budget.duty_product = raw.duty_product;
  budget.velocity_mps = raw.velocity_mps;
  budget.system_temperature_k = raw.system_temperature_k;
  budget.noise_figure = detail::db_to_linear(raw.noise_figure_db);
  budget.losses = detail::db_to_linear(raw.losses_db);
  return budget;
}

// Fully resolved experiment: SI-unit scenario plus scheme and optimizer
// options, with a metadata record of every raw and derived value.
struct ResolvedExperiment {
  Scenario scenario;
  SchemeOptions scheme_options;
  AoOptions ao;
  std::map<std::string, double> metadata;
};

inline ResolvedExperiment resolve_experiment(const RawExperimentConfig& raw) {
  ResolvedExperiment out;
  Scenario& sc = out.scenario;

  sc.mission.n_slots = detail::checked_int(raw.n_slots, "n_slots");
  sc.mission.slot_duration_s = raw.slot_duration_s;
  sc.mission.velocity_mps = raw.velocity_mps;
  sc.mission.target_x_m = raw.target_x_m;
  sc.mission.master_look_angle_rad = raw.master_look_angle_deg * M_PI / 180.0;

  sc.radar.wavelength_m = raw.wavelength_m;
  sc.radar.center_frequency_hz = raw.center_frequency_hz;
  sc.radar.pulse_bandwidth_hz = raw.pulse_bandwidth_hz;
  sc.radar.fractional_bandwidth = raw.fractional_bandwidth;
  sc.radar.looks = detail::checked_int(raw.looks, "looks");
  sc.radar.other_coherence = raw.other_coherence;
  sc.radar.beamwidth_rad = raw.beamwidth_deg * M_PI / 180.0;
  if (raw.radar_constant_m3 > 0.0) {
    sc.radar.radar_constant_m3 = raw.radar_constant_m3;
  } else {
    sc.radar.radar_constant_m3 = radar_constant_from_budget(link_budget_from_config(raw),
                                                            sc.mission.master_look_angle_rad);
  }

  sc.limits.z_min_m = raw.z_min_m;
  sc.limits.z_max_m = raw.z_max_m;
  sc.limits.theta_min_rad = raw.theta_min_deg * M_PI / 180.0;
  sc.limits.theta_max_rad = raw.theta_max_deg * M_PI / 180.0;
  sc.limits.d_min_m = raw.d_min_m;
  sc.limits.s_min_m = raw.s_min_m;
  sc.limits.gamma_snr_min = raw.gamma_snr_min;
  sc.limits.gamma_rg_min = raw.gamma_rg_min;
  sc.limits.h_amb_min_m = raw.h_amb_min_m;

  sc.comm.gs_position_m = {raw.gs_x_m, raw.gs_y_m, raw.gs_z_m};
  const double beta = detail::db_to_linear(raw.gs_gain_over_noise_db);
  const double bandwidth_hz = raw.bandwidth_ghz * 1e9;
  const double rates[3] = {raw.r_min0_mbps, raw.r_min1_mbps, raw.r_min2_mbps};
  for (int k = 0; k < kUavCount; ++k) {
    sc.comm.bandwidth_hz[k] = bandwidth_hz;
    sc.comm.ref_gain_over_noise[k] = beta;
    sc.comm.rate_floor_bps[k] = rates[k] * 1e6;
  }
  sc.comm.max_power_w = detail::db_to_linear(raw.p_com_max_dbw);
  sc.comm.max_energy_j = raw.e_com_max_j;
  sc.comm.energy_includes_slot_duration = raw.energy_includes_slot_duration != 0;

  out.ao.max_iterations = detail::checked_int(raw.ao_max_iterations, "ao_max_iterations");
  out.ao.epsilon_m = raw.ao_epsilon_m;
  out.ao.sequential_updates = raw.ao_sequential_updates != 0;
  out.ao.allow_infeasible_start = raw.ao_allow_infeasible_start != 0;
  out.ao.power_headroom = raw.power_headroom;

  out.scheme_options.bench2_master = Position(raw.bench2_q0_x_m, raw.bench2_q0_z_m);
  if (!std::isnan(raw.bench2_p_com_max_dbw))
    out.scheme_options.bench2_max_power_w = detail::db_to_linear(raw.bench2_p_com_max_dbw);

  sc.validate();

  for (const auto& [key, member] : config_key_table()) out.metadata[key] = raw.*member;
  out.metadata["derived_theta0_rad"] = sc.mission.master_look_angle_rad;
  out.metadata["derived_beamwidth_rad"] = sc.radar.beamwidth_rad;
  out.metadata["derived_radar_constant_m3"] = sc.radar.radar_constant_m3;
  out.metadata["derived_gs_gain_over_noise_linear"] = beta;
  out.metadata["derived_p_com_max_w"] = sc.comm.max_power_w;
  out.metadata["derived_static_power_w"] = uniform_static_power(sc);
  out.metadata["derived_bench2_p_com_max_w"] =
      out.scheme_options.bench2_max_power_w.value_or(sc.comm.max_power_w);
  return out;
}

// Inclusive arithmetic progression; throws unless strictly monotone.
inline std::vector<double> make_sweep_values(double start, double stop, double step) {
  if (step == 0.0 || (stop - start) * step < 0.0)
    throw std::runtime_error("sweep: step must move start toward stop");
  std::vector<double> values;
  const double span = std::abs(stop - start);
  const int count = static_cast<int>(std::floor(span / std::abs(step) + 1e-9)) + 1;
  for (int i = 0; i < count; ++i) values.push_back(start + i * step);
  return values;
}

struct SweepRow {
  double value = 0.0;
  Scheme scheme = Scheme::proposed;
  bool feasible = false;
  double sigma_h_m = std::numeric_limits<double>::quiet_NaN();
  double sigma_h_bound_m = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double wall_time_s = 0.0;
  std::string note;
  AoResult result;
};

struct SweepTable {
  std::string key;  // empty for a plain (single-point) run
  std::vector<SweepRow> rows;
};

inline SweepRow evaluate_point(const RawExperimentConfig& base, const std::string& key,
                               double value, Scheme scheme) {
  SweepRow row;
  row.value = value;
  row.scheme = scheme;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    RawExperimentConfig cfg = base;
    if (!key.empty()) apply_config_key(cfg, key, value);
    const ResolvedExperiment exp = resolve_experiment(cfg);
    row.result = run_scheme(exp.scenario, scheme, exp.ao, exp.scheme_options);
    row.feasible = row.result.feasible;
    if (row.feasible) {
      row.sigma_h_m = row.result.sigma_h_m;
      row.sigma_h_bound_m = row.result.bound_m;
      row.iterations = row.result.iterations;
    } else {
      row.note = row.result.infeasibility_reason;
    }
  } catch (const std::exception& e) {
    row.feasible = false;
    row.note = e.what();
  }
  row.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

// Evaluate all (value, scheme) points on a small worker pool. Rows are
// stored by index, so the output order never depends on scheduling.
inline SweepTable run_sweep(const RawExperimentConfig& base, const std::string& key,
                            const std::vector<double>& values, const std::vector<Scheme>& schemes,
                            int threads = 0) {
  if (!key.empty() && !is_config_key(key))
    throw std::runtime_error("sweep: unrecognized config key '" + key + "'");
  for (size_t i = 1; i < values.size(); ++i)
    if (values[i] <= values[i - 1]) throw std::runtime_error("sweep: values must increase");

  SweepTable table;
  table.key = key;
  table.rows.resize(values.size() * schemes.size());
  std::atomic<size_t> next{0};
  const size_t total = table.rows.size();
  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1)) {
      const size_t vi = i / schemes.size();
      const size_t si = i % schemes.size();
      table.rows[i] = evaluate_point(base, key, values[vi], schemes[si]);
    }
  };
  unsigned n = threads > 0 ? static_cast<unsigned>(threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(total));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return table;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline const char* kSweepCsvHeader = "sweep_value,scheme,feasible,sigma_h_m,sigma_h_bound_m";

inline std::string sweep_csv_text(const SweepTable& table,
                                  std::optional<Scheme> only = std::nullopt) {
  std::string out = kSweepCsvHeader;
  out += "\n";
  for (const SweepRow& row : table.rows) {
    if (only && row.scheme != *only) continue;
    out += format_double(row.value);
    out += ",";
    out += to_string(row.scheme);
    out += row.feasible ? ",true," : ",false,";
    if (row.feasible) {
      out += format_double(row.sigma_h_m);
      out += ",";
      out += format_double(row.sigma_h_bound_m);
    } else {
      out += ",";  // empty sigma cells, not zeros
    }
    out += "\n";
  }
  return out;
}

struct ParsedSweepRow {
  double value;
  std::string scheme;
  bool feasible;
  std::optional<double> sigma_h_m;
  std::optional<double> sigma_h_bound_m;
};

inline std::vector<ParsedSweepRow> parse_sweep_csv(const std::string& text) {
  std::vector<ParsedSweepRow> rows;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kSweepCsvHeader)
    throw std::runtime_error("sweep csv: bad header");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    size_t pos = 0;
    while (true) {
      const size_t comma = line.find(',', pos);
      cells.push_back(line.substr(pos, comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (cells.size() != 5)
      throw std::runtime_error("sweep csv line " + std::to_string(line_no) + ": want 5 cells");
    ParsedSweepRow row;
    row.value = detail::parse_number(cells[0], "sweep csv");
    row.scheme = cells[1];
    if (cells[2] == "true")
      row.feasible = true;
    else if (cells[2] == "false")
      row.feasible = false;
    else
      throw std::runtime_error("sweep csv line " + std::to_string(line_no) + ": bad flag");
    if (!cells[3].empty()) row.sigma_h_m = detail::parse_number(cells[3], "sweep csv");
    if (!cells[4].empty()) row.sigma_h_bound_m = detail::parse_number(cells[4], "sweep csv");
    rows.push_back(row);
  }
  return rows;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// Combined long-format CSV plus one CSV per scheme present in the table.
inline void write_sweep_outputs(const SweepTable& table, const std::string& dir) {
  write_text_file(dir + "/sweep.csv", sweep_csv_text(table));
  std::vector<Scheme> seen;
  for (const SweepRow& row : table.rows)
    if (std::find(seen.begin(), seen.end(), row.scheme) == seen.end()) seen.push_back(row.scheme);
  for (Scheme s : seen)
    write_text_file(dir + "/sweep_" + std::string(to_string(s)) + ".csv",
                    sweep_csv_text(table, s));
}

inline std::string trace_jsonl_text(const std::vector<ScaTraceEntry>& trace) {
  std::string out;
  for (const ScaTraceEntry& e : trace) {
    nlohmann::json j;
    j["phase"] = e.phase;
    j["iteration"] = e.iteration;
    j["bound"] = e.bound_m;
    j["sigma_h"] = e.sigma_h_m;
    j["branch"] = e.branch;
    j["solver_status"] = e.solver_status;
    j["max_constraint_violation"] = e.max_constraint_violation;
    out += j.dump();
    out += "\n";
  }
  return out;
}

inline nlohmann::json result_to_json(const AoResult& r, Scheme scheme) {
  nlohmann::json j;
  j["scheme"] = to_string(scheme);
  j["feasible"] = r.feasible;
  j["infeasibility_reason"] = r.infeasibility_reason;
  j["sigma_h_m"] = r.sigma_h_m;
  j["sigma_h_bound_m"] = r.bound_m;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["positions"] = nlohmann::json::array();
  j["powers_w"] = nlohmann::json::array();
  if (r.feasible) {
    for (const Position& q : r.state.uavs) j["positions"].push_back({q.x_m, q.z_m});
    for (const auto& p : r.state.powers_w) j["powers_w"].push_back(p);
    j["audit_min_slack"] = r.final_audit.min_slack;
    j["audit_argmin"] = r.final_audit.argmin;
  }
  return j;
}

inline SwarmState state_from_json(const nlohmann::json& j) {
  SwarmState state;
  for (const auto& q : j.at("positions"))
    state.uavs.push_back(Position(q.at(0).get<double>(), q.at(1).get<double>()));
  for (const auto& p : j.at("powers_w")) state.powers_w.push_back(p.get<std::vector<double>>());
  return state;
}

inline nlohmann::json metadata_json(const ResolvedExperiment& exp, std::uint64_t seed,
                                    const std::vector<Scheme>& schemes, const std::string& sweep_key,
                                    const std::vector<double>& sweep_values) {
  nlohmann::json j;
  j["config"] = exp.metadata;
  j["seed"] = seed;
  j["rng"] = "mt19937_64 with fixed Box-Muller transform";
  j["schemes"] = nlohmann::json::array();
  for (Scheme s : schemes) j["schemes"].push_back(to_string(s));
  j["sweep_key"] = sweep_key;
  j["sweep_values"] = sweep_values;
  j["warnings"] = exp.scenario.radar.consistency_warnings();
  return j;
}

}  // namespace insaropt
