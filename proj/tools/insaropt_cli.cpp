// Command-line harness for the swarm formation optimizer: single runs,
// parameter sweeps, the analytic/Monte Carlo validation suite, and exact
// constraint audits of saved results.

#include <clocale>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "insaropt/benchmarks.hpp"
#include "insaropt/experiment.hpp"
#include "insaropt/validation.hpp"

namespace {

using namespace insaropt;

std::vector<Scheme> parse_scheme_list(const std::string& text) {
  std::vector<Scheme> out;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t comma = text.find(',', pos);
    const std::string token =
        detail::trim(text.substr(pos, comma == std::string::npos ? comma : comma - pos));
    if (!token.empty()) {
      const auto s = parse_scheme(token);
      if (!s) throw std::runtime_error("unknown scheme '" + token + "'");
      out.push_back(*s);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw std::runtime_error("scheme list is empty");
  return out;
}

struct SweepSpec {
  std::string key;
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;
};

SweepSpec parse_sweep_spec(const std::string& text) {
  const size_t eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::runtime_error("sweep spec must look like KEY=START:STOP:STEP");
  SweepSpec spec;
  spec.key = detail::trim(text.substr(0, eq));
  const std::string rest = text.substr(eq + 1);
  const size_t c1 = rest.find(':');
  const size_t c2 = c1 == std::string::npos ? std::string::npos : rest.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw std::runtime_error("sweep spec must look like KEY=START:STOP:STEP");
  spec.start = detail::parse_number(rest.substr(0, c1), "sweep start");
  spec.stop = detail::parse_number(rest.substr(c1 + 1, c2 - c1 - 1), "sweep stop");
  spec.step = detail::parse_number(rest.substr(c2 + 1), "sweep step");
  return spec;
}

RawExperimentConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return RawExperimentConfig{};
  return load_config_file(path);
}

void print_row(const SweepRow& row, const std::string& prefix) {
  std::cout << prefix << to_string(row.scheme) << ": ";
  if (row.feasible) {
    std::cout << "feasible sigma_h=" << format_double(row.sigma_h_m)
              << " m bound=" << format_double(row.sigma_h_bound_m)
              << " m iterations=" << row.iterations;
  } else {
    std::cout << "infeasible";
    if (!row.note.empty()) std::cout << " (" << row.note << ")";
  }
  std::cout << " [" << format_double(row.wall_time_s) << " s]\n";
}

void write_traces(const SweepTable& table, const std::string& dir, bool per_value) {
  if (per_value) std::filesystem::create_directories(dir + "/traces");
  for (const SweepRow& row : table.rows) {
    const std::string name =
        per_value ? dir + "/traces/trace_" + std::string(to_string(row.scheme)) + "_" +
                        format_double(row.value) + ".jsonl"
                  : dir + "/trace_" + std::string(to_string(row.scheme)) + ".jsonl";
    write_text_file(name, trace_jsonl_text(row.result.trace));
  }
}

std::string grid_oracle_csv(const RawExperimentConfig& base, const std::string& key,
                            const std::vector<double>& values, double step) {
  std::string out = "sweep_value,feasible,bound_m\n";
  for (double v : values) {
    RawExperimentConfig cfg = base;
    if (!key.empty()) apply_config_key(cfg, key, v);
    const ResolvedExperiment exp = resolve_experiment(cfg);
    const GridSearchResult res = grid_search_formation(exp.scenario, step);
    out += format_double(v);
    out += res.feasible ? ",true," + format_double(res.bound_m) : ",false,";
    out += "\n";
  }
  return out;
}

int finish_table(const SweepTable& table) {
  bool any_feasible = false;
  for (const SweepRow& row : table.rows) any_feasible = any_feasible || row.feasible;
  return any_feasible ? 0 : 2;
}

int cmd_run(const std::string& config_path, const std::string& schemes_text, std::uint64_t seed,
            const std::string& out_dir, std::optional<double> grid_step) {
  const RawExperimentConfig base = load_config_or_default(config_path);
  const ResolvedExperiment exp = resolve_experiment(base);
  const std::vector<Scheme> schemes = parse_scheme_list(schemes_text);
  std::filesystem::create_directories(out_dir);

  SweepTable table;
  table.key = "";
  for (Scheme s : schemes) table.rows.push_back(evaluate_point(base, "", 0.0, s));

  for (const SweepRow& row : table.rows) {
    print_row(row, "");
    write_text_file(out_dir + "/result_" + std::string(to_string(row.scheme)) + ".json",
                    result_to_json(row.result, row.scheme).dump(2) + "\n");
  }
  write_traces(table, out_dir, false);
  write_text_file(out_dir + "/run_summary.csv", sweep_csv_text(table));
  write_text_file(out_dir + "/run_metadata.json",
                  metadata_json(exp, seed, schemes, "", {}).dump(2) + "\n");

  if (grid_step) {
    write_text_file(out_dir + "/grid_oracle.csv", grid_oracle_csv(base, "", {0.0}, *grid_step));
    const GridSearchResult res = grid_search_formation(exp.scenario, *grid_step);
    std::cout << "grid oracle (step " << format_double(*grid_step) << " m): "
              << (res.feasible ? "bound " + format_double(res.bound_m) + " m" : "infeasible")
              << "\n";
  }
  std::cout << "outputs written to " << out_dir << "\n";
  return finish_table(table);
}

int cmd_sweep(const std::string& config_path, const std::string& sweep_text,
              const std::string& schemes_text, std::uint64_t seed, const std::string& out_dir,
              std::optional<double> grid_step) {
  const RawExperimentConfig base = load_config_or_default(config_path);
  const SweepSpec spec = parse_sweep_spec(sweep_text);
  if (!is_config_key(spec.key)) throw std::runtime_error("unknown config key '" + spec.key + "'");
  const std::vector<double> values = make_sweep_values(spec.start, spec.stop, spec.step);
  const std::vector<Scheme> schemes = parse_scheme_list(schemes_text);
  const ResolvedExperiment exp = resolve_experiment(base);
  std::filesystem::create_directories(out_dir);

  const SweepTable table = run_sweep(base, spec.key, values, schemes);
  write_sweep_outputs(table, out_dir);
  write_traces(table, out_dir, true);
  write_text_file(out_dir + "/run_metadata.json",
                  metadata_json(exp, seed, schemes, spec.key, values).dump(2) + "\n");
  if (grid_step)
    write_text_file(out_dir + "/grid_oracle.csv",
                    grid_oracle_csv(base, spec.key, values, *grid_step));

  int feasible_rows = 0;
  for (const SweepRow& row : table.rows) feasible_rows += row.feasible ? 1 : 0;
  for (const SweepRow& row : table.rows)
    print_row(row, spec.key + "=" + format_double(row.value) + " ");
  std::cout << "sweep over " << spec.key << ": " << table.rows.size() << " rows, "
            << feasible_rows << " feasible; outputs written to " << out_dir << "\n";
  return finish_table(table);
}

int cmd_validate(const std::string& config_path, std::uint64_t seed, const std::string& out_dir,
                 std::optional<double> grid_step) {
  const RawExperimentConfig raw = load_config_or_default(config_path);
  const ResolvedExperiment exp = resolve_experiment(raw);
  const Scenario& sc = exp.scenario;

  std::vector<OracleCheck> checks;
  checks.push_back(check_swath_identity(sc, 1000, seed));
  checks.push_back(check_bound_dominance(sc, 10000, seed + 1));
  checks.push_back(check_branch_forms(sc, 10000, seed + 2));
  checks.push_back(check_coherence_round_trip(sc.radar, 1000));
  {
    // The product-form approximation is compared against the full link
    // budget, so the radar constant must come from that same budget.
    Scenario consistent = sc;
    const RadarLinkBudget budget = link_budget_from_config(raw);
    consistent.radar.radar_constant_m3 =
        radar_constant_from_budget(budget, sc.mission.master_look_angle_rad);
    checks.push_back(check_bistatic_approx(consistent, budget, 10000, seed + 3));
  }
  checks.push_back(check_mc_phase_std(0.95, sc.radar.looks, 100000, seed + 4));
  checks.push_back(check_mc_phase_std(0.95, 16, 100000, seed + 5));
  checks.push_back(check_mc_fused(8.88, 0.95, 4.44, 0.90, sc.radar.looks, 100000, seed + 6));

  if (grid_step) {
    const AoResult ao = run_scheme(sc, Scheme::proposed, exp.ao, exp.scheme_options);
    const GridSearchResult grid = grid_search_formation(sc, *grid_step);
    OracleCheck c;
    c.name = "ao_vs_grid_rel_gap";
    if (ao.feasible && grid.feasible) {
      c.value = ao.bound_m / grid.bound_m - 1.0;
      c.threshold = 0.05;
      // The lattice only samples the continuous feasible set: near the
      // ambiguity cap its best cell gives up O(step) of baseline, so the
      // solver may legitimately undercut it by a step-scaled margin.
      const double undercut = 1e-3 + 0.02 * (*grid_step / 0.5);
      c.pass = c.value <= 0.05 && c.value >= -undercut;
      c.detail = "ao " + format_double(ao.bound_m) + " grid " + format_double(grid.bound_m);
    } else {
      c.value = 1.0;
      c.threshold = 0.0;
      c.pass = false;
      c.detail = ao.feasible ? "grid search infeasible" : "optimizer infeasible";
    }
    checks.push_back(c);
  }

  std::filesystem::create_directories(out_dir);
  std::string csv = "check,value,threshold,pass,detail\n";
  bool all_pass = true;
  for (const OracleCheck& c : checks) {
    all_pass = all_pass && c.pass;
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << format_double(c.value)
              << " threshold=" << format_double(c.threshold);
    if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
    std::cout << "\n";
    std::string detail = c.detail;
    for (char& ch : detail)
      if (ch == ',') ch = ';';
    csv += std::string(c.name) + "," + format_double(c.value) + "," + format_double(c.threshold) +
           "," + (c.pass ? "true" : "false") + "," + detail + "\n";
  }
  write_text_file(out_dir + "/validation_report.csv", csv);
  std::cout << (all_pass ? "all checks passed" : "some checks failed") << "\n";
  return all_pass ? 0 : 1;
}

int cmd_audit(const std::string& result_path, const std::string& config_path) {
  std::ifstream in(result_path);
  if (!in) throw std::runtime_error("cannot read '" + result_path + "'");
  const nlohmann::json j = nlohmann::json::parse(in);
  if (!j.value("feasible", false))
    throw std::runtime_error("result is marked infeasible; nothing to audit");
  const SwarmState state = state_from_json(j);
  const RawExperimentConfig raw = load_config_or_default(config_path);
  const ResolvedExperiment exp = resolve_experiment(raw);

  const ConstraintAudit audit = audit_constraints(exp.scenario, state);
  for (const AuditEntry& e : audit.entries)
    std::cout << (e.slack >= -1e-8 ? "ok   " : "VIOL ") << e.name << " slack "
              << format_double(e.slack) << "\n";
  std::cout << "min slack " << format_double(audit.min_slack) << " at " << audit.argmin << "\n";
  if (audit.feasible(1e-8)) {
    std::cout << "audit passed\n";
    return 0;
  }
  std::cout << "audit failed\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_NUMERIC, "C");
  CLI::App app{"dual-baseline swarm interferometry planner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string schemes_text = "proposed,bench1,bench2,bench3";
  std::string sweep_text;
  std::string out_dir = ".";
  std::string result_path;
  std::uint64_t seed = 1;
  double grid_step = 0.0;
  bool grid_given = false;

  auto add_common = [&](CLI::App* sub, bool with_schemes) {
    sub->add_option("--config", config_path, "config file with key=value lines");
    if (with_schemes)
      sub->add_option("--schemes", schemes_text, "comma-separated scheme list")
          ->capture_default_str();
    sub->add_option("--seed", seed, "random seed")->capture_default_str();
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option_function<double>(
           "--grid-oracle",
           [&](double v) {
             grid_step = v;
             grid_given = true;
           },
           "also run the exhaustive lattice search with this step in meters");
  };

  CLI::App* run = app.add_subcommand("run", "optimize each scheme at the configured point");
  add_common(run, true);
  CLI::App* sweep = app.add_subcommand("sweep", "sweep one config key across a range");
  add_common(sweep, true);
  sweep->add_option("--sweep", sweep_text, "KEY=START:STOP:STEP")->required();
  CLI::App* validate = app.add_subcommand("validate", "run the model validation suite");
  add_common(validate, false);
  CLI::App* audit = app.add_subcommand("audit", "recheck a saved result against all constraints");
  audit->add_option("result", result_path, "result json produced by run")->required();
  audit->add_option("--config", config_path, "config file with key=value lines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const std::optional<double> grid = grid_given ? std::optional<double>(grid_step) : std::nullopt;
  try {
    if (run->parsed()) return cmd_run(config_path, schemes_text, seed, out_dir, grid);
    if (sweep->parsed()) return cmd_sweep(config_path, sweep_text, schemes_text, seed, out_dir, grid);
    if (validate->parsed()) return cmd_validate(config_path, seed, out_dir, grid);
    if (audit->parsed()) return cmd_audit(result_path, config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
