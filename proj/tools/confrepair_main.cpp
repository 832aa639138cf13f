// Command-line frontend: repair, baseline, simulate and experiment commands
// over the parameter-space / configuration / building / passenger-file
// formats documented in the README.

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "confrepair/decision_maker.hpp"
#include "confrepair/experiment.hpp"
#include "confrepair/io.hpp"
#include "confrepair/oracles.hpp"
#include "confrepair/repair_engine.hpp"

namespace {

using namespace confrepair;
namespace fs = std::filesystem;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

struct ScenarioFlags {
  std::string space_file;
  std::string config_file;
  std::string building_file;
  std::string suite;
  std::string validation_suite;
  std::string oracles_file;
  std::string dm_file;
};

void add_scenario_flags(CLI::App* cmd, ScenarioFlags& f) {
  cmd->add_option("--space", f.space_file, "parameter-space file")->required();
  cmd->add_option("--config", f.config_file, "configuration under repair")->required();
  cmd->add_option("--building", f.building_file, "building installation file")
      ->required();
  cmd->add_option("--suite", f.suite, "comma-separated failing passenger files")
      ->required();
  cmd->add_option("--validation-suite", f.validation_suite,
                  "comma-separated held-out passenger files for patch confirmation");
  cmd->add_option("--oracles", f.oracles_file,
                  "oracle thresholds/scales file (default: thresholds 0)");
  cmd->add_option("--dm-thresholds", f.dm_file, "decision-maker thresholds file");
}

std::vector<TestCase> load_suite(const std::string& list) {
  std::vector<TestCase> suite;
  for (const auto& path : split_list(list))
    suite.push_back(parse_passenger_file(read_file(path), fs::path(path).stem().string()));
  return suite;
}

Scenario build_scenario(const ScenarioFlags& f) {
  auto space = std::make_shared<const ParameterSpace>(
      parse_parameter_space(read_file(f.space_file)));
  Building building = parse_building(read_file(f.building_file));
  Configuration initial = parse_configuration(read_file(f.config_file), space);
  std::vector<TestCase> suite = load_suite(f.suite);
  std::vector<TestCase> validation;
  if (!f.validation_suite.empty()) validation = load_suite(f.validation_suite);
  OracleSpec oracles;
  if (!f.oracles_file.empty()) oracles = parse_oracle_spec(read_file(f.oracles_file));
  DmThresholds dm;
  if (!f.dm_file.empty()) dm = parse_dm_thresholds(read_file(f.dm_file));
  return Scenario{fs::path(f.config_file).stem().string(),
                  space,
                  building,
                  std::move(initial),
                  std::move(suite),
                  std::move(validation),
                  oracles,
                  dm};
}

struct SearchFlags {
  std::int64_t budget_evals = 0;
  double budget_seconds = 0;
  std::uint64_t seed = 0;
  int workers = 1;
  int n_susp = 5;
  double drain_s = 1800.0;
  std::string out_dir = "confrepair-out";
  std::string mode = "guided";
  std::size_t archive_cap = 0;  // 0 = mode default
};

void add_search_flags(CLI::App* cmd, SearchFlags& f, bool with_mode) {
  cmd->add_option("--budget-evals", f.budget_evals, "maximum patch evaluations")
      ->required();
  cmd->add_option("--budget-seconds", f.budget_seconds,
                  "optional wall-clock cap in seconds (breaks reproducibility)");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--workers", f.workers, "parallel simulation workers");
  cmd->add_option("--n-susp", f.n_susp,
                  "mutations before a parameter's suspiciousness is computed");
  cmd->add_option("--drain-s", f.drain_s, "simulation drain time after the last arrival");
  cmd->add_option("--out-dir", f.out_dir, "output directory");
  cmd->add_option("--archive-cap", f.archive_cap,
                  "archive size cap (guided default 12; unguided default unlimited)");
  if (with_mode)
    cmd->add_option("--mode", f.mode, "search mode: guided or unguided")
        ->check(CLI::IsMember({"guided", "unguided"}));
}

int run_search(const ScenarioFlags& sf, const SearchFlags& flags, bool force_unguided) {
  Scenario sc = build_scenario(sf);
  const bool unguided = force_unguided || flags.mode == "unguided";

  RepairConfig rc;
  rc.mode = unguided ? RepairConfig::Mode::Unguided : RepairConfig::Mode::Guided;
  rc.n_susp = flags.n_susp;
  rc.budget_evals = flags.budget_evals;
  rc.budget_seconds = flags.budget_seconds;
  rc.seed = flags.seed;
  rc.workers = flags.workers;
  rc.drain_s = flags.drain_s;
  if (flags.archive_cap > 0) {
    if (unguided)
      rc.unguided_cap = flags.archive_cap;
    else
      rc.archive_cap = flags.archive_cap;
  }

  const RunLog log = repair(sc.initial, sc.suite, sc.building, sc.oracles, rc);
  for (const auto& w : log.warnings) std::cerr << "warning: " << w << "\n";

  const fs::path out(flags.out_dir);
  write_file(out / "runlog.ndjson", runlog_to_ndjson(log));
  write_file(out / "archive_summary.csv", archive_summary_csv(log.final_archive));
  for (const auto& e : log.final_archive)
    write_file(out / "archive" / ("patch_" + std::to_string(e.eval_index) + ".cfg"),
               serialize_configuration(e.patch));

  std::vector<ArchiveEntry> front = log.final_archive;
  if (unguided) {
    std::vector<ConfVector> confs;
    for (const auto& e : front) confs.push_back(e.score.conf);
    const auto keep = nondominated_indices(confs);
    std::vector<ArchiveEntry> nd;
    for (std::size_t i : keep) nd.push_back(front[i]);
    front.swap(nd);
  }
  const DmDecision dm = decide(front, sc.initial, sc.dm);
  write_file(out / "dm_choice.cfg", serialize_configuration(dm.chosen.patch));
  {
    std::ostringstream os;
    for (const auto& line : dm.trace) os << line << "\n";
    write_file(out / "dm_trace.txt", os.str());
  }

  bool confirmed = true;
  if (!sc.validation.empty()) {
    SimOptions opts;
    opts.drain_s = rc.drain_s;
    const ConfVector original_conf =
        score_suite(sc.initial, sc.validation, sc.building, sc.oracles, rc.seed,
                    rc.workers, opts)
            .conf;
    const ConfirmationResult conf =
        confirm_patch(dm.chosen.patch, original_conf, sc.validation, sc.building,
                      sc.oracles, rc.seed, rc.workers, rc.drain_s);
    confirmed = conf.ok;
    std::ostringstream os;
    os << std::setprecision(17);
    os << "verdict = " << (conf.ok ? "confirmed" : "regressed") << "\n";
    const auto& names = MetricVector::names();
    for (int i = 0; i < kNumOracles; ++i)
      os << names[i] << ".original = " << conf.original_conf[i] << "\n"
         << names[i] << ".patch = " << conf.patch_conf[i] << "\n";
    write_file(out / "confirmation.txt", os.str());
  }

  std::cout << "mode: " << (unguided ? "unguided" : "guided") << "\n"
            << "evaluations: " << log.evals_used << "\n"
            << "all tests pass: " << (log.success ? "yes" : "no") << "\n"
            << "archive size: " << log.final_archive.size() << "\n"
            << "dm choice: eval_index " << dm.chosen.eval_index
            << " (awt " << dm.chosen.score.metrics.awt_s << ", lwt "
            << dm.chosen.score.metrics.lwt_s << ")\n";
  if (!sc.validation.empty())
    std::cout << "confirmation: " << (confirmed ? "confirmed" : "regressed") << "\n";
  std::cout << "outputs: " << out.string() << "\n";
  return log.success ? 0 : 2;
}

struct SimulateFlags {
  std::string space_file, config_file, building_file, suite_file, out_file;
  std::uint64_t seed = 0;
  double drain_s = 1800.0;
  bool trace = false;
};

int run_simulate(const SimulateFlags& f) {
  auto space = std::make_shared<const ParameterSpace>(
      parse_parameter_space(read_file(f.space_file)));
  const Building building = parse_building(read_file(f.building_file));
  const Configuration config = parse_configuration(read_file(f.config_file), space);
  const TestCase tc =
      parse_passenger_file(read_file(f.suite_file), fs::path(f.suite_file).stem().string());
  SimOptions opts;
  opts.drain_s = f.drain_s;
  if (f.trace) opts.trace = &std::cerr;
  const SimResult result = simulate(config, tc, building, f.seed, opts);
  const MetricVector m = compute_metrics(result);
  std::ostringstream os;
  os << std::setprecision(17);
  const auto& names = MetricVector::names();
  for (int i = 0; i < kNumOracles; ++i) os << (i ? "," : "") << names[i];
  os << "\n";
  const auto vals = m.as_array();
  for (int i = 0; i < kNumOracles; ++i) os << (i ? "," : "") << vals[i];
  os << "\n";
  std::cout << os.str();
  if (!f.out_file.empty()) write_file(f.out_file, sim_result_csv(result));
  return 0;
}

struct ExperimentFlags {
  int runs = 10;
  std::int64_t budget_evals = 500;
  std::string checkpoints;
  std::uint64_t seed = 1;
  int workers = 1;
  int n_susp = 5;
  double drain_s = 1800.0;
  std::string out_dir = "confrepair-experiment";
  std::string modes = "guided,unguided";
  std::string manual_patches;
};

int run_experiment_cmd(const ScenarioFlags& sf, const ExperimentFlags& f) {
  Scenario sc = build_scenario(sf);
  ExperimentConfig cfg;
  cfg.runs = f.runs;
  cfg.budget_evals = f.budget_evals;
  cfg.base_seed = f.seed;
  cfg.workers = f.workers;
  cfg.n_susp = f.n_susp;
  cfg.drain_s = f.drain_s;
  cfg.run_guided = false;
  cfg.run_unguided = false;
  for (const auto& m : split_list(f.modes)) {
    if (m == "guided")
      cfg.run_guided = true;
    else if (m == "unguided")
      cfg.run_unguided = true;
    else
      throw std::invalid_argument("unknown mode '" + m + "'");
  }
  if (!cfg.run_guided && !cfg.run_unguided)
    throw std::invalid_argument("no mode selected");
  for (const auto& c : split_list(f.checkpoints))
    cfg.checkpoints.push_back(std::stoll(c));
  if (!f.manual_patches.empty()) cfg.manual_patches_dir = fs::path(f.manual_patches);

  const ExperimentReport report = run_experiment(sc, cfg);
  write_report_files(report, fs::path(f.out_dir));

  std::cout << "scenario: " << report.scenario_name << "\n"
            << "runs per mode: " << report.runs << ", budget "
            << report.budget_evals << " evaluations\n";
  for (const auto& s : report.checkpoint_stats)
    std::cout << "checkpoint " << s.evals << ": guided HV " << s.guided_mean_hv
              << ", unguided HV " << s.unguided_mean_hv << ", A12 " << s.a12
              << ", p " << s.p_value << " (" << stats::to_string(s.category)
              << ")\n";
  if (report.manual)
    std::cout << "manual patches: HV " << report.manual->hv << ", dm choice "
              << report.manual->dm_name << "\n";
  std::cout << "outputs: " << f.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Search-based repair of dispatcher misconfigurations"};
  app.require_subcommand(1);

  ScenarioFlags repair_sf, baseline_sf, experiment_sf;
  SearchFlags repair_flags, baseline_flags;
  SimulateFlags sim_flags;
  ExperimentFlags exp_flags;

  auto* rep = app.add_subcommand("repair", "Repair a misconfiguration (guided search)");
  add_scenario_flags(rep, repair_sf);
  add_search_flags(rep, repair_flags, /*with_mode=*/true);

  auto* base = app.add_subcommand("baseline", "Unguided baseline search");
  add_scenario_flags(base, baseline_sf);
  add_search_flags(base, baseline_flags, /*with_mode=*/false);

  auto* sim = app.add_subcommand("simulate", "Run one configuration on one test case");
  sim->add_option("--space", sim_flags.space_file, "parameter-space file")->required();
  sim->add_option("--config", sim_flags.config_file, "configuration file")->required();
  sim->add_option("--building", sim_flags.building_file, "building file")->required();
  sim->add_option("--suite", sim_flags.suite_file, "one passenger file")->required();
  sim->add_option("--seed", sim_flags.seed, "random seed");
  sim->add_option("--drain-s", sim_flags.drain_s, "drain time after the last arrival");
  sim->add_option("--out", sim_flags.out_file, "write per-passenger results CSV");
  sim->add_flag("--trace", sim_flags.trace,
                "write the assignment trace to stderr (gated by assign_log_level)");

  auto* exp = app.add_subcommand("experiment",
                                 "Multi-run guided/unguided/manual comparison");
  add_scenario_flags(exp, experiment_sf);
  exp->add_option("--runs", exp_flags.runs, "repetitions per mode");
  exp->add_option("--budget-evals", exp_flags.budget_evals, "evaluations per run")
      ->required();
  exp->add_option("--checkpoints", exp_flags.checkpoints,
                  "comma-separated evaluation counts (default: 10 even marks)");
  exp->add_option("--seed", exp_flags.seed, "base seed; run r uses seed+r");
  exp->add_option("--workers", exp_flags.workers, "concurrent runs");
  exp->add_option("--n-susp", exp_flags.n_susp,
                  "mutations before suspiciousness is computed");
  exp->add_option("--drain-s", exp_flags.drain_s, "drain time after the last arrival");
  exp->add_option("--out-dir", exp_flags.out_dir, "report directory");
  exp->add_option("--mode", exp_flags.modes, "comma list of modes to run");
  exp->add_option("--manual-patches", exp_flags.manual_patches,
                  "directory of manually proposed .cfg patches");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*rep) return run_search(repair_sf, repair_flags, /*force_unguided=*/false);
    if (*base) return run_search(baseline_sf, baseline_flags, /*force_unguided=*/true);
    if (*sim) return run_simulate(sim_flags);
    if (*exp) return run_experiment_cmd(experiment_sf, exp_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
