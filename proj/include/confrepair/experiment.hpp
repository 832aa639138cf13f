#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "confrepair/decision_maker.hpp"
#include "confrepair/io.hpp"
#include "confrepair/oracles.hpp"
#include "confrepair/parallel.hpp"
#include "confrepair/repair_engine.hpp"
#include "confrepair/stats.hpp"

namespace confrepair {

// ---------------------------------------------------------------------------
// Scenario: everything needed to reproduce one misconfiguration case.

struct Scenario {
  std::string name;
  ParameterSpacePtr space;
  Building building;
  Configuration initial;
  std::vector<TestCase> suite;       // failing test cases driving the search
  std::vector<TestCase> validation;  // held-out inputs for patch confirmation
  OracleSpec oracles;
  DmThresholds dm;
};

/// Load a scenario directory: space.txt, building.txt, misconfig.cfg,
/// oracles.txt, dm.txt, suite/*.csv and validation/*.csv.
inline Scenario load_scenario(const std::filesystem::path& dir) {
  auto space = std::make_shared<const ParameterSpace>(
      parse_parameter_space(read_file(dir / "space.txt")));
  Building building = parse_building(read_file(dir / "building.txt"));
  Configuration initial =
      parse_configuration(read_file(dir / "misconfig.cfg"), space);
  std::vector<TestCase> suite;
  for (const auto& f : list_files(dir / "suite", ".csv"))
    suite.push_back(parse_passenger_file(read_file(f), f.stem().string()));
  std::vector<TestCase> validation;
  if (std::filesystem::is_directory(dir / "validation"))
    for (const auto& f : list_files(dir / "validation", ".csv"))
      validation.push_back(parse_passenger_file(read_file(f), f.stem().string()));
  return Scenario{dir.filename().string(),
                  space,
                  building,
                  std::move(initial),
                  std::move(suite),
                  std::move(validation),
                  parse_oracle_spec(read_file(dir / "oracles.txt")),
                  parse_dm_thresholds(read_file(dir / "dm.txt"))};
}

// ---------------------------------------------------------------------------
// Patch confirmation: regression re-test on a held-out suite.

struct ConfirmationResult {
  bool ok = false;
  ConfVector patch_conf{};
  ConfVector original_conf{};
};

/// The selected patch must not perform worse than the original on any oracle
/// of the held-out validation suite.
inline ConfirmationResult confirm_patch(const Configuration& patch,
                                        const ConfVector& original_conf,
                                        std::span<const TestCase> validation,
                                        const Building& building,
                                        const OracleSpec& oracles,
                                        std::uint64_t seed, int workers,
                                        double drain_s) {
  SimOptions opts;
  opts.drain_s = drain_s;
  ConfirmationResult r;
  r.original_conf = original_conf;
  r.patch_conf =
      score_suite(patch, validation, building, oracles, seed, workers, opts).conf;
  r.ok = true;
  for (int i = 0; i < kNumOracles; ++i)
    if (r.patch_conf[i] < r.original_conf[i]) r.ok = false;
  return r;
}

// ---------------------------------------------------------------------------
// Multi-run comparison of guided and unguided repair plus manual patches.

inline const std::vector<double>& hv_reference() {
  static const std::vector<double> ref(kNumOracles, -1.0);
  return ref;
}

/// Hypervolume of an archive's non-dominated front in confidence space,
/// with the fixed reference point (-1, ..., -1); the result lies in [0, 1].
inline double front_hypervolume(std::span<const ArchiveEntry> entries) {
  std::vector<ConfVector> confs;
  confs.reserve(entries.size());
  for (const auto& e : entries) confs.push_back(e.score.conf);
  const auto idx = nondominated_indices(confs);
  std::vector<std::vector<double>> front;
  front.reserve(idx.size());
  for (std::size_t i : idx)
    front.emplace_back(confs[i].begin(), confs[i].end());
  return stats::hypervolume(std::move(front), hv_reference());
}

struct ExperimentConfig {
  int runs = 10;
  std::int64_t budget_evals = 500;
  std::vector<std::int64_t> checkpoints;  // defaults to 10 evenly spaced marks
  std::uint64_t base_seed = 1;
  bool run_guided = true;
  bool run_unguided = true;
  int n_susp = 5;
  int workers = 1;  // concurrent runs
  double drain_s = 1800.0;
  std::optional<std::filesystem::path> manual_patches_dir;

  std::vector<std::int64_t> effective_checkpoints() const {
    if (!checkpoints.empty()) return checkpoints;
    std::vector<std::int64_t> cp;
    const int marks = 10;
    for (int i = 1; i <= marks; ++i) {
      const std::int64_t c = budget_evals * i / marks;
      if (c > 0 && (cp.empty() || cp.back() != c)) cp.push_back(c);
    }
    return cp;
  }
};

struct RunOutcome {
  std::string mode;
  int run = 0;
  std::uint64_t seed = 0;
  bool success = false;
  std::int64_t evals_used = 0;
  std::vector<double> hv;  // one value per checkpoint
  std::int64_t dm_eval_index = -1;
  std::vector<ParamValue> dm_patch_values;
  MetricVector dm_metrics;
  ConfVector dm_conf{};
  std::size_t dm_hamming = 0;
  bool confirmed = false;
  ConfVector dm_validation_conf{};
  std::vector<double> final_suspiciousness;
  std::vector<long> susp_times;
};

struct CheckpointStat {
  std::int64_t evals = 0;
  double guided_mean_hv = 0;
  double unguided_mean_hv = 0;
  double a12 = 0.5;
  double p_value = 1.0;
  stats::EffectCategory category = stats::EffectCategory::Negligible;
};

struct ManualPatchEval {
  std::string name;
  ScoreVector score;
  bool nondominated = false;
};

struct ManualReport {
  std::vector<ManualPatchEval> patches;
  double hv = 0;
  std::string dm_name;
  MetricVector dm_metrics;
  ConfVector dm_conf{};
  std::size_t dm_hamming = 0;
};

struct ExperimentReport {
  std::string scenario_name;
  std::int64_t budget_evals = 0;
  int runs = 0;
  std::vector<std::int64_t> checkpoints;
  MetricVector misconfig_metrics;
  ConfVector misconfig_conf{};
  ConfVector misconfig_validation_conf{};
  std::vector<RunOutcome> outcomes;
  std::vector<CheckpointStat> checkpoint_stats;  // guided vs unguided
  std::optional<ManualReport> manual;
};

namespace detail {

inline RunOutcome execute_run(const Scenario& sc, const ExperimentConfig& cfg,
                              RepairConfig::Mode mode, int run,
                              const std::vector<std::int64_t>& checkpoints,
                              const ConfVector& initial_validation_conf) {
  RepairConfig rc;
  rc.mode = mode;
  rc.n_susp = cfg.n_susp;
  rc.budget_evals = cfg.budget_evals;
  rc.seed = cfg.base_seed + static_cast<std::uint64_t>(run);
  rc.workers = 1;  // runs themselves are parallelized
  rc.drain_s = cfg.drain_s;

  RunOutcome out;
  out.mode = mode == RepairConfig::Mode::Guided ? "guided" : "unguided";
  out.run = run;
  out.seed = rc.seed;
  out.hv.assign(checkpoints.size(), std::nan(""));

  auto on_eval = [&](std::int64_t idx, const Archive& archive) {
    for (std::size_t k = 0; k < checkpoints.size(); ++k)
      if (checkpoints[k] == idx) out.hv[k] = front_hypervolume(archive.entries());
  };
  RunLog log = repair(sc.initial, sc.suite, sc.building, sc.oracles, rc, on_eval);

  const double final_hv = front_hypervolume(log.final_archive);
  for (double& h : out.hv)
    if (std::isnan(h)) h = final_hv;

  out.success = log.success;
  out.evals_used = log.evals_used;
  out.final_suspiciousness = log.final_suspiciousness;
  out.susp_times = log.susp_times;

  // Decision maker over the final non-dominated front.
  std::vector<ArchiveEntry> front = log.final_archive;
  if (mode == RepairConfig::Mode::Unguided) {
    std::vector<ConfVector> confs;
    confs.reserve(front.size());
    for (const auto& e : front) confs.push_back(e.score.conf);
    const auto keep = nondominated_indices(confs);
    std::vector<ArchiveEntry> nd;
    nd.reserve(keep.size());
    for (std::size_t i : keep) nd.push_back(front[i]);
    front.swap(nd);
  }
  DmDecision dm = decide(std::move(front), sc.initial, sc.dm);
  out.dm_eval_index = dm.chosen.eval_index;
  out.dm_patch_values = dm.chosen.patch.values();
  out.dm_metrics = dm.chosen.score.metrics;
  out.dm_conf = dm.chosen.score.conf;
  out.dm_hamming = hamming_distance(dm.chosen.patch, sc.initial);

  if (!sc.validation.empty()) {
    const auto conf = confirm_patch(dm.chosen.patch, initial_validation_conf,
                                    sc.validation, sc.building, sc.oracles,
                                    rc.seed, 1, cfg.drain_s);
    out.confirmed = conf.ok;
    out.dm_validation_conf = conf.patch_conf;
  }
  return out;
}

}  // namespace detail

/// Run `runs` seeded repetitions of each selected mode, recording the front
/// hypervolume at every checkpoint, the decision maker's patch, and its
/// confirmation on the validation suite; then derive the per-checkpoint
/// statistics and the manual-patch comparison.
inline ExperimentReport run_experiment(const Scenario& sc,
                                       const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.scenario_name = sc.name;
  report.budget_evals = cfg.budget_evals;
  report.runs = cfg.runs;
  report.checkpoints = cfg.effective_checkpoints();

  SimOptions opts;
  opts.drain_s = cfg.drain_s;
  const ScoreVector initial_score =
      score_suite(sc.initial, sc.suite, sc.building, sc.oracles, cfg.base_seed, 1, opts);
  report.misconfig_metrics = initial_score.metrics;
  report.misconfig_conf = initial_score.conf;
  if (!sc.validation.empty())
    report.misconfig_validation_conf =
        score_suite(sc.initial, sc.validation, sc.building, sc.oracles,
                    cfg.base_seed, 1, opts)
            .conf;

  struct Job {
    RepairConfig::Mode mode;
    int run;
  };
  std::vector<Job> jobs;
  for (int r = 0; r < cfg.runs; ++r) {
    if (cfg.run_guided) jobs.push_back({RepairConfig::Mode::Guided, r});
    if (cfg.run_unguided) jobs.push_back({RepairConfig::Mode::Unguided, r});
  }
  std::vector<RunOutcome> outcomes(jobs.size());
  parallel_for(jobs.size(), cfg.workers, [&](std::size_t i) {
    outcomes[i] = detail::execute_run(sc, cfg, jobs[i].mode, jobs[i].run,
                                      report.checkpoints,
                                      report.misconfig_validation_conf);
  });
  report.outcomes = std::move(outcomes);

  if (cfg.run_guided && cfg.run_unguided) {
    for (std::size_t k = 0; k < report.checkpoints.size(); ++k) {
      std::vector<double> guided, unguided;
      for (const auto& o : report.outcomes)
        (o.mode == "guided" ? guided : unguided).push_back(o.hv[k]);
      CheckpointStat st;
      st.evals = report.checkpoints[k];
      for (double h : guided) st.guided_mean_hv += h;
      for (double h : unguided) st.unguided_mean_hv += h;
      st.guided_mean_hv /= guided.empty() ? 1 : static_cast<double>(guided.size());
      st.unguided_mean_hv /= unguided.empty() ? 1 : static_cast<double>(unguided.size());
      st.a12 = stats::vargha_delaney_a12(guided, unguided);
      st.p_value = stats::wilcoxon_rank_sum(guided, unguided);
      st.category = stats::categorize_effect(st.a12);
      report.checkpoint_stats.push_back(st);
    }
  }

  if (cfg.manual_patches_dir) {
    ManualReport manual;
    std::vector<ArchiveEntry> entries;
    std::int64_t index = 0;
    for (const auto& f : list_files(*cfg.manual_patches_dir, ".cfg")) {
      ManualPatchEval ev;
      ev.name = f.stem().string();
      Configuration patch = parse_configuration(read_file(f), sc.space);
      ev.score = score_suite(patch, sc.suite, sc.building, sc.oracles,
                             cfg.base_seed, 1, opts);
      entries.push_back(
          ArchiveEntry{std::move(patch), ev.score, index++, -1, {}, ev.score});
      manual.patches.push_back(std::move(ev));
    }
    if (!entries.empty()) {
      std::vector<ConfVector> confs;
      for (const auto& e : entries) confs.push_back(e.score.conf);
      const auto keep = nondominated_indices(confs);
      std::vector<ArchiveEntry> nd;
      for (std::size_t i : keep) {
        manual.patches[i].nondominated = true;
        nd.push_back(entries[i]);
      }
      manual.hv = front_hypervolume(nd);
      DmDecision dm = decide(nd, sc.initial, sc.dm);
      manual.dm_name =
          manual.patches[static_cast<std::size_t>(dm.chosen.eval_index)].name;
      manual.dm_metrics = dm.chosen.score.metrics;
      manual.dm_conf = dm.chosen.score.conf;
      manual.dm_hamming = hamming_distance(dm.chosen.patch, sc.initial);
      report.manual = std::move(manual);
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Report files.

inline nlohmann::json report_to_json(const ExperimentReport& r) {
  nlohmann::json j;
  j["scenario"] = r.scenario_name;
  j["budget_evals"] = r.budget_evals;
  j["runs"] = r.runs;
  j["checkpoints"] = r.checkpoints;
  j["misconfig"] = {{"metrics", r.misconfig_metrics}, {"conf", r.misconfig_conf}};
  auto& outs = j["outcomes"] = nlohmann::json::array();
  for (const auto& o : r.outcomes) {
    nlohmann::json jo;
    jo["mode"] = o.mode;
    jo["run"] = o.run;
    jo["seed"] = o.seed;
    jo["success"] = o.success;
    jo["evals_used"] = o.evals_used;
    jo["hv"] = o.hv;
    jo["dm_eval_index"] = o.dm_eval_index;
    jo["dm_patch"] = o.dm_patch_values;
    jo["dm_metrics"] = o.dm_metrics;
    jo["dm_conf"] = o.dm_conf;
    jo["dm_hamming"] = o.dm_hamming;
    jo["confirmed"] = o.confirmed;
    jo["dm_validation_conf"] = o.dm_validation_conf;
    jo["final_suspiciousness"] = o.final_suspiciousness;
    jo["susp_times_mutated"] = o.susp_times;
    outs.push_back(std::move(jo));
  }
  auto& st = j["checkpoint_stats"] = nlohmann::json::array();
  for (const auto& s : r.checkpoint_stats)
    st.push_back({{"evals", s.evals},
                  {"guided_mean_hv", s.guided_mean_hv},
                  {"unguided_mean_hv", s.unguided_mean_hv},
                  {"a12", s.a12},
                  {"p_value", s.p_value},
                  {"category", stats::to_string(s.category)}});
  if (r.manual) {
    nlohmann::json jm;
    jm["hv"] = r.manual->hv;
    jm["dm_choice"] = r.manual->dm_name;
    jm["dm_metrics"] = r.manual->dm_metrics;
    jm["dm_conf"] = r.manual->dm_conf;
    jm["dm_hamming"] = r.manual->dm_hamming;
    auto& arr = jm["patches"] = nlohmann::json::array();
    for (const auto& p : r.manual->patches)
      arr.push_back({{"name", p.name},
                     {"nondominated", p.nondominated},
                     {"metrics", p.score.metrics},
                     {"conf", p.score.conf}});
    j["manual"] = std::move(jm);
  }
  return j;
}

inline std::string hv_checkpoints_csv(const ExperimentReport& r) {
  std::ostringstream os;
  os << "checkpoint,mode,run,hv\n" << std::setprecision(17);
  for (std::size_t k = 0; k < r.checkpoints.size(); ++k)
    for (const auto& o : r.outcomes)
      os << r.checkpoints[k] << ',' << o.mode << ',' << o.run << ',' << o.hv[k]
         << "\n";
  return os.str();
}

inline std::string hv_stats_csv(const ExperimentReport& r) {
  std::ostringstream os;
  os << "checkpoint,guided_mean_hv,unguided_mean_hv,a12,p_value,category\n"
     << std::setprecision(17);
  for (const auto& s : r.checkpoint_stats)
    os << s.evals << ',' << s.guided_mean_hv << ',' << s.unguided_mean_hv << ','
       << s.a12 << ',' << s.p_value << ',' << stats::to_string(s.category) << "\n";
  return os.str();
}

inline std::string dm_metrics_csv(const ExperimentReport& r) {
  std::ostringstream os;
  os << "source,run,awt,lwt,pct_wt_gt55,att,ltt,pct_tt_gt70,hamming,confirmed\n"
     << std::setprecision(17);
  auto row = [&os](const std::string& src, const std::string& run,
                   const MetricVector& m, const std::string& hamming,
                   const std::string& confirmed) {
    os << src << ',' << run;
    for (double v : m.as_array()) os << ',' << v;
    os << ',' << hamming << ',' << confirmed << "\n";
  };
  row("misconfig", "", r.misconfig_metrics, "", "");
  if (r.manual)
    row("manual_dm", "", r.manual->dm_metrics, std::to_string(r.manual->dm_hamming),
        "");
  for (const auto& o : r.outcomes)
    row(o.mode + "_dm", std::to_string(o.run), o.dm_metrics,
        std::to_string(o.dm_hamming), o.confirmed ? "1" : "0");
  return os.str();
}

/// gnuplot-friendly mean-HV curve: checkpoint, guided mean, unguided mean.
inline std::string hv_curve_dat(const ExperimentReport& r) {
  std::ostringstream os;
  os << "# checkpoint guided_mean_hv unguided_mean_hv\n" << std::setprecision(17);
  for (const auto& s : r.checkpoint_stats)
    os << s.evals << ' ' << s.guided_mean_hv << ' ' << s.unguided_mean_hv << "\n";
  return os.str();
}

inline void write_report_files(const ExperimentReport& r,
                               const std::filesystem::path& out_dir) {
  write_file(out_dir / "report.json", report_to_json(r).dump(2) + "\n");
  write_file(out_dir / "hv_checkpoints.csv", hv_checkpoints_csv(r));
  write_file(out_dir / "hv_stats.csv", hv_stats_csv(r));
  write_file(out_dir / "dm_metrics.csv", dm_metrics_csv(r));
  write_file(out_dir / "hv_curve.dat", hv_curve_dat(r));
}

}  // namespace confrepair
