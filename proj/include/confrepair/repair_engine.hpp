#pragma once

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "confrepair/config_model.hpp"
#include "confrepair/oracles.hpp"
#include "confrepair/rng.hpp"

namespace nlohmann {
// ParamValue is a std::variant alias, so plain ADL cannot find a to_json
// overload for it; hook into the serializer directly.
template <>
struct adl_serializer<confrepair::ParamValue> {
  static void to_json(json& j, const confrepair::ParamValue& v) {
    std::visit([&j](const auto& x) { j = x; }, v);
  }
};
}  // namespace nlohmann

namespace confrepair {

/// Confidence distance below which a patch counts as having the same
/// performance as its parent.
inline constexpr double kImpactNoneTolerance = 1e-6;

/// Pareto dominance over confidence vectors (maximization): a is at least as
/// good everywhere and strictly better somewhere.
inline bool dominates(const ConfVector& a, const ConfVector& b) {
  bool strict = false;
  for (int i = 0; i < kNumOracles; ++i) {
    if (a[i] < b[i]) return false;
    if (a[i] > b[i]) strict = true;
  }
  return strict;
}

/// Indices of the non-dominated subset of a set of confidence vectors.
inline std::vector<std::size_t> nondominated_indices(std::span<const ConfVector> pts) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < pts.size() && !dominated; ++j)
      if (j != i && dominates(pts[j], pts[i])) dominated = true;
    if (!dominated) out.push_back(i);
  }
  return out;
}

enum class Impact { Positive, Negative, None };

inline const char* to_string(Impact i) {
  switch (i) {
    case Impact::Positive: return "positive";
    case Impact::Negative: return "negative";
    case Impact::None: return "none";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Archive of candidate patches.

struct ArchiveEntry {
  Configuration patch;
  ScoreVector score;
  std::int64_t eval_index = 0;
  std::int64_t parent_eval_index = -1;
  std::vector<std::size_t> mutated_params;
  ScoreVector parent_score;  // kept even if the parent leaves the archive
};

struct ArchiveUpdate {
  bool added = false;
  std::vector<std::int64_t> removed_dominated;  // eval indexes of removed entries
  std::optional<std::int64_t> evicted;          // eval index removed by the size cap
};

/// Bounded non-dominated archive (guided mode) or unbounded store of every
/// evaluated configuration (unguided mode). When the size cap is exceeded the
/// entry with the largest suite-worst AWT leaves; ties are broken uniformly
/// at random.
class Archive {
 public:
  enum class Mode { Guided, Unguided };

  /// cap == 0 means unlimited (the unguided default).
  Archive(Mode mode, std::size_t cap) : mode_(mode), cap_(cap) {
    if (mode == Mode::Guided && cap == 0)
      throw std::invalid_argument("guided archive requires a size cap");
  }

  Mode mode() const { return mode_; }
  std::size_t cap() const { return cap_; }
  const std::vector<ArchiveEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  ArchiveUpdate update(ArchiveEntry candidate, Rng& rng) {
    ArchiveUpdate outcome;
    if (mode_ == Mode::Guided) {
      for (const auto& e : entries_)
        if (dominates(e.score.conf, candidate.score.conf)) return outcome;
      for (auto it = entries_.begin(); it != entries_.end();) {
        if (dominates(candidate.score.conf, it->score.conf)) {
          outcome.removed_dominated.push_back(it->eval_index);
          it = entries_.erase(it);
        } else {
          ++it;
        }
      }
    }
    entries_.push_back(std::move(candidate));
    outcome.added = true;
    if (cap_ > 0 && entries_.size() > cap_) outcome.evicted = evict_worst_awt(rng);
    return outcome;
  }

  /// Exhaustive invariant check for guided mode: pairwise non-dominated and
  /// within the size cap.
  void check_invariants() const {
    if (mode_ != Mode::Guided) return;
    if (entries_.size() > cap_)
      throw std::logic_error("archive exceeds its size cap");
    for (std::size_t i = 0; i < entries_.size(); ++i)
      for (std::size_t j = 0; j < entries_.size(); ++j)
        if (i != j && dominates(entries_[i].score.conf, entries_[j].score.conf))
          throw std::logic_error("archive holds a dominated entry");
  }

  std::uint64_t state_hash() const {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    auto mix = [&h](std::uint64_t v) {
      for (int byte = 0; byte < 8; ++byte) {
        h ^= (v >> (8 * byte)) & 0xff;
        h *= 1099511628211ull;
      }
    };
    for (const auto& e : entries_) {
      mix(static_cast<std::uint64_t>(e.eval_index));
      for (double c : e.score.conf) mix(std::bit_cast<std::uint64_t>(c));
    }
    return h;
  }

 private:
  std::int64_t evict_worst_awt(Rng& rng) {
    double worst = entries_[0].score.metrics.awt_s;
    for (const auto& e : entries_) worst = std::max(worst, e.score.metrics.awt_s);
    std::vector<std::size_t> tied;
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].score.metrics.awt_s == worst) tied.push_back(i);
    const std::size_t pick = tied[tied.size() == 1 ? 0 : rng.uniform_index(tied.size())];
    const std::int64_t evicted = entries_[pick].eval_index;
    entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(pick));
    return evicted;
  }

  Mode mode_;
  std::size_t cap_;
  std::vector<ArchiveEntry> entries_;
};

// ---------------------------------------------------------------------------
// Parameter suspiciousness.

/// Per-parameter impact counters and the derived suspiciousness score:
/// 0.5 until a parameter has been mutated n_susp times, afterwards
/// (P + N) / (P + N + S).
class SuspTracker {
 public:
  SuspTracker(std::size_t n_params, int n_susp)
      : n_susp_(n_susp), positive_(n_params, 0), negative_(n_params, 0),
        none_(n_params, 0), times_mutated_(n_params, 0) {
    if (n_susp < 1) throw std::invalid_argument("n_susp must be >= 1");
  }

  std::size_t size() const { return positive_.size(); }
  long positive(std::size_t i) const { return positive_.at(i); }
  long negative(std::size_t i) const { return negative_.at(i); }
  long none(std::size_t i) const { return none_.at(i); }
  long times_mutated(std::size_t i) const { return times_mutated_.at(i); }
  int n_susp() const { return n_susp_; }

  double suspiciousness(std::size_t i) const {
    if (times_mutated_.at(i) < n_susp_) return 0.5;
    const double impactful = static_cast<double>(positive_[i] + negative_[i]);
    return impactful / static_cast<double>(positive_[i] + negative_[i] + none_[i]);
  }

  std::vector<double> scores() const {
    std::vector<double> s(size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = suspiciousness(i);
    return s;
  }

  void record(std::span<const std::size_t> mutated, Impact impact) {
    for (std::size_t i : mutated) {
      switch (impact) {
        case Impact::Positive: ++positive_.at(i); break;
        case Impact::Negative: ++negative_.at(i); break;
        case Impact::None: ++none_.at(i); break;
      }
      ++times_mutated_.at(i);
    }
  }

 private:
  int n_susp_;
  std::vector<long> positive_, negative_, none_, times_mutated_;
};

/// Fitness-proportionate (roulette-wheel) choice over suspiciousness scores.
/// Excluded indices carry no mass; if every candidate has zero score the
/// choice falls back to uniform over the non-excluded indices.
inline std::size_t select_parameter(std::span<const double> scores, Rng& rng,
                                    std::span<const char> excluded = {}) {
  if (!excluded.empty() && excluded.size() != scores.size())
    throw std::invalid_argument("select_parameter: exclusion size mismatch");
  double total = 0;
  std::size_t candidates = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!excluded.empty() && excluded[i]) continue;
    if (scores[i] < 0) throw std::invalid_argument("select_parameter: negative score");
    total += scores[i];
    ++candidates;
  }
  if (candidates == 0)
    throw std::invalid_argument("select_parameter: all parameters excluded");
  if (total <= 0) {
    std::size_t k = rng.uniform_index(candidates);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (!excluded.empty() && excluded[i]) continue;
      if (k-- == 0) return i;
    }
  }
  const double r = rng.uniform01() * total;
  double cum = 0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!excluded.empty() && excluded[i]) continue;
    cum += scores[i];
    last = i;
    if (r < cum) return i;
  }
  return last;
}

// ---------------------------------------------------------------------------
// Patch generation.

struct PatchResult {
  Configuration config;
  std::vector<std::size_t> mutated;
};

/// Mutate at least one parameter of the parent; after m mutations a further
/// one follows with probability 0.5^m. No parameter is mutated twice, and
/// every new value differs from the one it replaces. Parameters whose domain
/// has a single value are never picked.
inline PatchResult generate_patch(const Configuration& parent,
                                  std::span<const double> suspiciousness,
                                  Rng& rng) {
  const ParameterSpace& space = parent.space();
  if (suspiciousness.size() != space.size())
    throw std::invalid_argument("generate_patch: score count does not match space");
  std::vector<char> excluded(space.size(), 0);
  std::size_t available = 0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (space.spec(i).singleton_domain())
      excluded[i] = 1;
    else
      ++available;
  }
  if (available == 0)
    throw std::invalid_argument("generate_patch: no mutable parameters");
  std::vector<ParamValue> values = parent.values();
  std::vector<std::size_t> mutated;
  do {
    const std::size_t idx = select_parameter(suspiciousness, rng, excluded);
    values[idx] = random_value_excluding(space.spec(idx), values[idx], rng);
    excluded[idx] = 1;
    --available;
    mutated.push_back(idx);
  } while (available > 0 &&
           rng.uniform01() < std::pow(0.5, static_cast<double>(mutated.size())));
  return PatchResult{Configuration(parent.space_ptr(), std::move(values)),
                     std::move(mutated)};
}

// ---------------------------------------------------------------------------
// Impact classification.

/// A patch has no impact when its confidences equal the parent's
/// (componentwise within kImpactNoneTolerance); otherwise it is negative if
/// anything in archive-plus-parent dominates it and positive when nothing
/// does.
inline Impact classify_impact(const ScoreVector& patch, const ScoreVector& parent,
                              std::span<const ArchiveEntry> archive) {
  bool same = true;
  for (int i = 0; i < kNumOracles; ++i)
    if (std::fabs(patch.conf[i] - parent.conf[i]) > kImpactNoneTolerance) {
      same = false;
      break;
    }
  if (same) return Impact::None;
  if (dominates(parent.conf, patch.conf)) return Impact::Negative;
  for (const auto& e : archive)
    if (dominates(e.score.conf, patch.conf)) return Impact::Negative;
  return Impact::Positive;
}

// ---------------------------------------------------------------------------
// The repair loop.

struct RepairConfig {
  enum class Mode { Guided, Unguided };
  Mode mode = Mode::Guided;
  int n_susp = 5;
  std::int64_t budget_evals = 0;
  double budget_seconds = 0;  // 0 disables the wall-clock cap
  std::uint64_t seed = 0;
  int workers = 1;
  double drain_s = 1800.0;
  std::size_t archive_cap = 2 * kNumOracles;  // guided bound
  std::size_t unguided_cap = 0;               // 0 = unlimited
  bool validate_archive = false;              // invariant check every iteration

  void validate() const {
    if (n_susp < 1) throw std::invalid_argument("repair: n_susp must be >= 1");
    if (budget_evals < 1)
      throw std::invalid_argument("repair: evaluation budget must be positive");
  }
};

struct EvalRecord {
  std::int64_t eval_index = 0;  // 0 is the initial configuration
  std::int64_t parent_eval_index = -1;
  std::vector<ParamValue> patch_values;
  std::vector<std::size_t> mutated_params;
  ConfVector conf{};
  MetricVector metrics;
  std::optional<Impact> impact;  // empty for the initial record
  std::size_t archive_size = 0;
  std::uint64_t archive_hash = 0;
};

struct RunLog {
  std::vector<EvalRecord> records;
  std::vector<ArchiveEntry> final_archive;
  std::vector<double> final_suspiciousness;
  std::vector<long> susp_positive, susp_negative, susp_none, susp_times;
  bool success = false;
  std::int64_t evals_used = 0;
  std::vector<std::string> warnings;
};

/// Search loop: pick a parent uniformly at random from the archive, derive a
/// patch, score it against the failing suite, book the impact into the
/// suspiciousness tracker (guided mode) and update the archive. Stops when
/// a patch passes every oracle on every test case or the budget runs out.
inline RunLog repair(
    const Configuration& initial, std::span<const TestCase> suite,
    const Building& building, const OracleSpec& oracles, const RepairConfig& rc,
    const std::function<void(std::int64_t, const Archive&)>& on_eval = nullptr) {
  rc.validate();
  const bool guided = rc.mode == RepairConfig::Mode::Guided;
  Rng rng(rc.seed);
  Archive archive(guided ? Archive::Mode::Guided : Archive::Mode::Unguided,
                  guided ? rc.archive_cap : rc.unguided_cap);
  SuspTracker susp(initial.size(), rc.n_susp);
  const std::vector<double> uniform_scores(initial.size(), 0.5);
  SimOptions sim_opts;
  sim_opts.drain_s = rc.drain_s;

  RunLog log;
  const ScoreVector initial_score =
      score_suite(initial, suite, building, oracles, rc.seed, rc.workers, sim_opts);
  if (initial_score.all_pass())
    log.warnings.push_back("initial configuration already passes the suite");

  archive.update(ArchiveEntry{initial, initial_score, 0, -1, {}, initial_score},
                 rng);

  auto append_record = [&](std::int64_t idx, std::int64_t parent_idx,
                           const Configuration& cfg,
                           std::vector<std::size_t> mutated, const ScoreVector& sc,
                           std::optional<Impact> impact) {
    EvalRecord rec;
    rec.eval_index = idx;
    rec.parent_eval_index = parent_idx;
    rec.patch_values = cfg.values();
    rec.mutated_params = std::move(mutated);
    rec.conf = sc.conf;
    rec.metrics = sc.metrics;
    rec.impact = impact;
    rec.archive_size = archive.size();
    rec.archive_hash = archive.state_hash();
    log.records.push_back(std::move(rec));
  };

  append_record(0, -1, initial, {}, initial_score, std::nullopt);
  log.success = initial_score.all_pass();
  if (on_eval) on_eval(0, archive);

  const auto start = std::chrono::steady_clock::now();
  auto budget_left = [&](std::int64_t evals) {
    if (evals >= rc.budget_evals) return false;
    if (rc.budget_seconds > 0) {
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
              .count();
      if (elapsed >= rc.budget_seconds) return false;
    }
    return true;
  };

  std::int64_t evals = 0;
  while (!log.success && budget_left(evals)) {
    const ArchiveEntry parent = archive.entries()[rng.uniform_index(archive.size())];
    PatchResult patch =
        generate_patch(parent.patch, guided ? susp.scores() : uniform_scores, rng);
    const ScoreVector score = score_suite(patch.config, suite, building, oracles,
                                          rc.seed, rc.workers, sim_opts);
    ++evals;
    const Impact impact = classify_impact(score, parent.score, archive.entries());
    if (guided) susp.record(patch.mutated, impact);

    archive.update(ArchiveEntry{patch.config, score, evals, parent.eval_index,
                                patch.mutated, parent.score},
                   rng);
    if (rc.validate_archive) archive.check_invariants();

    append_record(evals, parent.eval_index, patch.config, std::move(patch.mutated),
                  score, impact);
    log.success = score.all_pass();
    if (on_eval) on_eval(evals, archive);
  }

  log.evals_used = evals;
  log.final_archive = archive.entries();
  log.final_suspiciousness = susp.scores();
  for (std::size_t i = 0; i < susp.size(); ++i) {
    log.susp_positive.push_back(susp.positive(i));
    log.susp_negative.push_back(susp.negative(i));
    log.susp_none.push_back(susp.none(i));
    log.susp_times.push_back(susp.times_mutated(i));
  }
  return log;
}

// ---------------------------------------------------------------------------
// Serialization.

inline void to_json(nlohmann::json& j, const MetricVector& m) {
  j = nlohmann::json{{"awt", m.awt_s},          {"lwt", m.lwt_s},
                     {"pct_wt_gt55", m.pct_wt_gt55}, {"att", m.att_s},
                     {"ltt", m.ltt_s},          {"pct_tt_gt70", m.pct_tt_gt70}};
}

/// One JSON object per evaluation, newline-delimited.
inline std::string runlog_to_ndjson(const RunLog& log) {
  std::ostringstream os;
  for (const auto& rec : log.records) {
    nlohmann::json j;
    j["eval_index"] = rec.eval_index;
    j["parent_eval_index"] = rec.parent_eval_index;
    j["patch"] = rec.patch_values;
    j["mutated_params"] = rec.mutated_params;
    j["conf"] = rec.conf;
    j["metrics"] = rec.metrics;
    j["impact"] = rec.impact ? to_string(*rec.impact) : "initial";
    j["archive_size"] = rec.archive_size;
    j["archive_hash"] = rec.archive_hash;
    os << j.dump() << "\n";
  }
  return os.str();
}

inline std::string archive_summary_csv(std::span<const ArchiveEntry> entries) {
  std::ostringstream os;
  os << "eval_index,parent_eval_index,awt,lwt,pct_wt_gt55,att,ltt,pct_tt_gt70,"
        "conf_awt,conf_lwt,conf_wt55,conf_att,conf_ltt,conf_tt70,mutated_params\n";
  os << std::setprecision(17);
  for (const auto& e : entries) {
    os << e.eval_index << ',' << e.parent_eval_index;
    for (double m : e.score.metrics.as_array()) os << ',' << m;
    for (double c : e.score.conf) os << ',' << c;
    os << ',';
    for (std::size_t i = 0; i < e.mutated_params.size(); ++i) {
      if (i) os << '|';
      os << e.mutated_params[i];
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace confrepair
