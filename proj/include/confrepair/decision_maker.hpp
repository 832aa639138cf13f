#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "confrepair/config_model.hpp"
#include "confrepair/repair_engine.hpp"

namespace confrepair {

/// Thresholds of the rule-based patch selection; configurable because a
/// value that suits one installation may not suit another.
struct DmThresholds {
  double awt_max_s = 25.0;
  double wt55_pct_max = 10.0;
  double att_max_s = 45.0;
  double tt70_pct_max = 10.0;

  void validate() const {
    if (!(awt_max_s > 0) || !(wt55_pct_max > 0) || !(att_max_s > 0) ||
        !(tt70_pct_max > 0))
      throw std::invalid_argument("decision thresholds must be positive");
  }
};

inline DmThresholds parse_dm_thresholds(const std::string& text) {
  DmThresholds t;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("thresholds line " + std::to_string(lineno) +
                       ": expected '<key> = <value>'");
    const std::string key = detail::trim(line.substr(0, eq));
    double d = 0;
    if (!detail::parse_double(detail::trim(line.substr(eq + 1)), d))
      throw ParseError("thresholds line " + std::to_string(lineno) + ": bad number");
    if (key == "awt_max_s") t.awt_max_s = d;
    else if (key == "wt55_pct_max") t.wt55_pct_max = d;
    else if (key == "att_max_s") t.att_max_s = d;
    else if (key == "tt70_pct_max") t.tt70_pct_max = d;
    else
      throw ParseError("thresholds line " + std::to_string(lineno) +
                       ": unknown key '" + key + "'");
  }
  t.validate();
  return t;
}

inline std::string serialize_dm_thresholds(const DmThresholds& t) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "awt_max_s = " << t.awt_max_s << "\n"
     << "wt55_pct_max = " << t.wt55_pct_max << "\n"
     << "att_max_s = " << t.att_max_s << "\n"
     << "tt70_pct_max = " << t.tt70_pct_max << "\n";
  return os.str();
}

struct DmDecision {
  ArchiveEntry chosen;
  std::vector<std::string> trace;
};

/// Rule cascade over suite-worst metrics:
///   1. keep AWT below the threshold, else the lowest-AWT set;
///   2. the same for %WT>55;
///   3. the same for ATT;
///   4. the same for %TT>70;
///   5. lowest LWT, then lowest LTT;
///   6. smallest hamming distance to the original configuration;
/// any residual tie goes to the lowest eval_index. The result is independent
/// of the input order.
inline DmDecision decide(std::vector<ArchiveEntry> candidates,
                         const Configuration& original,
                         const DmThresholds& thresholds) {
  if (candidates.empty())
    throw std::invalid_argument("decide: no candidate patches");
  thresholds.validate();
  std::sort(candidates.begin(), candidates.end(),
            [](const ArchiveEntry& a, const ArchiveEntry& b) {
              return a.eval_index < b.eval_index;
            });

  std::vector<std::string> trace;
  auto log_stage = [&](const std::string& name, std::size_t before,
                       const std::vector<ArchiveEntry>& after,
                       const std::vector<std::int64_t>& eliminated,
                       bool used_fallback) {
    std::ostringstream os;
    os << name << ": " << after.size() << " of " << before << " candidates remain";
    if (used_fallback) os << " (threshold unmet, kept the best set)";
    if (!eliminated.empty()) {
      os << "; eliminated [";
      for (std::size_t i = 0; i < eliminated.size(); ++i) {
        if (i) os << ", ";
        os << eliminated[i];
      }
      os << ']';
    }
    trace.push_back(os.str());
  };

  using Getter = std::function<double(const ArchiveEntry&)>;
  auto split_by = [](const std::vector<ArchiveEntry>& set, const auto& keep,
                     std::vector<ArchiveEntry>& kept,
                     std::vector<std::int64_t>& eliminated) {
    for (const auto& e : set)
      if (keep(e))
        kept.push_back(e);
      else
        eliminated.push_back(e.eval_index);
  };
  auto keep_min_set = [&](std::vector<ArchiveEntry>& set, const Getter& get,
                          const std::string& name, bool fallback = false) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : set) best = std::min(best, get(e));
    std::vector<ArchiveEntry> kept;
    std::vector<std::int64_t> eliminated;
    split_by(set, [&](const ArchiveEntry& e) { return get(e) == best; }, kept,
             eliminated);
    const std::size_t before = set.size();
    set = std::move(kept);
    log_stage(name, before, set, eliminated, fallback);
  };
  auto threshold_stage = [&](std::vector<ArchiveEntry>& set, const Getter& get,
                             double limit, const std::string& name) {
    std::vector<ArchiveEntry> kept;
    std::vector<std::int64_t> eliminated;
    split_by(set, [&](const ArchiveEntry& e) { return get(e) < limit; }, kept,
             eliminated);
    if (kept.empty()) {
      keep_min_set(set, get, name, /*fallback=*/true);
      return;
    }
    const std::size_t before = set.size();
    set = std::move(kept);
    log_stage(name, before, set, eliminated, false);
  };

  std::vector<ArchiveEntry>& set = candidates;
  threshold_stage(set, [](const ArchiveEntry& e) { return e.score.metrics.awt_s; },
                  thresholds.awt_max_s, "stage 1 (awt)");
  threshold_stage(set, [](const ArchiveEntry& e) { return e.score.metrics.pct_wt_gt55; },
                  thresholds.wt55_pct_max, "stage 2 (pct_wt_gt55)");
  threshold_stage(set, [](const ArchiveEntry& e) { return e.score.metrics.att_s; },
                  thresholds.att_max_s, "stage 3 (att)");
  threshold_stage(set, [](const ArchiveEntry& e) { return e.score.metrics.pct_tt_gt70; },
                  thresholds.tt70_pct_max, "stage 4 (pct_tt_gt70)");
  keep_min_set(set, [](const ArchiveEntry& e) { return e.score.metrics.lwt_s; },
               "stage 5a (lowest lwt)");
  keep_min_set(set, [](const ArchiveEntry& e) { return e.score.metrics.ltt_s; },
               "stage 5b (lowest ltt)");
  keep_min_set(set,
               [&](const ArchiveEntry& e) {
                 return static_cast<double>(hamming_distance(e.patch, original));
               },
               "stage 6 (closest to original)");

  // Any residual tie resolves to the lowest eval_index (the initial sort).
  std::ostringstream os;
  os << "chosen: eval_index " << set.front().eval_index;
  trace.push_back(os.str());
  return DmDecision{set.front(), std::move(trace)};
}

}  // namespace confrepair
