#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "confrepair/elevator_sim.hpp"
#include "confrepair/parallel.hpp"

namespace confrepair {

inline constexpr int kNumOracles = 6;

/// Confidence values of the six oracles, each in [-1, 0]; 0 means the oracle
/// passed, -1 the highest contemplated severity.
using ConfVector = std::array<double, kNumOracles>;

/// The six functional-performance metrics of one execution (or the
/// per-metric worst over a suite). Waiting spans call registration to
/// boarding; transit spans boarding to arrival at the destination.
struct MetricVector {
  double awt_s = 0;        // average waiting time
  double lwt_s = 0;        // longest waiting time
  double pct_wt_gt55 = 0;  // % passengers waiting more than 55 s
  double att_s = 0;        // average transit time
  double ltt_s = 0;        // longest transit time
  double pct_tt_gt70 = 0;  // % passengers with transit above 70 s

  std::array<double, kNumOracles> as_array() const {
    return {awt_s, lwt_s, pct_wt_gt55, att_s, ltt_s, pct_tt_gt70};
  }
  static MetricVector from_array(const std::array<double, kNumOracles>& a) {
    return MetricVector{a[0], a[1], a[2], a[3], a[4], a[5]};
  }
  static const std::array<const char*, kNumOracles>& names() {
    static const std::array<const char*, kNumOracles> n = {
        "awt", "lwt", "pct_wt_gt55", "att", "ltt", "pct_tt_gt70"};
    return n;
  }
};

/// Pass boundary and violation normalizer of one oracle, in metric units.
struct OracleEntry {
  double threshold = 0;
  double severity_scale = 1;
};

struct OracleSpec {
  std::array<OracleEntry, kNumOracles> entries = {
      OracleEntry{0, 60},   // awt
      OracleEntry{0, 300},  // lwt
      OracleEntry{0, 25},   // pct_wt_gt55
      OracleEntry{0, 60},   // att
      OracleEntry{0, 300},  // ltt
      OracleEntry{0, 25},   // pct_tt_gt70
  };

  void validate() const {
    for (const auto& e : entries)
      if (!(e.severity_scale > 0))
        throw std::invalid_argument("oracle severity scale must be positive");
  }
};

/// Key=value oracle file: e.g. `awt.threshold = 0`, `awt.scale = 60`.
inline OracleSpec parse_oracle_spec(const std::string& text) {
  OracleSpec spec;
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
      throw ParseError("oracle line " + std::to_string(lineno) +
                       ": expected '<name>.<field> = <value>'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    auto dot = key.find('.');
    if (dot == std::string::npos)
      throw ParseError("oracle line " + std::to_string(lineno) + ": bad key '" + key + "'");
    const std::string metric = key.substr(0, dot);
    const std::string field = key.substr(dot + 1);
    const auto& names = MetricVector::names();
    auto it = std::find(names.begin(), names.end(), metric);
    if (it == names.end())
      throw ParseError("oracle line " + std::to_string(lineno) + ": unknown metric '" +
                       metric + "'");
    double d = 0;
    if (!detail::parse_double(val, d))
      throw ParseError("oracle line " + std::to_string(lineno) + ": bad number");
    auto& entry = spec.entries[static_cast<std::size_t>(it - names.begin())];
    if (field == "threshold")
      entry.threshold = d;
    else if (field == "scale")
      entry.severity_scale = d;
    else
      throw ParseError("oracle line " + std::to_string(lineno) + ": unknown field '" +
                       field + "'");
  }
  spec.validate();
  return spec;
}

inline std::string serialize_oracle_spec(const OracleSpec& spec) {
  std::ostringstream os;
  os << std::setprecision(17);
  const auto& names = MetricVector::names();
  for (int i = 0; i < kNumOracles; ++i)
    os << names[i] << ".threshold = " << spec.entries[i].threshold << "\n"
       << names[i] << ".scale = " << spec.entries[i].severity_scale << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------

/// Metrics of one simulation. Waiting metrics cover all passengers (with
/// waits truncated at the horizon for unserved ones); transit metrics cover
/// completed passengers. If nobody completed, transit metrics take the
/// worst-case convention (duration, 100%).
inline MetricVector compute_metrics(const SimResult& result) {
  if (result.passengers.empty())
    throw std::invalid_argument("compute_metrics: empty result");
  MetricVector m;
  double wait_sum = 0, wait_max = 0;
  int wait_over = 0;
  for (const auto& p : result.passengers) {
    wait_sum += p.waiting_time_s;
    wait_max = std::max(wait_max, p.waiting_time_s);
    if (p.waiting_time_s > 55.0) ++wait_over;
  }
  const double n = static_cast<double>(result.passengers.size());
  m.awt_s = wait_sum / n;
  m.lwt_s = wait_max;
  m.pct_wt_gt55 = 100.0 * wait_over / n;

  double tt_sum = 0, tt_max = 0;
  int tt_over = 0, completed = 0;
  for (const auto& p : result.passengers) {
    if (!p.completed) continue;
    ++completed;
    tt_sum += p.transit_time_s;
    tt_max = std::max(tt_max, p.transit_time_s);
    if (p.transit_time_s > 70.0) ++tt_over;
  }
  if (completed > 0) {
    m.att_s = tt_sum / completed;
    m.ltt_s = tt_max;
    m.pct_tt_gt70 = 100.0 * tt_over / completed;
  } else {
    m.att_s = result.duration_s;
    m.ltt_s = result.duration_s;
    m.pct_tt_gt70 = 100.0;
  }
  return m;
}

/// Map a metric value to a confidence in [-1, 0]: 0 at or below the
/// threshold, -1 at or beyond threshold + scale, linear in between.
inline double confidence(double metric_value, const OracleEntry& entry) {
  if (!(entry.severity_scale > 0))
    throw std::invalid_argument("confidence: severity scale must be positive");
  const double violation = (metric_value - entry.threshold) / entry.severity_scale;
  return -std::min(1.0, std::max(0.0, violation));
}

inline ConfVector confidences(const MetricVector& metrics, const OracleSpec& spec) {
  ConfVector c{};
  const auto vals = metrics.as_array();
  for (int i = 0; i < kNumOracles; ++i) c[i] = confidence(vals[i], spec.entries[i]);
  return c;
}

/// Per-oracle confidences of a patch over a whole suite (the most severe
/// value across test cases) together with the per-oracle worst metrics.
struct ScoreVector {
  ConfVector conf{};
  MetricVector metrics;

  bool all_pass() const {
    for (double c : conf)
      if (c != 0.0) return false;
    return true;
  }
};

/// Score a configuration against every test case of the suite. Simulations
/// may run concurrently; the reduction (componentwise min of confidences,
/// max of metrics) is order-independent, so the result is deterministic.
inline ScoreVector score_suite(const Configuration& patch,
                               std::span<const TestCase> suite,
                               const Building& building, const OracleSpec& oracles,
                               std::uint64_t seed = 0, int workers = 1,
                               const SimOptions& opts = {}) {
  if (suite.empty()) throw std::invalid_argument("score_suite: empty suite");
  oracles.validate();
  std::vector<MetricVector> per_case(suite.size());
  std::vector<std::string> errors(suite.size());
  parallel_for(suite.size(), workers, [&](std::size_t i) {
    try {
      per_case[i] = compute_metrics(simulate(patch, suite[i], building, seed, opts));
    } catch (const std::exception& e) {
      errors[i] = std::string("test case '") +
                  (suite[i].id.empty() ? std::to_string(i) : suite[i].id) +
                  "': " + e.what();
      if (errors[i].empty()) errors[i] = "unknown error";
    }
  });
  for (const auto& err : errors)
    if (!err.empty()) throw std::runtime_error(err);

  ScoreVector out;
  std::array<double, kNumOracles> worst = per_case[0].as_array();
  for (std::size_t i = 1; i < per_case.size(); ++i) {
    const auto vals = per_case[i].as_array();
    for (int k = 0; k < kNumOracles; ++k) worst[k] = std::max(worst[k], vals[k]);
  }
  out.metrics = MetricVector::from_array(worst);
  out.conf.fill(0.0);
  for (int k = 0; k < kNumOracles; ++k) {
    double c = 0.0;
    for (std::size_t i = 0; i < per_case.size(); ++i) {
      const double ci = confidence(per_case[i].as_array()[k], oracles.entries[k]);
      c = i == 0 ? ci : std::min(c, ci);
    }
    out.conf[k] = c;
  }
  return out;
}

}  // namespace confrepair
