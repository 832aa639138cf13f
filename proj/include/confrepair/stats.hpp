#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace confrepair::stats {

// ---------------------------------------------------------------------------
// Hypervolume (maximization). Exact Lebesgue measure of the union of boxes
// [reference, point], computed with the WFG exclusive-volume recursion.
// Point counts here are small (archives of at most a few dozen solutions),
// so the exact algorithm is cheap in any dimension we use.

namespace detail {

inline bool weakly_dominates(const std::vector<double>& a,
                             const std::vector<double>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] < b[i]) return false;
  return true;
}

/// Keep only maximal points; exact duplicates collapse to one.
inline void maximal_filter(std::vector<std::vector<double>>& pts) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool drop = false;
    for (std::size_t j = 0; j < pts.size() && !drop; ++j) {
      if (i == j) continue;
      if (weakly_dominates(pts[j], pts[i])) {
        // Of two equal points keep the first.
        if (weakly_dominates(pts[i], pts[j]) && i < j) continue;
        drop = true;
      }
    }
    if (!drop) out.push_back(pts[i]);
  }
  pts.swap(out);
}

inline double inclusive_volume(const std::vector<double>& p,
                               const std::vector<double>& ref) {
  double v = 1.0;
  for (std::size_t i = 0; i < p.size(); ++i) v *= p[i] - ref[i];
  return v;
}

inline double wfg(std::vector<std::vector<double>> pts,
                  const std::vector<double>& ref) {
  maximal_filter(pts);
  if (pts.empty()) return 0.0;
  std::sort(pts.begin(), pts.end(),
            [](const auto& a, const auto& b) { return a[0] > b[0]; });
  double total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double excl = inclusive_volume(pts[i], ref);
    if (i + 1 < pts.size()) {
      std::vector<std::vector<double>> limited;
      limited.reserve(pts.size() - i - 1);
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        std::vector<double> q(pts[j].size());
        for (std::size_t k = 0; k < q.size(); ++k)
          q[k] = std::min(pts[j][k], pts[i][k]);
        limited.push_back(std::move(q));
      }
      excl -= wfg(std::move(limited), ref);
    }
    total += excl;
  }
  return total;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace detail

/// Exact hypervolume of a front of maximization points relative to a
/// reference point. Every point must weakly dominate the reference.
inline double hypervolume(std::vector<std::vector<double>> front,
                          const std::vector<double>& reference) {
  for (const auto& p : front) {
    if (p.size() != reference.size())
      throw std::invalid_argument("hypervolume: dimension mismatch");
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i] < reference[i])
        throw std::invalid_argument("hypervolume: point below the reference");
  }
  if (front.empty()) return 0.0;
  return detail::wfg(std::move(front), reference);
}

// ---------------------------------------------------------------------------
// Vargha-Delaney A12: probability that a draw from A exceeds a draw from B,
// ties credited 0.5.

inline double vargha_delaney_a12(std::span<const double> a,
                                 std::span<const double> b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("vargha_delaney_a12: empty sample");
  double score = 0.0;
  for (double x : a)
    for (double y : b) {
      if (x > y)
        score += 1.0;
      else if (x == y)
        score += 0.5;
    }
  return score / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

enum class EffectCategory { Negligible, Small, Medium, Large };

inline const char* to_string(EffectCategory c) {
  switch (c) {
    case EffectCategory::Negligible: return "negligible";
    case EffectCategory::Small: return "small";
    case EffectCategory::Medium: return "medium";
    case EffectCategory::Large: return "large";
  }
  return "?";
}

/// Categorize |effect| of an A12 value: negligible if d < 0.147, small if
/// d < 0.33, medium if d < 0.474, large if d >= 0.474, with d = 2|A12 - 0.5|.
inline EffectCategory categorize_effect(double a12) {
  const double d = 2.0 * std::fabs(a12 - 0.5);
  if (d < 0.147) return EffectCategory::Negligible;
  if (d < 0.33) return EffectCategory::Small;
  if (d < 0.474) return EffectCategory::Medium;
  return EffectCategory::Large;
}

// ---------------------------------------------------------------------------
// Wilcoxon rank-sum (Mann-Whitney) test.

enum class Alternative { TwoSided, Greater, Less };

namespace detail {

/// Exact null distribution of the Mann-Whitney U statistic: counts[u] is the
/// number of rank arrangements of n vs m observations with U == u.
inline std::vector<double> mann_whitney_counts(std::size_t n, std::size_t m) {
  // c(i, j, u) = c(i-1, j, u-j) + c(i, j-1, u); iterate i outer, j inner.
  const std::size_t umax = n * m;
  std::vector<std::vector<double>> cur(m + 1, std::vector<double>(umax + 1, 0.0));
  for (std::size_t j = 0; j <= m; ++j) cur[j][0] = 1.0;  // i == 0
  for (std::size_t i = 1; i <= n; ++i) {
    std::vector<std::vector<double>> next(m + 1,
                                          std::vector<double>(umax + 1, 0.0));
    next[0][0] = 1.0;
    for (std::size_t j = 1; j <= m; ++j)
      for (std::size_t u = 0; u <= i * j; ++u) {
        double v = next[j - 1][u];
        if (u >= j) v += cur[j][u - j];
        next[j][u] = v;
      }
    cur.swap(next);
  }
  return cur[m];
}

}  // namespace detail

/// Two-sample Wilcoxon rank-sum p-value. Uses the exact permutation
/// distribution when there are no ties and the combined size is at most 20;
/// otherwise the normal approximation with tie and continuity corrections.
/// Degenerate input (all values identical) yields p = 1.
inline double wilcoxon_rank_sum(std::span<const double> a,
                                std::span<const double> b,
                                Alternative alt = Alternative::TwoSided) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0 || m == 0)
    throw std::invalid_argument("wilcoxon_rank_sum: empty sample");

  // U statistic for sample A, ties counted half.
  double u_stat = 0.0;
  for (double x : a)
    for (double y : b) {
      if (x > y)
        u_stat += 1.0;
      else if (x == y)
        u_stat += 0.5;
    }

  std::vector<double> combined(a.begin(), a.end());
  combined.insert(combined.end(), b.begin(), b.end());
  std::sort(combined.begin(), combined.end());
  bool has_ties = false;
  for (std::size_t i = 1; i < combined.size(); ++i)
    if (combined[i] == combined[i - 1]) has_ties = true;
  if (combined.front() == combined.back()) return 1.0;

  const double mean_u = static_cast<double>(n) * static_cast<double>(m) / 2.0;

  if (!has_ties && n + m <= 20) {
    const auto counts = detail::mann_whitney_counts(n, m);
    double total = 0.0;
    for (double c : counts) total += c;
    auto tail = [&](bool upper) {
      double s = 0.0;
      for (std::size_t u = 0; u < counts.size(); ++u) {
        const double du = static_cast<double>(u);
        if (upper ? du >= u_stat : du <= u_stat) s += counts[u];
      }
      return s / total;
    };
    double p = 0.0;
    switch (alt) {
      case Alternative::Greater: p = tail(true); break;
      case Alternative::Less: p = tail(false); break;
      case Alternative::TwoSided: {
        const double dev = std::fabs(u_stat - mean_u);
        double s = 0.0;
        for (std::size_t u = 0; u < counts.size(); ++u)
          if (std::fabs(static_cast<double>(u) - mean_u) >= dev) s += counts[u];
        p = s / total;
        break;
      }
    }
    return std::min(1.0, p);
  }

  // Normal approximation with tie correction.
  const double big_n = static_cast<double>(n + m);
  double tie_term = 0.0;
  std::size_t i = 0;
  while (i < combined.size()) {
    std::size_t j = i;
    while (j < combined.size() && combined[j] == combined[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double var_u = static_cast<double>(n) * static_cast<double>(m) / 12.0 *
                       ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
  if (var_u <= 0.0) return 1.0;
  const double sd = std::sqrt(var_u);
  double p = 1.0;
  switch (alt) {
    case Alternative::Greater:
      p = detail::normal_cdf(-(u_stat - mean_u - 0.5) / sd);
      break;
    case Alternative::Less:
      p = detail::normal_cdf((u_stat - mean_u + 0.5) / sd);
      break;
    case Alternative::TwoSided: {
      const double z = (std::fabs(u_stat - mean_u) - 0.5) / sd;
      p = 2.0 * detail::normal_cdf(-std::max(0.0, z));
      break;
    }
  }
  return std::min(1.0, p);
}

}  // namespace confrepair::stats
