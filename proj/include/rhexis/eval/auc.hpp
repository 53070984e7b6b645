// ============================================================================
// auc.hpp - ROC-AUC by the rank method, DeLong variance and paired test
// ============================================================================

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rhexis/common.hpp"

namespace rhexis {

// Midranks (1-based, ties averaged) of v.
inline std::vector<double> midranks(const std::vector<double>& v) {
  const size_t n = v.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;  // averaged rank
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

// AUC = P(score+ > score-) + 0.5 P(tie), computed via midranks.
// Requires at least one positive and one negative label.
inline double auc(const std::vector<double>& scores,
                  const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw DataError("auc: scores/labels length mismatch");
  size_t m = 0, n = 0;
  for (int l : labels) (l ? m : n)++;
  if (m == 0 || n == 0)
    throw DataError("auc: need at least one positive and one negative");
  const std::vector<double> r = midranks(scores);
  double rank_sum = 0.0;
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i]) rank_sum += r[i];
  const double md = static_cast<double>(m);
  return (rank_sum - md * (md + 1.0) / 2.0) / (md * static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// DeLong structural components (fast midrank formulation).
// ---------------------------------------------------------------------------

struct DelongComponents {
  double auc = 0.0;
  std::vector<double> v_pos;  // one component per positive sample
  std::vector<double> v_neg;  // one component per negative sample
};

inline DelongComponents delong_components(const std::vector<double>& scores,
                                          const std::vector<int>& labels) {
  std::vector<double> pos, neg;
  for (size_t i = 0; i < scores.size(); ++i)
    (labels[i] ? pos : neg).push_back(scores[i]);
  const size_t m = pos.size(), n = neg.size();
  if (m == 0 || n == 0)
    throw DataError("delong: need at least one positive and one negative");

  std::vector<double> all(pos);
  all.insert(all.end(), neg.begin(), neg.end());
  const std::vector<double> r_all = midranks(all);
  const std::vector<double> r_pos = midranks(pos);
  const std::vector<double> r_neg = midranks(neg);

  DelongComponents out;
  out.v_pos.resize(m);
  out.v_neg.resize(n);
  double sum = 0.0;
  for (size_t i = 0; i < m; ++i) {
    out.v_pos[i] = (r_all[i] - r_pos[i]) / static_cast<double>(n);
    sum += r_all[i];
  }
  for (size_t j = 0; j < n; ++j)
    out.v_neg[j] =
        1.0 - (r_all[m + j] - r_neg[j]) / static_cast<double>(m);
  out.auc = (sum - static_cast<double>(m) * (m + 1.0) / 2.0) /
            (static_cast<double>(m) * static_cast<double>(n));
  return out;
}

namespace detail {
inline double sample_cov(const std::vector<double>& a,
                         const std::vector<double>& b) {
  const size_t n = a.size();
  if (n < 2) return 0.0;
  double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(n - 1);
}
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
}  // namespace detail

struct AucEstimate {
  double auc = 0.0;
  double variance = 0.0;
  double ci_low = 0.0;   // 95% normal approximation
  double ci_high = 1.0;
};

inline AucEstimate delong_auc(const std::vector<double>& scores,
                              const std::vector<int>& labels) {
  const DelongComponents c = delong_components(scores, labels);
  AucEstimate e;
  e.auc = c.auc;
  e.variance = detail::sample_cov(c.v_pos, c.v_pos) / c.v_pos.size() +
               detail::sample_cov(c.v_neg, c.v_neg) / c.v_neg.size();
  const double half = 1.959963985 * std::sqrt(std::max(e.variance, 0.0));
  e.ci_low = std::clamp(c.auc - half, 0.0, 1.0);
  e.ci_high = std::clamp(c.auc + half, 0.0, 1.0);
  return e;
}

struct AucComparison {
  double auc_a = 0.0;
  double auc_b = 0.0;
  double variance_diff = 0.0;
  double z = 0.0;
  double p_value = 1.0;  // two-sided
};

// Paired DeLong test for two models scored on the same samples.
inline AucComparison delong_compare(const std::vector<double>& scores_a,
                                    const std::vector<double>& scores_b,
                                    const std::vector<int>& labels) {
  if (scores_a.size() != scores_b.size())
    throw DataError("delong_compare: score vectors differ in length");
  const DelongComponents ca = delong_components(scores_a, labels);
  const DelongComponents cb = delong_components(scores_b, labels);

  AucComparison out;
  out.auc_a = ca.auc;
  out.auc_b = cb.auc;
  const double var_pos = detail::sample_cov(ca.v_pos, ca.v_pos) +
                         detail::sample_cov(cb.v_pos, cb.v_pos) -
                         2.0 * detail::sample_cov(ca.v_pos, cb.v_pos);
  const double var_neg = detail::sample_cov(ca.v_neg, ca.v_neg) +
                         detail::sample_cov(cb.v_neg, cb.v_neg) -
                         2.0 * detail::sample_cov(ca.v_neg, cb.v_neg);
  out.variance_diff =
      var_pos / ca.v_pos.size() + var_neg / ca.v_neg.size();

  const double diff = ca.auc - cb.auc;
  if (out.variance_diff <= 0.0) {
    // Degenerate covariance: identical scores give a zero-variance zero
    // difference, which is "no evidence of difference".
    out.z = 0.0;
    out.p_value = (diff == 0.0) ? 1.0 : 0.0;
    return out;
  }
  out.z = diff / std::sqrt(out.variance_diff);
  out.p_value = 2.0 * (1.0 - detail::normal_cdf(std::fabs(out.z)));
  out.p_value = std::clamp(out.p_value, 0.0, 1.0);
  return out;
}

}  // namespace rhexis
