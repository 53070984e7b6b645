#pragma once

// ============================================================================
// Distribution-discrepancy losses between two feature batches, with analytic
// gradients w.r.t. both batches. Used to align source and target feature
// distributions during adaptation training.
//
// All three losses take row-major matrices with one sample per row:
//   source: Bs x S,  target: Bt x S
// and return the scalar loss plus dL/dsource and dL/dtarget.
// ============================================================================

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rhexis/common.hpp"
#include "rhexis/linalg.hpp"

namespace rhexis {

enum class DiscrepancyKind { kCoral, kMmd, kMse };

inline const char* discrepancy_name(DiscrepancyKind k) {
  switch (k) {
    case DiscrepancyKind::kCoral: return "coral";
    case DiscrepancyKind::kMmd: return "mmd";
    case DiscrepancyKind::kMse: return "mse";
  }
  return "?";
}

inline DiscrepancyKind discrepancy_from_name(const std::string& s) {
  if (s == "coral") return DiscrepancyKind::kCoral;
  if (s == "mmd") return DiscrepancyKind::kMmd;
  if (s == "mse") return DiscrepancyKind::kMse;
  throw ConfigError("unknown discrepancy kind: " + s);
}

template <typename Scalar>
struct DiscrepancyResult {
  Scalar loss = 0;
  Mat<Scalar> grad_source;  // same shape as source batch
  Mat<Scalar> grad_target;  // same shape as target batch
};

// ----------------------------------------------------------------------------
// Covariance of a batch: C = 1/(B-1) * (X^T X - 1/B * (1^T X)^T (1^T X)).
// ----------------------------------------------------------------------------
template <typename Scalar>
Mat<Scalar> batch_covariance(const Mat<Scalar>& x) {
  const auto b = static_cast<Scalar>(x.rows());
  if (x.rows() < 2) throw DataError("covariance needs at least 2 samples");
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> colsum = x.colwise().sum();
  Mat<Scalar> c = x.transpose() * x;
  c.noalias() -= (colsum.transpose() * colsum) / b;
  c /= (b - 1);
  return c;
}

// ----------------------------------------------------------------------------
// CORAL: L = 1/(4 S^2) * ||C_s - C_t||_F^2.
//
// With D = C_s - C_t and Xc the column-centered batch,
//   dL/dX_s = + 1/(S^2 (B_s - 1)) * Xc_s * D
//   dL/dX_t = - 1/(S^2 (B_t - 1)) * Xc_t * D
// ----------------------------------------------------------------------------
template <typename Scalar>
DiscrepancyResult<Scalar> coral_loss(const Mat<Scalar>& source,
                                     const Mat<Scalar>& target) {
  if (source.cols() != target.cols())
    throw DataError("coral: feature widths differ");
  const auto s = static_cast<Scalar>(source.cols());
  Mat<Scalar> d = batch_covariance(source) - batch_covariance(target);

  DiscrepancyResult<Scalar> r;
  r.loss = d.squaredNorm() / (4 * s * s);

  Mat<Scalar> cs = source.rowwise() - source.colwise().mean();
  Mat<Scalar> ct = target.rowwise() - target.colwise().mean();
  const Scalar ks = 1 / (s * s * static_cast<Scalar>(source.rows() - 1));
  const Scalar kt = 1 / (s * s * static_cast<Scalar>(target.rows() - 1));
  r.grad_source.noalias() = ks * (cs * d);
  r.grad_target.noalias() = (-kt) * (ct * d);
  return r;
}

// ----------------------------------------------------------------------------
// Median pairwise euclidean distance over all rows of the joined batch
// (every unordered pair, both within and across domains). Used as the
// default bandwidth for the gaussian MMD kernel.
// ----------------------------------------------------------------------------
template <typename Scalar>
Scalar median_pairwise_distance(const Mat<Scalar>& source,
                                const Mat<Scalar>& target) {
  Mat<Scalar> joined(source.rows() + target.rows(), source.cols());
  joined << source, target;
  std::vector<Scalar> dist;
  dist.reserve(static_cast<size_t>(joined.rows()) * (joined.rows() - 1) / 2);
  for (Eigen::Index i = 0; i < joined.rows(); ++i)
    for (Eigen::Index j = i + 1; j < joined.rows(); ++j)
      dist.push_back((joined.row(i) - joined.row(j)).norm());
  if (dist.empty()) throw DataError("median distance needs >= 2 samples");
  std::sort(dist.begin(), dist.end());
  const size_t n = dist.size();
  Scalar med = (n % 2) ? dist[n / 2]
                       : (dist[n / 2 - 1] + dist[n / 2]) / Scalar(2);
  // All-identical rows would give a zero bandwidth; fall back to 1.
  return med > 0 ? med : Scalar(1);
}

// ----------------------------------------------------------------------------
// Squared MMD with a gaussian kernel k(x,y) = exp(-||x-y||^2 / (2 sigma^2)).
//
//   MMD^2 = 1/(Bs(Bs-1)) sum_{i != j} k(xi, xj)
//         + 1/(Bt(Bt-1)) sum_{i != j} k(yi, yj)
//         - 2/(Bs Bt)    sum_{i, j}   k(xi, yj)
//
// sigma <= 0 selects the median-distance heuristic; the bandwidth is treated
// as a constant when differentiating (standard practice for the heuristic).
// ----------------------------------------------------------------------------
template <typename Scalar>
DiscrepancyResult<Scalar> mmd_loss(const Mat<Scalar>& source,
                                   const Mat<Scalar>& target,
                                   Scalar sigma = Scalar(0)) {
  if (source.cols() != target.cols())
    throw DataError("mmd: feature widths differ");
  if (source.rows() < 2 || target.rows() < 2)
    throw DataError("mmd: each batch needs at least 2 samples");
  if (sigma <= 0) sigma = median_pairwise_distance(source, target);
  const Scalar inv2s2 = 1 / (2 * sigma * sigma);
  const Scalar invs2 = 1 / (sigma * sigma);
  const auto bs = static_cast<Scalar>(source.rows());
  const auto bt = static_cast<Scalar>(target.rows());

  DiscrepancyResult<Scalar> r;
  r.grad_source = Mat<Scalar>::Zero(source.rows(), source.cols());
  r.grad_target = Mat<Scalar>::Zero(target.rows(), target.cols());

  const Scalar wss = 1 / (bs * (bs - 1));
  for (Eigen::Index i = 0; i < source.rows(); ++i)
    for (Eigen::Index j = 0; j < source.rows(); ++j) {
      if (i == j) continue;
      auto diff = source.row(i) - source.row(j);
      Scalar k = std::exp(-diff.squaredNorm() * inv2s2);
      r.loss += wss * k;
      // d k / d xi = k * (xj - xi) / sigma^2; pairs (i,j) and (j,i) both hit i.
      r.grad_source.row(i) -= wss * k * invs2 * diff;
      r.grad_source.row(j) += wss * k * invs2 * diff;
    }

  const Scalar wtt = 1 / (bt * (bt - 1));
  for (Eigen::Index i = 0; i < target.rows(); ++i)
    for (Eigen::Index j = 0; j < target.rows(); ++j) {
      if (i == j) continue;
      auto diff = target.row(i) - target.row(j);
      Scalar k = std::exp(-diff.squaredNorm() * inv2s2);
      r.loss += wtt * k;
      r.grad_target.row(i) -= wtt * k * invs2 * diff;
      r.grad_target.row(j) += wtt * k * invs2 * diff;
    }

  const Scalar wst = 2 / (bs * bt);
  for (Eigen::Index i = 0; i < source.rows(); ++i)
    for (Eigen::Index j = 0; j < target.rows(); ++j) {
      auto diff = source.row(i) - target.row(j);
      Scalar k = std::exp(-diff.squaredNorm() * inv2s2);
      r.loss -= wst * k;
      r.grad_source.row(i) += wst * k * invs2 * diff;
      r.grad_target.row(j) -= wst * k * invs2 * diff;
    }
  return r;
}

// ----------------------------------------------------------------------------
// Row-paired mean squared error: L = 1/B * sum_i ||x_i - y_i||^2.
// Requires equally sized batches (row i of each is a matched pair).
// ----------------------------------------------------------------------------
template <typename Scalar>
DiscrepancyResult<Scalar> mse_loss(const Mat<Scalar>& source,
                                   const Mat<Scalar>& target) {
  if (source.rows() != target.rows() || source.cols() != target.cols())
    throw DataError("mse: batches must have identical shapes");
  const auto b = static_cast<Scalar>(source.rows());
  Mat<Scalar> diff = source - target;
  DiscrepancyResult<Scalar> r;
  r.loss = diff.squaredNorm() / b;
  r.grad_source = (2 / b) * diff;
  r.grad_target = (-2 / b) * diff;
  return r;
}

// Dispatcher used by the adaptation trainer. sigma only affects kMmd.
template <typename Scalar>
DiscrepancyResult<Scalar> discrepancy(DiscrepancyKind kind,
                                      const Mat<Scalar>& source,
                                      const Mat<Scalar>& target,
                                      Scalar sigma = Scalar(0)) {
  switch (kind) {
    case DiscrepancyKind::kCoral: return coral_loss(source, target);
    case DiscrepancyKind::kMmd: return mmd_loss(source, target, sigma);
    case DiscrepancyKind::kMse: return mse_loss(source, target);
  }
  throw ConfigError("unknown discrepancy kind");
}

}  // namespace rhexis
