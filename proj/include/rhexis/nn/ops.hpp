#pragma once

// ============================================================================
// Stateless tensor ops: activations, softmax, and binary cross-entropy.
// Forward functions return the activation; backward functions map the
// upstream gradient through it given the cached forward output.
// ============================================================================

#include <algorithm>
#include <cmath>

#include "rhexis/linalg.hpp"

namespace rhexis::nn {

template <typename S>
Mat<S> relu(const Mat<S>& x) {
  return x.array().max(static_cast<S>(0)).matrix();
}

// dX from dY and the forward *output* (y > 0 iff x > 0).
template <typename S>
Mat<S> relu_backward(const Mat<S>& dy, const Mat<S>& y) {
  return (dy.array() * (y.array() > static_cast<S>(0)).template cast<S>())
      .matrix();
}

template <typename S>
Mat<S> sigmoid(const Mat<S>& x) {
  return (static_cast<S>(1) / (static_cast<S>(1) + (-x.array()).exp()))
      .matrix();
}

template <typename S>
Mat<S> sigmoid_backward(const Mat<S>& dy, const Mat<S>& y) {
  return (dy.array() * y.array() * (static_cast<S>(1) - y.array())).matrix();
}

template <typename S>
Mat<S> tanh_act(const Mat<S>& x) {
  return x.array().tanh().matrix();
}

template <typename S>
Mat<S> tanh_backward(const Mat<S>& dy, const Mat<S>& y) {
  return (dy.array() * (static_cast<S>(1) - y.array().square())).matrix();
}

// Row-wise softmax (shift-stabilized).
template <typename S>
Mat<S> softmax_rows(const Mat<S>& x) {
  Mat<S> y(x.rows(), x.cols());
  for (int r = 0; r < x.rows(); ++r) {
    const S mx = x.row(r).maxCoeff();
    y.row(r) = (x.row(r).array() - mx).exp();
    y.row(r) /= y.row(r).sum();
  }
  return y;
}

// dX for row-wise softmax given dY and forward output.
template <typename S>
Mat<S> softmax_rows_backward(const Mat<S>& dy, const Mat<S>& y) {
  Mat<S> dx(y.rows(), y.cols());
  for (int r = 0; r < y.rows(); ++r) {
    const S dot = dy.row(r).dot(y.row(r));
    dx.row(r) = (y.row(r).array() * (dy.row(r).array() - dot)).matrix();
  }
  return dx;
}

// ----------------------------------------------------------------------------
// Binary cross-entropy.
// ----------------------------------------------------------------------------

// Summed BCE over all entries given *logits*; writes dL/dZ into dz.
// Numerically stable: loss = max(z,0) - z*y + log(1 + exp(-|z|)).
template <typename S>
S bce_with_logits(const Mat<S>& z, const Mat<S>& y, Mat<S>* dz) {
  S loss = 0;
  if (dz) dz->resize(z.rows(), z.cols());
  for (int r = 0; r < z.rows(); ++r)
    for (int c = 0; c < z.cols(); ++c) {
      const S zv = z(r, c), yv = y(r, c);
      loss += std::max(zv, static_cast<S>(0)) - zv * yv +
              std::log1p(std::exp(-std::abs(zv)));
      if (dz) {
        const S p = static_cast<S>(1) / (static_cast<S>(1) + std::exp(-zv));
        (*dz)(r, c) = p - yv;
      }
    }
  return loss;
}

// Summed BCE over entries given *probabilities* in (0,1); writes dL/dP.
// Probabilities are clamped away from {0,1} for both loss and gradient.
template <typename S>
S bce_on_probs(const Mat<S>& p, const Mat<S>& y, Mat<S>* dp,
               S eps = static_cast<S>(1e-6)) {
  S loss = 0;
  if (dp) dp->resize(p.rows(), p.cols());
  for (int r = 0; r < p.rows(); ++r)
    for (int c = 0; c < p.cols(); ++c) {
      const S pv = std::clamp(p(r, c), eps, static_cast<S>(1) - eps);
      const S yv = y(r, c);
      loss -= yv * std::log(pv) + (static_cast<S>(1) - yv) * std::log(static_cast<S>(1) - pv);
      if (dp) (*dp)(r, c) = (pv - yv) / (pv * (static_cast<S>(1) - pv));
    }
  return loss;
}

}  // namespace rhexis::nn
