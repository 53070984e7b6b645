#pragma once

// ============================================================================
// Fully connected layer: Y = X W + b (rows are samples).
// backward() accumulates parameter gradients and returns dX.
// ============================================================================

#include <vector>

#include "rhexis/nn/param.hpp"

namespace rhexis::nn {

template <typename S>
class Dense {
 public:
  Dense() = default;
  Dense(int in, int out, Rng& rng) { init(in, out, rng); }

  void init(int in, int out, Rng& rng) {
    in_ = in;
    out_ = out;
    w_.init_glorot(in, out, in, out, rng);
    b_.resize(1, out);
  }

  int in_features() const { return in_; }
  int out_features() const { return out_; }
  Param<S>& weight() { return w_; }
  Param<S>& bias() { return b_; }

  Mat<S> forward(const Mat<S>& x) {
    x_ = x;
    return (x * w_.value).rowwise() + b_.value.row(0);
  }

  // Forward without caching (inference).
  Mat<S> operator()(const Mat<S>& x) const {
    return (x * w_.value).rowwise() + b_.value.row(0);
  }

  Mat<S> backward(const Mat<S>& dy) {
    w_.grad.noalias() += x_.transpose() * dy;
    b_.grad.row(0) += dy.colwise().sum();
    return dy * w_.value.transpose();
  }

  void params(std::vector<Param<S>*>& out) {
    out.push_back(&w_);
    out.push_back(&b_);
  }

 private:
  int in_ = 0, out_ = 0;
  Param<S> w_, b_;
  Mat<S> x_;
};

}  // namespace rhexis::nn
