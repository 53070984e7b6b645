#pragma once

// ============================================================================
// Dilated causal temporal convolution over a single sequence (T, I).
// Each layer has kernel 2: y[t] = x[t-d] W0 + x[t] W1 + b with x[<0] = 0,
// dilation d doubling per layer (1, 2, 4, 8, ...), ReLU after every layer.
// The receptive field of the last step covers 1 + sum(d) past steps.
// ============================================================================

#include <vector>

#include "rhexis/nn/ops.hpp"
#include "rhexis/nn/param.hpp"

namespace rhexis::nn {

template <typename S>
class CausalConvLayer {
 public:
  CausalConvLayer() = default;
  CausalConvLayer(int in, int out, int dilation, Rng& rng) {
    init(in, out, dilation, rng);
  }

  void init(int in, int out, int dilation, Rng& rng) {
    in_ = in;
    out_ = out;
    d_ = dilation;
    w_.init_he(2 * in, out, 2 * in, rng);  // rows [0,in) = W0, [in,2in) = W1
    b_.resize(1, out);
  }

  Mat<S> forward(const Mat<S>& x) {
    x_ = x;
    const int t_len = static_cast<int>(x.rows());
    const auto w0 = w_.value.topRows(in_);
    const auto w1 = w_.value.bottomRows(in_);
    Mat<S> y = x * w1;
    for (int t = d_; t < t_len; ++t) y.row(t) += x.row(t - d_) * w0;
    y.rowwise() += b_.value.row(0);
    y_ = relu<S>(y);
    return y_;
  }

  Mat<S> backward(const Mat<S>& dy_post) {
    const Mat<S> dy = relu_backward<S>(dy_post, y_);
    const int t_len = static_cast<int>(x_.rows());
    const auto w0 = w_.value.topRows(in_);
    const auto w1 = w_.value.bottomRows(in_);
    Mat<S> dx = dy * w1.transpose();
    for (int t = d_; t < t_len; ++t) {
      dx.row(t - d_) += dy.row(t) * w0.transpose();
      w_.grad.topRows(in_).noalias() += x_.row(t - d_).transpose() * dy.row(t);
    }
    w_.grad.bottomRows(in_).noalias() += x_.transpose() * dy;
    b_.grad.row(0) += dy.colwise().sum();
    return dx;
  }

  void params(std::vector<Param<S>*>& out) {
    out.push_back(&w_);
    out.push_back(&b_);
  }

 private:
  int in_ = 0, out_ = 0, d_ = 1;
  Param<S> w_, b_;
  Mat<S> x_, y_;
};

template <typename S>
class DilatedConvEncoder {
 public:
  DilatedConvEncoder() = default;
  DilatedConvEncoder(int in, int hidden, int layers, Rng& rng) {
    init(in, hidden, layers, rng);
  }

  void init(int in, int hidden, int layers, Rng& rng) {
    layers_.clear();
    int dilation = 1;
    for (int l = 0; l < layers; ++l, dilation *= 2)
      layers_.emplace_back(l == 0 ? in : hidden, hidden, dilation, rng);
  }

  Mat<S> forward(const Mat<S>& x) {
    Mat<S> h = x;
    for (auto& layer : layers_) h = layer.forward(h);
    return h;
  }

  Mat<S> backward(const Mat<S>& dy) {
    Mat<S> d = dy;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
      d = it->backward(d);
    return d;
  }

  void params(std::vector<Param<S>*>& out) {
    for (auto& layer : layers_) layer.params(out);
  }

 private:
  std::vector<CausalConvLayer<S>> layers_;
};

}  // namespace rhexis::nn
