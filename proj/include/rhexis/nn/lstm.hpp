#pragma once

// ============================================================================
// LSTM over a single sequence: input (T, I) -> hidden states (T, H).
// Gate order [input, forget, cell, output]; zero initial state; full
// backpropagation through time. A stack of layers feeds each layer's
// hidden sequence to the next.
// ============================================================================

#include <vector>

#include "rhexis/nn/ops.hpp"
#include "rhexis/nn/param.hpp"

namespace rhexis::nn {

template <typename S>
class LstmLayer {
 public:
  LstmLayer() = default;
  LstmLayer(int in, int hidden, Rng& rng) { init(in, hidden, rng); }

  void init(int in, int hidden, Rng& rng) {
    in_ = in;
    h_ = hidden;
    wx_.init_glorot(in, 4 * hidden, in + hidden, hidden, rng);
    wh_.init_glorot(hidden, 4 * hidden, in + hidden, hidden, rng);
    b_.resize(1, 4 * hidden);
    // Forget-gate bias starts at 1 so early training does not flush state.
    b_.value.row(0).segment(h_, h_).setConstant(static_cast<S>(1));
  }

  int hidden_size() const { return h_; }

  Mat<S> forward(const Mat<S>& x) {
    const int t_len = static_cast<int>(x.rows());
    x_ = x;
    i_.resize(t_len, h_);
    f_.resize(t_len, h_);
    g_.resize(t_len, h_);
    o_.resize(t_len, h_);
    c_.resize(t_len, h_);
    tc_.resize(t_len, h_);
    hs_.resize(t_len, h_);
    Mat<S> h_prev = Mat<S>::Zero(1, h_);
    Mat<S> c_prev = Mat<S>::Zero(1, h_);
    for (int t = 0; t < t_len; ++t) {
      Mat<S> z = x.row(t) * wx_.value + h_prev * wh_.value + b_.value;
      i_.row(t) = sigmoid<S>(z.block(0, 0, 1, h_));
      f_.row(t) = sigmoid<S>(z.block(0, h_, 1, h_));
      g_.row(t) = tanh_act<S>(z.block(0, 2 * h_, 1, h_));
      o_.row(t) = sigmoid<S>(z.block(0, 3 * h_, 1, h_));
      c_.row(t) = f_.row(t).cwiseProduct(c_prev.row(0)) +
                  i_.row(t).cwiseProduct(g_.row(t));
      tc_.row(t) = c_.row(t).array().tanh();
      hs_.row(t) = o_.row(t).cwiseProduct(tc_.row(t));
      h_prev = hs_.row(t);
      c_prev = c_.row(t);
    }
    return hs_;
  }

  Mat<S> backward(const Mat<S>& dy) {
    const int t_len = static_cast<int>(x_.rows());
    Mat<S> dx = Mat<S>::Zero(t_len, in_);
    Mat<S> dh_next = Mat<S>::Zero(1, h_);
    Mat<S> dc_next = Mat<S>::Zero(1, h_);
    const S one = static_cast<S>(1);
    for (int t = t_len - 1; t >= 0; --t) {
      const Mat<S> dh = dy.row(t) + dh_next;
      const auto i = i_.row(t).array(), f = f_.row(t).array(),
                 g = g_.row(t).array(), o = o_.row(t).array(),
                 tc = tc_.row(t).array();
      const auto dc =
          (dh.row(0).array() * o * (one - tc.square()) + dc_next.row(0).array())
              .eval();
      Mat<S> dz(1, 4 * h_);
      dz.row(0).segment(0, h_) = dc * g * i * (one - i);
      const auto c_prev =
          t > 0 ? c_.row(t - 1).array().eval()
                : Eigen::Array<S, 1, Eigen::Dynamic>::Zero(h_).eval();
      dz.row(0).segment(h_, h_) = dc * c_prev * f * (one - f);
      dz.row(0).segment(2 * h_, h_) = dc * i * (one - g.square());
      dz.row(0).segment(3 * h_, h_) = dh.row(0).array() * tc * o * (one - o);

      wx_.grad.noalias() += x_.row(t).transpose() * dz;
      if (t > 0) wh_.grad.noalias() += hs_.row(t - 1).transpose() * dz;
      b_.grad += dz;
      dx.row(t) = dz * wx_.value.transpose();
      dh_next = dz * wh_.value.transpose();
      dc_next = (dc * f).matrix();
    }
    return dx;
  }

  void params(std::vector<Param<S>*>& out) {
    out.push_back(&wx_);
    out.push_back(&wh_);
    out.push_back(&b_);
  }

 private:
  int in_ = 0, h_ = 0;
  Param<S> wx_, wh_, b_;
  Mat<S> x_, i_, f_, g_, o_, c_, tc_, hs_;
};

template <typename S>
class Lstm {
 public:
  Lstm() = default;
  Lstm(int in, int hidden, int layers, Rng& rng) { init(in, hidden, layers, rng); }

  void init(int in, int hidden, int layers, Rng& rng) {
    layers_.clear();
    for (int l = 0; l < layers; ++l)
      layers_.emplace_back(l == 0 ? in : hidden, hidden, rng);
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
  std::vector<LstmLayer<S>> layers_;
};

}  // namespace rhexis::nn
