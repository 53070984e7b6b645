#pragma once

// ============================================================================
// Self-attention temporal encoder over a single sequence (T, I).
// Input projection + sinusoidal positions, then pre-norm transformer
// blocks (multi-head self-attention + 2-layer feed-forward, residuals,
// layer norm), then a final layer norm. Attention is unmasked: the window
// is fully observed, and the summary is read from the last step.
// ============================================================================

#include <cmath>
#include <vector>

#include "rhexis/nn/dense.hpp"
#include "rhexis/nn/ops.hpp"
#include "rhexis/nn/param.hpp"

namespace rhexis::nn {

template <typename S>
class LayerNorm {
 public:
  LayerNorm() = default;
  explicit LayerNorm(int dim) { init(dim); }

  void init(int dim) {
    g_.resize(1, dim);
    g_.value.setOnes();
    b_.resize(1, dim);
  }

  Mat<S> forward(const Mat<S>& x) {
    const int d = static_cast<int>(x.cols());
    xhat_.resize(x.rows(), d);
    inv_std_.resize(x.rows());
    for (int r = 0; r < x.rows(); ++r) {
      const S mu = x.row(r).mean();
      const S var = (x.row(r).array() - mu).square().sum() / d;
      inv_std_[r] = static_cast<S>(1) / std::sqrt(var + static_cast<S>(1e-5));
      xhat_.row(r) = (x.row(r).array() - mu) * inv_std_[r];
    }
    return (xhat_.array().rowwise() * g_.value.row(0).array()).rowwise() +
           b_.value.row(0).array();
  }

  Mat<S> backward(const Mat<S>& dy) {
    const int d = static_cast<int>(dy.cols());
    Mat<S> dx(dy.rows(), d);
    for (int r = 0; r < dy.rows(); ++r) {
      const auto dxhat =
          (dy.row(r).array() * g_.value.row(0).array()).eval();
      const S m1 = dxhat.mean();
      const S m2 = (dxhat * xhat_.row(r).array()).mean();
      dx.row(r) =
          ((dxhat - m1 - xhat_.row(r).array() * m2) * inv_std_[r]).matrix();
      g_.grad.row(0) += (dy.row(r).array() * xhat_.row(r).array()).matrix();
      b_.grad.row(0) += dy.row(r);
    }
    return dx;
  }

  void params(std::vector<Param<S>*>& out) {
    out.push_back(&g_);
    out.push_back(&b_);
  }

 private:
  Param<S> g_, b_;
  Mat<S> xhat_;
  std::vector<S> inv_std_;
};

template <typename S>
class MultiHeadSelfAttention {
 public:
  MultiHeadSelfAttention() = default;
  MultiHeadSelfAttention(int dim, int heads, Rng& rng) { init(dim, heads, rng); }

  void init(int dim, int heads, Rng& rng) {
    if (dim % heads != 0)
      throw ConfigError("attention width not divisible by head count");
    d_ = dim;
    h_ = heads;
    dk_ = dim / heads;
    wq_.init(dim, dim, rng);
    wk_.init(dim, dim, rng);
    wv_.init(dim, dim, rng);
    wo_.init(dim, dim, rng);
  }

  Mat<S> forward(const Mat<S>& x) {
    x_ = x;
    q_ = wq_.forward(x);
    k_ = wk_.forward(x);
    v_ = wv_.forward(x);
    const int t_len = static_cast<int>(x.rows());
    att_.assign(h_, Mat<S>());
    concat_.resize(t_len, d_);
    const S scale = static_cast<S>(1) / std::sqrt(static_cast<S>(dk_));
    for (int h = 0; h < h_; ++h) {
      const auto qh = q_.middleCols(h * dk_, dk_);
      const auto kh = k_.middleCols(h * dk_, dk_);
      const auto vh = v_.middleCols(h * dk_, dk_);
      att_[h] = softmax_rows<S>((qh * kh.transpose() * scale).eval());
      concat_.middleCols(h * dk_, dk_) = att_[h] * vh;
    }
    return wo_.forward(concat_);
  }

  Mat<S> backward(const Mat<S>& dy) {
    const Mat<S> dconcat = wo_.backward(dy);
    Mat<S> dq(q_.rows(), d_), dk(k_.rows(), d_), dv(v_.rows(), d_);
    const S scale = static_cast<S>(1) / std::sqrt(static_cast<S>(dk_));
    for (int h = 0; h < h_; ++h) {
      const auto qh = q_.middleCols(h * dk_, dk_);
      const auto kh = k_.middleCols(h * dk_, dk_);
      const auto vh = v_.middleCols(h * dk_, dk_);
      const auto doh = dconcat.middleCols(h * dk_, dk_);
      const Mat<S> da = doh * vh.transpose();
      dv.middleCols(h * dk_, dk_) = att_[h].transpose() * doh;
      const Mat<S> ds = softmax_rows_backward<S>(da, att_[h]) * scale;
      dq.middleCols(h * dk_, dk_) = ds * kh;
      dk.middleCols(h * dk_, dk_) = ds.transpose() * qh;
    }
    return wq_.backward(dq) + wk_.backward(dk) + wv_.backward(dv);
  }

  void params(std::vector<Param<S>*>& out) {
    wq_.params(out);
    wk_.params(out);
    wv_.params(out);
    wo_.params(out);
  }

 private:
  int d_ = 0, h_ = 0, dk_ = 0;
  Dense<S> wq_, wk_, wv_, wo_;
  Mat<S> x_, q_, k_, v_, concat_;
  std::vector<Mat<S>> att_;
};

template <typename S>
class TransformerBlock {
 public:
  TransformerBlock() = default;
  TransformerBlock(int dim, int heads, int ffn, Rng& rng) {
    init(dim, heads, ffn, rng);
  }

  void init(int dim, int heads, int ffn, Rng& rng) {
    ln1_.init(dim);
    ln2_.init(dim);
    mha_.init(dim, heads, rng);
    f1_.init(dim, ffn, rng);
    f2_.init(ffn, dim, rng);
  }

  Mat<S> forward(const Mat<S>& x) {
    const Mat<S> a = x + mha_.forward(ln1_.forward(x));
    h_ = relu<S>(f1_.forward(ln2_.forward(a)));
    return a + f2_.forward(h_);
  }

  Mat<S> backward(const Mat<S>& dy) {
    const Mat<S> da =
        dy + ln2_.backward(f1_.backward(relu_backward<S>(f2_.backward(dy), h_)));
    return da + ln1_.backward(mha_.backward(da));
  }

  void params(std::vector<Param<S>*>& out) {
    ln1_.params(out);
    mha_.params(out);
    ln2_.params(out);
    f1_.params(out);
    f2_.params(out);
  }

 private:
  LayerNorm<S> ln1_, ln2_;
  MultiHeadSelfAttention<S> mha_;
  Dense<S> f1_, f2_;
  Mat<S> h_;
};

// Sinusoidal positions, (T, D); constant, so it adds nothing to backward.
template <typename S>
Mat<S> positional_encoding(int t_len, int dim) {
  Mat<S> pe(t_len, dim);
  for (int t = 0; t < t_len; ++t)
    for (int i = 0; i < dim; i += 2) {
      const double angle = t / std::pow(10000.0, static_cast<double>(i) / dim);
      pe(t, i) = static_cast<S>(std::sin(angle));
      if (i + 1 < dim) pe(t, i + 1) = static_cast<S>(std::cos(angle));
    }
  return pe;
}

template <typename S>
class TransformerEncoder {
 public:
  TransformerEncoder() = default;
  TransformerEncoder(int in, int dim, int heads, int layers, Rng& rng) {
    init(in, dim, heads, layers, rng);
  }

  void init(int in, int dim, int heads, int layers, Rng& rng) {
    dim_ = dim;
    proj_.init(in, dim, rng);
    blocks_.clear();
    for (int l = 0; l < layers; ++l)
      blocks_.emplace_back(dim, heads, 2 * dim, rng);
    ln_.init(dim);
  }

  Mat<S> forward(const Mat<S>& x) {
    Mat<S> h =
        proj_.forward(x) + positional_encoding<S>(static_cast<int>(x.rows()), dim_);
    for (auto& block : blocks_) h = block.forward(h);
    return ln_.forward(h);
  }

  Mat<S> backward(const Mat<S>& dy) {
    Mat<S> d = ln_.backward(dy);
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it)
      d = it->backward(d);
    return proj_.backward(d);
  }

  void params(std::vector<Param<S>*>& out) {
    proj_.params(out);
    for (auto& block : blocks_) block.params(out);
    ln_.params(out);
  }

 private:
  int dim_ = 0;
  Dense<S> proj_;
  std::vector<TransformerBlock<S>> blocks_;
  LayerNorm<S> ln_;
};

}  // namespace rhexis::nn
