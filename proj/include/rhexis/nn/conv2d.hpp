#pragma once

// ============================================================================
// 2-D convolution via im2col + GEMM, plus global average pooling.
//
// A batch of N images lives in a single row-major matrix of shape
// (N, C*H*W); each row is one image, laid out channel-major (c, then y,
// then x) — the same layout as Image::data. im2col turns the batch into a
// (N*OH*OW, C*k*k) patch matrix so the convolution is one GEMM for the
// whole batch (all frames of a snippet go through together).
// ============================================================================

#include <vector>

#include "rhexis/nn/param.hpp"

namespace rhexis::nn {

template <typename S>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad, Rng& rng) {
    init(in_ch, out_ch, kernel, stride, pad, rng);
  }

  void init(int in_ch, int out_ch, int kernel, int stride, int pad, Rng& rng) {
    ic_ = in_ch;
    oc_ = out_ch;
    k_ = kernel;
    stride_ = stride;
    pad_ = pad;
    w_.init_he(in_ch * kernel * kernel, out_ch, in_ch * kernel * kernel, rng);
    b_.resize(1, out_ch);
  }

  int out_h(int h) const { return (h + 2 * pad_ - k_) / stride_ + 1; }
  int out_w(int w) const { return (w + 2 * pad_ - k_) / stride_ + 1; }
  int out_channels() const { return oc_; }
  Param<S>& weight() { return w_; }
  Param<S>& bias() { return b_; }

  // x: (N, ic*h*w) -> (N, oc*oh*ow)
  Mat<S> forward(const Mat<S>& x, int h, int w) {
    h_ = h;
    w_in_ = w;
    n_ = static_cast<int>(x.rows());
    const int oh = out_h(h), ow = out_w(w);
    cols_ = im2col(x, h, w);
    Mat<S> y = cols_ * w_.value;  // (N*oh*ow, oc)
    y.rowwise() += b_.value.row(0);
    return fold(y, oh, ow);
  }

  Mat<S> backward(const Mat<S>& dy_folded) {
    const int oh = out_h(h_), ow = out_w(w_in_);
    const Mat<S> dy = unfold(dy_folded, oh, ow);  // (N*oh*ow, oc)
    w_.grad.noalias() += cols_.transpose() * dy;
    b_.grad.row(0) += dy.colwise().sum();
    const Mat<S> dcols = dy * w_.value.transpose();
    return col2im(dcols, h_, w_in_);
  }

  void params(std::vector<Param<S>*>& out) {
    out.push_back(&w_);
    out.push_back(&b_);
  }

 private:
  // (N, ic*h*w) -> (N*oh*ow, ic*k*k)
  Mat<S> im2col(const Mat<S>& x, int h, int w) const {
    const int oh = out_h(h), ow = out_w(w);
    Mat<S> cols = Mat<S>::Zero(static_cast<long>(x.rows()) * oh * ow,
                               ic_ * k_ * k_);
    for (int n = 0; n < x.rows(); ++n)
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          const long row = (static_cast<long>(n) * oh + oy) * ow + ox;
          for (int c = 0; c < ic_; ++c)
            for (int ky = 0; ky < k_; ++ky) {
              const int iy = oy * stride_ - pad_ + ky;
              if (iy < 0 || iy >= h) continue;
              for (int kx = 0; kx < k_; ++kx) {
                const int ix = ox * stride_ - pad_ + kx;
                if (ix < 0 || ix >= w) continue;
                cols(row, (c * k_ + ky) * k_ + kx) =
                    x(n, (c * h + iy) * w + ix);
              }
            }
        }
    return cols;
  }

  // Scatter-add of im2col's gather.
  Mat<S> col2im(const Mat<S>& dcols, int h, int w) const {
    const int oh = out_h(h), ow = out_w(w);
    Mat<S> dx = Mat<S>::Zero(n_, ic_ * h * w);
    for (int n = 0; n < n_; ++n)
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          const long row = (static_cast<long>(n) * oh + oy) * ow + ox;
          for (int c = 0; c < ic_; ++c)
            for (int ky = 0; ky < k_; ++ky) {
              const int iy = oy * stride_ - pad_ + ky;
              if (iy < 0 || iy >= h) continue;
              for (int kx = 0; kx < k_; ++kx) {
                const int ix = ox * stride_ - pad_ + kx;
                if (ix < 0 || ix >= w) continue;
                dx(n, (c * h + iy) * w + ix) +=
                    dcols(row, (c * k_ + ky) * k_ + kx);
              }
            }
        }
    return dx;
  }

  // (N*oh*ow, oc) <-> (N, oc*oh*ow)
  Mat<S> fold(const Mat<S>& y, int oh, int ow) const {
    Mat<S> out(n_, oc_ * oh * ow);
    for (int n = 0; n < n_; ++n)
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          const long row = (static_cast<long>(n) * oh + oy) * ow + ox;
          for (int c = 0; c < oc_; ++c)
            out(n, (c * oh + oy) * ow + ox) = y(row, c);
        }
    return out;
  }

  Mat<S> unfold(const Mat<S>& folded, int oh, int ow) const {
    Mat<S> out(static_cast<long>(n_) * oh * ow, oc_);
    for (int n = 0; n < n_; ++n)
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          const long row = (static_cast<long>(n) * oh + oy) * ow + ox;
          for (int c = 0; c < oc_; ++c)
            out(row, c) = folded(n, (c * oh + oy) * ow + ox);
        }
    return out;
  }

  int ic_ = 0, oc_ = 0, k_ = 0, stride_ = 0, pad_ = 0;
  int h_ = 0, w_in_ = 0, n_ = 0;
  Param<S> w_, b_;
  Mat<S> cols_;
};

// Global average pooling: (N, C*H*W) -> (N, C).
template <typename S>
Mat<S> global_avg_pool(const Mat<S>& x, int channels, int h, int w) {
  Mat<S> y(x.rows(), channels);
  const S inv = static_cast<S>(1) / static_cast<S>(h * w);
  for (int n = 0; n < x.rows(); ++n)
    for (int c = 0; c < channels; ++c)
      y(n, c) = x.row(n).segment(static_cast<long>(c) * h * w, h * w).sum() * inv;
  return y;
}

// Nearest-neighbor 2x upsampling: (N, C*H*W) -> (N, C*2H*2W).
template <typename S>
Mat<S> upsample2x(const Mat<S>& x, int channels, int h, int w) {
  Mat<S> y(x.rows(), static_cast<long>(channels) * 4 * h * w);
  for (int n = 0; n < x.rows(); ++n)
    for (int c = 0; c < channels; ++c)
      for (int yy = 0; yy < 2 * h; ++yy)
        for (int xx = 0; xx < 2 * w; ++xx)
          y(n, (static_cast<long>(c) * 2 * h + yy) * 2 * w + xx) =
              x(n, (static_cast<long>(c) * h + yy / 2) * w + xx / 2);
  return y;
}

template <typename S>
Mat<S> upsample2x_backward(const Mat<S>& dy, int channels, int h, int w) {
  Mat<S> dx = Mat<S>::Zero(dy.rows(), static_cast<long>(channels) * h * w);
  for (int n = 0; n < dy.rows(); ++n)
    for (int c = 0; c < channels; ++c)
      for (int yy = 0; yy < 2 * h; ++yy)
        for (int xx = 0; xx < 2 * w; ++xx)
          dx(n, (static_cast<long>(c) * h + yy / 2) * w + xx / 2) +=
              dy(n, (static_cast<long>(c) * 2 * h + yy) * 2 * w + xx);
  return dx;
}

template <typename S>
Mat<S> global_avg_pool_backward(const Mat<S>& dy, int channels, int h, int w) {
  Mat<S> dx(dy.rows(), static_cast<long>(channels) * h * w);
  const S inv = static_cast<S>(1) / static_cast<S>(h * w);
  for (int n = 0; n < dy.rows(); ++n)
    for (int c = 0; c < channels; ++c)
      dx.row(n)
          .segment(static_cast<long>(c) * h * w, h * w)
          .setConstant(dy(n, c) * inv);
  return dx;
}

}  // namespace rhexis::nn
