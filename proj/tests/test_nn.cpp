// ============================================================================
// Layer-by-layer verification of the neural network building blocks.
//
// Every backward pass is checked against central finite differences in
// double precision; convolution forward is additionally checked against a
// direct (non-im2col) implementation. Structural properties (causality,
// receptive fields, softmax normalization) get their own checks.
// ============================================================================

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "rhexis/nn/attention.hpp"
#include "rhexis/nn/conv2d.hpp"
#include "rhexis/nn/dense.hpp"
#include "rhexis/nn/lstm.hpp"
#include "rhexis/nn/ops.hpp"
#include "rhexis/nn/param.hpp"
#include "rhexis/nn/tcn.hpp"

using namespace rhexis;

namespace {

// Central differences carry ~1e-10 round-off noise at h = 1e-5; the floor
// keeps truly-zero gradients (e.g. the key-projection bias, which cancels
// in softmax) from tripping the relative comparison.
double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-4});
}

MatD random_mat(Rng& rng, int rows, int cols, double scale = 1.0) {
  MatD m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = gaussian(rng, 0.0, scale);
  return m;
}

// Central-difference check of all registered parameter gradients (sampled
// coordinates) against the already-populated analytic grads.
void check_param_grads(std::vector<nn::Param<double>*> params,
                       const std::function<double()>& loss, double tol,
                       int coords_per_param = 25) {
  Rng rng = make_rng(20240517);
  const double h = 1e-5;
  for (nn::Param<double>* p : params) {
    const long n = p->value.size();
    for (int s = 0; s < std::min<long>(coords_per_param, n); ++s) {
      const long k = uniform_int(rng, 0, static_cast<int>(n - 1));
      double* d = p->value.data();
      const double orig = d[k];
      d[k] = orig + h;
      const double lp = loss();
      d[k] = orig - h;
      const double lm = loss();
      d[k] = orig;
      const double fd = (lp - lm) / (2 * h);
      EXPECT_LT(rel_err(p->grad.data()[k], fd), tol)
          << "param coord " << k << ": analytic " << p->grad.data()[k]
          << " fd " << fd;
    }
  }
}

// Same for the input gradient.
void check_input_grads(MatD& x, const MatD& dx,
                       const std::function<double()>& loss, double tol,
                       int coords = 40) {
  Rng rng = make_rng(77001);
  const double h = 1e-5;
  const long n = x.size();
  for (int s = 0; s < std::min<long>(coords, n); ++s) {
    const long k = uniform_int(rng, 0, static_cast<int>(n - 1));
    const double orig = x.data()[k];
    x.data()[k] = orig + h;
    const double lp = loss();
    x.data()[k] = orig - h;
    const double lm = loss();
    x.data()[k] = orig;
    const double fd = (lp - lm) / (2 * h);
    EXPECT_LT(rel_err(dx.data()[k], fd), tol)
        << "input coord " << k << ": analytic " << dx.data()[k] << " fd " << fd;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Elementwise ops
// ---------------------------------------------------------------------------

TEST(Ops, ActivationsMatchFiniteDifferences) {
  Rng rng = make_rng(1);
  MatD x = random_mat(rng, 3, 4);
  MatD r = random_mat(rng, 3, 4);
  const double h = 1e-6;

  struct Case {
    std::function<MatD(const MatD&)> f;
    std::function<MatD(const MatD&, const MatD&)> b;
  };
  const std::vector<Case> cases = {
      {[](const MatD& m) { return nn::relu<double>(m); },
       [](const MatD& dy, const MatD& y) { return nn::relu_backward<double>(dy, y); }},
      {[](const MatD& m) { return nn::sigmoid<double>(m); },
       [](const MatD& dy, const MatD& y) { return nn::sigmoid_backward<double>(dy, y); }},
      {[](const MatD& m) { return nn::tanh_act<double>(m); },
       [](const MatD& dy, const MatD& y) { return nn::tanh_backward<double>(dy, y); }},
      {[](const MatD& m) { return nn::softmax_rows<double>(m); },
       [](const MatD& dy, const MatD& y) {
         return nn::softmax_rows_backward<double>(dy, y);
       }},
  };
  for (const Case& c : cases) {
    const MatD y = c.f(x);
    const MatD dx = c.b(r, y);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 4; ++j) {
        MatD xp = x, xm = x;
        xp(i, j) += h;
        xm(i, j) -= h;
        const double fd = ((c.f(xp).array() * r.array()).sum() -
                           (c.f(xm).array() * r.array()).sum()) /
                          (2 * h);
        EXPECT_LT(rel_err(dx(i, j), fd), 1e-4);
      }
  }
}

TEST(Ops, SoftmaxRowsNormalized) {
  Rng rng = make_rng(2);
  const MatD x = random_mat(rng, 5, 7, 3.0);
  const MatD y = nn::softmax_rows<double>(x);
  for (int r = 0; r < 5; ++r) {
    EXPECT_NEAR(y.row(r).sum(), 1.0, 1e-12);
    EXPECT_GT(y.row(r).minCoeff(), 0.0);
  }
  // Shift invariance.
  const MatD y2 = nn::softmax_rows<double>((x.array() + 100.0).matrix());
  EXPECT_LT((y - y2).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ops, BceWithLogitsMatchesDefinitionAndFd) {
  Rng rng = make_rng(3);
  const MatD z = random_mat(rng, 4, 6, 2.0);
  MatD y(4, 6);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 6; ++c) y(r, c) = uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : 1.0;

  MatD dz;
  const double loss = nn::bce_with_logits<double>(z, y, &dz);

  // Definitional: -[y log p + (1-y) log(1-p)] with p = sigmoid(z).
  double ref = 0;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 6; ++c) {
      const double p = 1.0 / (1.0 + std::exp(-z(r, c)));
      ref -= y(r, c) * std::log(p) + (1 - y(r, c)) * std::log(1 - p);
    }
  EXPECT_NEAR(loss, ref, 1e-9);

  const double h = 1e-6;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 6; ++c) {
      MatD zp = z, zm = z;
      zp(r, c) += h;
      zm(r, c) -= h;
      const double fd = (nn::bce_with_logits<double>(zp, y, nullptr) -
                         nn::bce_with_logits<double>(zm, y, nullptr)) /
                        (2 * h);
      EXPECT_LT(rel_err(dz(r, c), fd), 1e-5);
    }
}

TEST(Ops, BceOnProbsMatchesFd) {
  Rng rng = make_rng(4);
  MatD p(3, 5), y(3, 5);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 5; ++c) {
      p(r, c) = uniform(rng, 0.05, 0.95);
      y(r, c) = uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : 1.0;
    }
  MatD dp;
  nn::bce_on_probs<double>(p, y, &dp);
  const double h = 1e-6;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 5; ++c) {
      MatD pp = p, pm = p;
      pp(r, c) += h;
      pm(r, c) -= h;
      const double fd = (nn::bce_on_probs<double>(pp, y, nullptr) -
                         nn::bce_on_probs<double>(pm, y, nullptr)) /
                        (2 * h);
      EXPECT_LT(rel_err(dp(r, c), fd), 1e-5);
    }
}

// ---------------------------------------------------------------------------
// Dense
// ---------------------------------------------------------------------------

TEST(DenseLayer, MatchesFiniteDifferences) {
  Rng rng = make_rng(10);
  nn::Dense<double> layer(7, 5, rng);
  MatD x = random_mat(rng, 4, 7);
  const MatD r = random_mat(rng, 4, 5);

  const auto loss = [&] { return (layer.forward(x).array() * r.array()).sum(); };
  loss();
  layer.weight().zero_grad();
  layer.bias().zero_grad();
  layer.forward(x);
  const MatD dx = layer.backward(r);

  std::vector<nn::Param<double>*> params;
  layer.params(params);
  check_param_grads(params, loss, 1e-6, 60);
  check_input_grads(x, dx, loss, 1e-6);
}

TEST(DenseLayer, AccumulatesGradients) {
  Rng rng = make_rng(11);
  nn::Dense<double> layer(3, 2, rng);
  const MatD x = random_mat(rng, 2, 3);
  const MatD r = random_mat(rng, 2, 2);
  layer.forward(x);
  layer.backward(r);
  const MatD once = layer.weight().grad;
  layer.forward(x);
  layer.backward(r);
  EXPECT_LT((layer.weight().grad - 2 * once).cwiseAbs().maxCoeff(), 1e-12);
  layer.weight().zero_grad();
  EXPECT_EQ(layer.weight().grad.cwiseAbs().maxCoeff(), 0.0);
}

// ---------------------------------------------------------------------------
// Conv2d
// ---------------------------------------------------------------------------

namespace {

// Direct convolution oracle (no im2col).
MatD conv_direct(const MatD& x, const MatD& w, const MatD& b, int ic, int oc,
                 int h, int wd, int k, int stride, int pad) {
  const int oh = (h + 2 * pad - k) / stride + 1;
  const int ow = (wd + 2 * pad - k) / stride + 1;
  MatD y = MatD::Zero(x.rows(), oc * oh * ow);
  for (int n = 0; n < x.rows(); ++n)
    for (int o = 0; o < oc; ++o)
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          double acc = b(0, o);
          for (int c = 0; c < ic; ++c)
            for (int ky = 0; ky < k; ++ky)
              for (int kx = 0; kx < k; ++kx) {
                const int iy = oy * stride - pad + ky;
                const int ix = ox * stride - pad + kx;
                if (iy < 0 || iy >= h || ix < 0 || ix >= wd) continue;
                acc += x(n, (c * h + iy) * wd + ix) *
                       w((c * k + ky) * k + kx, o);
              }
          y(n, (o * oh + oy) * ow + ox) = acc;
        }
  return y;
}

}  // namespace

TEST(ConvLayer, ForwardMatchesDirectConvolution) {
  Rng rng = make_rng(20);
  const int ic = 2, oc = 3, h = 6, w = 6;
  nn::Conv2d<double> conv(ic, oc, 3, 2, 1, rng);
  const MatD x = random_mat(rng, 2, ic * h * w);
  const MatD y = conv.forward(x, h, w);
  const MatD ref = conv_direct(x, conv.weight().value, conv.bias().value, ic,
                               oc, h, w, 3, 2, 1);
  ASSERT_EQ(y.rows(), ref.rows());
  ASSERT_EQ(y.cols(), ref.cols());
  EXPECT_LT((y - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ConvLayer, MatchesFiniteDifferences) {
  Rng rng = make_rng(21);
  const int ic = 2, oc = 3, h = 6, w = 5;
  nn::Conv2d<double> conv(ic, oc, 3, 2, 1, rng);
  MatD x = random_mat(rng, 2, ic * h * w);
  const int oh = conv.out_h(h), ow = conv.out_w(w);
  const MatD r = random_mat(rng, 2, oc * oh * ow);

  const auto loss = [&] { return (conv.forward(x, h, w).array() * r.array()).sum(); };
  loss();
  conv.weight().zero_grad();
  conv.bias().zero_grad();
  conv.forward(x, h, w);
  const MatD dx = conv.backward(r);

  std::vector<nn::Param<double>*> params;
  conv.params(params);
  check_param_grads(params, loss, 1e-6, 54);
  check_input_grads(x, dx, loss, 1e-6, 60);
}

TEST(ConvLayer, PoolingRoundTrip) {
  Rng rng = make_rng(22);
  const MatD x = random_mat(rng, 3, 2 * 4 * 4);
  const MatD y = nn::global_avg_pool<double>(x, 2, 4, 4);
  ASSERT_EQ(y.cols(), 2);
  EXPECT_NEAR(y(0, 0), x.row(0).segment(0, 16).mean(), 1e-12);
  EXPECT_NEAR(y(2, 1), x.row(2).segment(16, 16).mean(), 1e-12);

  const MatD dy = random_mat(rng, 3, 2);
  const MatD dx = nn::global_avg_pool_backward<double>(dy, 2, 4, 4);
  EXPECT_NEAR(dx(1, 3), dy(1, 0) / 16.0, 1e-12);
  EXPECT_NEAR(dx(1, 17), dy(1, 1) / 16.0, 1e-12);
}

// ---------------------------------------------------------------------------
// LSTM
// ---------------------------------------------------------------------------

TEST(LstmLayer, MatchesFiniteDifferences) {
  Rng rng = make_rng(30);
  nn::Lstm<double> lstm(5, 6, 2, rng);
  MatD x = random_mat(rng, 4, 5);
  const MatD r = random_mat(rng, 4, 6);

  const auto loss = [&] { return (lstm.forward(x).array() * r.array()).sum(); };
  std::vector<nn::Param<double>*> params;
  lstm.params(params);
  for (auto* p : params) p->zero_grad();
  lstm.forward(x);
  const MatD dx = lstm.backward(r);

  check_param_grads(params, loss, 1e-5, 30);
  check_input_grads(x, dx, loss, 1e-5);
}

TEST(LstmLayer, IsCausal) {
  Rng rng = make_rng(31);
  nn::Lstm<double> lstm(3, 4, 2, rng);
  MatD x = random_mat(rng, 6, 3);
  const MatD y = lstm.forward(x);
  MatD x2 = x;
  x2.row(4).setConstant(9.0);  // future change
  const MatD y2 = lstm.forward(x2);
  EXPECT_LT((y.topRows(4) - y2.topRows(4)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT((y.row(4) - y2.row(4)).cwiseAbs().maxCoeff(), 1e-8);
}

// ---------------------------------------------------------------------------
// Dilated causal convolution
// ---------------------------------------------------------------------------

TEST(CausalConv, MatchesFiniteDifferences) {
  Rng rng = make_rng(40);
  nn::DilatedConvEncoder<double> enc(5, 8, 3, rng);  // dilations 1,2,4
  MatD x = random_mat(rng, 9, 5);
  const MatD r = random_mat(rng, 9, 8);

  const auto loss = [&] { return (enc.forward(x).array() * r.array()).sum(); };
  std::vector<nn::Param<double>*> params;
  enc.params(params);
  for (auto* p : params) p->zero_grad();
  enc.forward(x);
  const MatD dx = enc.backward(r);

  check_param_grads(params, loss, 1e-5, 30);
  check_input_grads(x, dx, loss, 1e-5);
}

TEST(CausalConv, RespectsReceptiveField) {
  Rng rng = make_rng(41);
  nn::DilatedConvEncoder<double> enc(2, 4, 4, rng);  // dilations 1,2,4,8
  MatD x = random_mat(rng, 20, 2);
  const MatD y = enc.forward(x);

  // Future inputs never affect the past.
  MatD x_future = x;
  x_future.row(19).setConstant(5.0);
  const MatD y_future = enc.forward(x_future);
  EXPECT_LT((y.topRows(19) - y_future.topRows(19)).cwiseAbs().maxCoeff(), 1e-12);

  // The receptive field of step t covers (at most) the past 15 steps.
  MatD x_old = x;
  x_old.row(0).setConstant(5.0);
  const MatD y_old = enc.forward(x_old);
  // Step 19 is 19 steps after row 0: outside the receptive field (1+1+2+4+8=16
  // steps ending at t), so it must be unchanged.
  EXPECT_LT((y.row(19) - y_old.row(19)).cwiseAbs().maxCoeff(), 1e-12);
  // Step 15 sees row 0 (15 <= 15): generically changed.
  EXPECT_GT((y.row(15) - y_old.row(15)).cwiseAbs().maxCoeff(), 1e-10);
}

// ---------------------------------------------------------------------------
// Attention
// ---------------------------------------------------------------------------

TEST(Attention, LayerNormMatchesFiniteDifferences) {
  Rng rng = make_rng(51);
  nn::LayerNorm<double> ln(7);
  std::vector<nn::Param<double>*> params;
  ln.params(params);
  params[0]->value = random_mat(rng, 1, 7, 0.5).array() + 1.0;  // gain
  params[1]->value = random_mat(rng, 1, 7, 0.3);                // bias
  MatD x = random_mat(rng, 4, 7, 2.0);
  const MatD r = random_mat(rng, 4, 7);

  const auto loss = [&] { return (ln.forward(x).array() * r.array()).sum(); };
  for (auto* p : params) p->zero_grad();
  ln.forward(x);
  const MatD dx = ln.backward(r);
  check_param_grads(params, loss, 1e-5, 14);
  check_input_grads(x, dx, loss, 1e-5, 28);
}

TEST(Attention, MultiHeadMatchesFiniteDifferences) {
  Rng rng = make_rng(52);
  nn::MultiHeadSelfAttention<double> mha(8, 2, rng);
  MatD x = random_mat(rng, 5, 8);
  const MatD r = random_mat(rng, 5, 8);

  const auto loss = [&] { return (mha.forward(x).array() * r.array()).sum(); };
  std::vector<nn::Param<double>*> params;
  mha.params(params);
  for (auto* p : params) p->zero_grad();
  mha.forward(x);
  const MatD dx = mha.backward(r);
  check_param_grads(params, loss, 1e-5, 20);
  check_input_grads(x, dx, loss, 1e-5, 30);
}

TEST(Attention, EncoderMatchesFiniteDifferences) {
  Rng rng = make_rng(53);
  nn::TransformerEncoder<double> enc(6, 16, 4, 2, rng);
  MatD x = random_mat(rng, 5, 6);
  const MatD r = random_mat(rng, 5, 16);

  const auto loss = [&] { return (enc.forward(x).array() * r.array()).sum(); };
  std::vector<nn::Param<double>*> params;
  enc.params(params);
  for (auto* p : params) p->zero_grad();
  enc.forward(x);
  const MatD dx = enc.backward(r);
  check_param_grads(params, loss, 2e-5, 10);
  check_input_grads(x, dx, loss, 2e-5, 24);
}

TEST(Attention, PositionalEncodingDistinguishesSteps) {
  const MatD pe = nn::positional_encoding<double>(60, 16);
  for (int a = 0; a < 60; ++a)
    for (int b = a + 1; b < 60; ++b)
      EXPECT_GT((pe.row(a) - pe.row(b)).cwiseAbs().maxCoeff(), 1e-4)
          << a << " vs " << b;
  EXPECT_LE(pe.maxCoeff(), 1.0);
  EXPECT_GE(pe.minCoeff(), -1.0);
}

TEST(Attention, OrderSensitivity) {
  Rng rng = make_rng(54);
  nn::TransformerEncoder<double> enc(4, 16, 4, 1, rng);
  const MatD x = random_mat(rng, 6, 4);
  MatD x_shuffled = x;
  x_shuffled.row(0).swap(x_shuffled.row(3));
  const MatD last_a = enc.forward(x).row(5);
  const MatD last_b = enc.forward(x_shuffled).row(5);
  // Without positions the last-step output would be permutation invariant;
  // with them it is not.
  EXPECT_GT((last_a - last_b).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Attention, RejectsIndivisibleHeads) {
  Rng rng = make_rng(55);
  EXPECT_THROW(nn::MultiHeadSelfAttention<double>(10, 4, rng), ConfigError);
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

TEST(AdamOptimizer, MatchesReferenceFormula) {
  nn::Param<double> p;
  p.resize(1, 2);
  p.value << 1.0, -2.0;

  nn::AdamOptions<double> opt;
  nn::Adam<double> adam(opt);
  adam.add(&p, 0.1);

  // Two steps with fixed gradients, checked against the textbook update.
  double m[2] = {0, 0}, v[2] = {0, 0};
  double ref[2] = {1.0, -2.0};
  const double g1[2] = {0.5, -1.5}, g2[2] = {-0.25, 0.75};
  const double* grads[2] = {g1, g2};
  for (int t = 1; t <= 2; ++t) {
    p.zero_grad();
    p.grad << grads[t - 1][0], grads[t - 1][1];
    adam.step();
    for (int i = 0; i < 2; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * grads[t - 1][i];
      v[i] = 0.999 * v[i] + 0.001 * grads[t - 1][i] * grads[t - 1][i];
      const double mh = m[i] / (1 - std::pow(0.9, t));
      const double vh = v[i] / (1 - std::pow(0.999, t));
      ref[i] -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
      EXPECT_NEAR(p.value(0, i), ref[i], 1e-12);
    }
  }
}

TEST(AdamOptimizer, MinimizesQuadratic) {
  Rng rng = make_rng(60);
  nn::Param<double> p;
  p.resize(1, 4);
  p.value = random_mat(rng, 1, 4, 2.0);
  const MatD target = random_mat(rng, 1, 4, 2.0);

  nn::Adam<double> adam;
  adam.add(&p, 0.05);
  for (int it = 0; it < 2000; ++it) {
    p.zero_grad();
    p.grad = 2 * (p.value - target);
    adam.step();
  }
  EXPECT_LT((p.value - target).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(AdamOptimizer, PerParameterLearningRates) {
  nn::Param<double> slow, fast;
  slow.resize(1, 1);
  fast.resize(1, 1);
  nn::Adam<double> adam;
  adam.add(&slow, 1e-4);
  adam.add(&fast, 1e-3);
  slow.grad << 1.0;
  fast.grad << 1.0;
  adam.step();
  // First Adam step size is ~lr regardless of gradient scale.
  EXPECT_NEAR(-slow.value(0, 0), 1e-4, 1e-8);
  EXPECT_NEAR(-fast.value(0, 0), 1e-3, 1e-7);
  EXPECT_EQ(adam.parameter_count(), 2);
  EXPECT_EQ(adam.steps(), 1);
}

TEST(ParamInit, HeBoundsRespected) {
  Rng rng = make_rng(70);
  nn::Param<double> p;
  p.init_he(20, 30, 180, rng);
  const double limit = std::sqrt(6.0 / 180);
  EXPECT_LE(p.value.maxCoeff(), limit);
  EXPECT_GE(p.value.minCoeff(), -limit);
  EXPECT_GT(p.value.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(p.grad.cwiseAbs().maxCoeff(), 0.0);
}
