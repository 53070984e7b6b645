#pragma once

// ============================================================================
// The anticipation network.
//
// Per snippet (L sampled frames, one anticipation horizon):
//   frames (L, 3*H*W) -> spatial encoder -> SR (L, I)
//   SR -> temporal encoder -> per-step features TF (L, T); summary TR is
//   the last step.
//   TF -> current head -> CC logits (L, 6); attention pooling over steps
//   gives pooled current probabilities CC_att (1, 6).
//   horizon (1..5) -> one-hot -> 2-layer embedding TE (1, E).
//   [TR | CC_att | TE] -> prediction head -> FP logits (1, 6).
//
// backward() takes gradients w.r.t. the prediction logits, the pooled
// current probabilities (or per-frame current logits), and optionally the
// temporal summary (for feature-space adaptation), and accumulates into
// all parameters.
// ============================================================================

#include <vector>

#include "rhexis/model/config.hpp"
#include "rhexis/nn/attention.hpp"
#include "rhexis/nn/conv2d.hpp"
#include "rhexis/nn/dense.hpp"
#include "rhexis/nn/lstm.hpp"
#include "rhexis/nn/ops.hpp"
#include "rhexis/nn/tcn.hpp"

namespace rhexis::model {

// Conv blocks (3x3, stride 2, pad 1, ReLU) + global average pooling.
template <typename S>
class SpatialEncoder {
 public:
  SpatialEncoder() = default;
  SpatialEncoder(int frame_size, const std::vector<int>& widths, Rng& rng) {
    init(frame_size, widths, rng);
  }

  void init(int frame_size, const std::vector<int>& widths, Rng& rng) {
    size_ = frame_size;
    widths_ = widths;
    convs_.clear();
    int in_ch = 3;
    for (int w : widths) {
      convs_.emplace_back(in_ch, w, 3, 2, 1, rng);
      in_ch = w;
    }
  }

  int out_dim() const { return widths_.back(); }

  // (L, 3*H*W) -> (L, I)
  Mat<S> forward(const Mat<S>& frames) {
    Mat<S> h = frames;
    int res = size_;
    acts_.clear();
    for (auto& conv : convs_) {
      h = nn::relu<S>(conv.forward(h, res, res));
      acts_.push_back(h);
      res /= 2;
    }
    last_res_ = res;
    return nn::global_avg_pool<S>(h, widths_.back(), res, res);
  }

  Mat<S> backward(const Mat<S>& d_features) {
    Mat<S> d = nn::global_avg_pool_backward<S>(d_features, widths_.back(),
                                               last_res_, last_res_);
    for (int i = static_cast<int>(convs_.size()) - 1; i >= 0; --i)
      d = convs_[i].backward(nn::relu_backward<S>(d, acts_[i]));
    return d;
  }

  void params(std::vector<nn::Param<S>*>& out) {
    for (auto& conv : convs_) conv.params(out);
  }

 private:
  int size_ = 0, last_res_ = 0;
  std::vector<int> widths_;
  std::vector<nn::Conv2d<S>> convs_;
  std::vector<Mat<S>> acts_;
};

template <typename S>
struct NetworkOutput {
  Mat<S> sr;           // (L, I) spatial features
  Mat<S> tf;           // (L, T) per-step temporal features
  Mat<S> tr;           // (1, T) temporal summary (last step)
  Mat<S> cc_logits;    // (L, 6) current-error logits
  Mat<S> cc_probs;     // (L, 6)
  Mat<S> alpha;        // (L, 1) attention pooling weights (sums to 1)
  Mat<S> cc_att;       // (1, 6) pooled current probabilities
  Mat<S> pred_logits;  // (1, 6) anticipated-error logits
  Mat<S> pred_probs;   // (1, 6)
};

template <typename S>
struct NetworkGrads {
  Mat<S> d_pred_logits;  // (1, 6); empty means zero
  Mat<S> d_cc_att;       // (1, 6) gradient on pooled current probabilities
  Mat<S> d_cc_logits;    // (L, 6) per-frame variant
  Mat<S> d_tr;           // (1, T) adaptation gradient on the summary
};

template <typename S>
class AnticipationNet {
 public:
  AnticipationNet() = default;
  AnticipationNet(const ModelConfig& cfg, std::uint64_t seed) {
    init(cfg, seed);
  }

  void init(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    cfg_ = cfg;
    Rng rng = make_rng(derive_seed(seed, "net"));
    spatial_.init(cfg.frame_size, cfg.spatial_widths, rng);
    const int i_dim = cfg.spatial_dim();
    switch (cfg.temporal) {
      case TemporalKind::kLstm:
        lstm_.init(i_dim, cfg.temporal_dim, cfg.lstm_layers, rng);
        break;
      case TemporalKind::kDilatedConv:
        tcn_.init(i_dim, cfg.temporal_dim, cfg.conv_layers, rng);
        break;
      case TemporalKind::kAttention:
        attn_.init(i_dim, cfg.temporal_dim, cfg.attn_heads, cfg.attn_layers,
                   rng);
        break;
    }
    current_head_.init(cfg.temporal_dim, kNumClasses, rng);
    att_score_.init(cfg.temporal_dim, 1, rng);
    h1_.init(5, cfg.horizon_dim, rng);
    h2_.init(cfg.horizon_dim, cfg.horizon_dim, rng);
    p1_.init(cfg.fused_dim(), cfg.head_hidden, rng);
    p2_.init(cfg.head_hidden, kNumClasses, rng);
  }

  const ModelConfig& config() const { return cfg_; }

  // Spatial encoding alone (exposed for the latency harness and pretext
  // decoders).
  Mat<S> encode_frames(const Mat<S>& frames) { return spatial_.forward(frames); }

  // Encoder-only path for pretext training: spatial + temporal forward to
  // per-step features; backward through the same two stages. Accepts any
  // sequence length (pretext snippets need not match cfg.frames).
  Mat<S> encode_sequence(const Mat<S>& frames) {
    return temporal_forward(spatial_.forward(frames));
  }
  void backward_sequence(const Mat<S>& d_tf) {
    spatial_.backward(temporal_backward(d_tf));
  }

  // Spatial stage alone (timing harnesses measure it separately).
  Mat<S> spatial_forward(const Mat<S>& frames) {
    return spatial_.forward(frames);
  }

  NetworkOutput<S> forward(const Mat<S>& frames, int horizon) {
    if (horizon < 1 || horizon > 5)
      throw ConfigError("horizon must be in [1,5]");
    if (frames.rows() != cfg_.frames)
      throw DataError("snippet frame count does not match the model");
    NetworkOutput<S> out;
    out.sr = spatial_.forward(frames);
    out.tf = temporal_forward(out.sr);
    out.tr = out.tf.row(cfg_.frames - 1);
    out.cc_logits = current_head_.forward(out.tf);
    out.cc_probs = nn::sigmoid<S>(out.cc_logits);
    scores_ = att_score_.forward(out.tf);  // (L, 1)
    out.alpha = nn::softmax_rows<S>(scores_.transpose()).transpose();
    out.cc_att = out.alpha.transpose() * out.cc_probs;  // (1, 6)

    onehot_ = Mat<S>::Zero(1, 5);
    onehot_(0, horizon - 1) = static_cast<S>(1);
    h1_out_ = nn::relu<S>(h1_.forward(onehot_));
    te_ = h2_.forward(h1_out_);

    fused_.resize(1, cfg_.fused_dim());
    fused_ << out.tr, out.cc_att, te_;
    p1_out_ = nn::relu<S>(p1_.forward(fused_));
    out.pred_logits = p2_.forward(p1_out_);
    out.pred_probs = nn::sigmoid<S>(out.pred_logits);
    last_ = out;  // cached activations for backward
    return out;
  }

  void backward(const NetworkGrads<S>& g) {
    const int L = cfg_.frames;
    const int T = cfg_.temporal_dim;
    Mat<S> d_fused = Mat<S>::Zero(1, cfg_.fused_dim());
    if (g.d_pred_logits.size() > 0) {
      const Mat<S> d_hidden =
          nn::relu_backward<S>(p2_.backward(g.d_pred_logits), p1_out_);
      d_fused = p1_.backward(d_hidden);
    }
    Mat<S> d_tr = d_fused.middleCols(0, T);
    if (g.d_tr.size() > 0) d_tr += g.d_tr;
    Mat<S> d_cc_att = d_fused.middleCols(T, kNumClasses);
    if (g.d_cc_att.size() > 0) d_cc_att += g.d_cc_att;
    const Mat<S> d_te = d_fused.middleCols(T + kNumClasses, cfg_.horizon_dim);
    h1_.backward(nn::relu_backward<S>(h2_.backward(d_te), h1_out_));

    // cc_att = alpha^T cc_probs.
    const Mat<S> d_alpha = last_.cc_probs * d_cc_att.transpose();  // (L, 1)
    Mat<S> d_cc_probs = last_.alpha * d_cc_att;                    // (L, 6)
    Mat<S> d_cc_logits =
        nn::sigmoid_backward<S>(d_cc_probs, last_.cc_probs);
    if (g.d_cc_logits.size() > 0) d_cc_logits += g.d_cc_logits;

    const Mat<S> d_scores =
        nn::softmax_rows_backward<S>(d_alpha.transpose(),
                                     last_.alpha.transpose())
            .transpose();

    Mat<S> d_tf = current_head_.backward(d_cc_logits);
    d_tf += att_score_.backward(d_scores);
    d_tf.row(L - 1) += d_tr;

    const Mat<S> d_sr = temporal_backward(d_tf);
    spatial_.backward(d_sr);
  }

  void spatial_params(std::vector<nn::Param<S>*>& out) { spatial_.params(out); }

  void other_params(std::vector<nn::Param<S>*>& out) {
    temporal_params(out);
    head_params(out);
  }

  // Everything past the temporal encoder: current head, attention scorer,
  // horizon embedding, fusion head. Untouched by encoder-only pretraining.
  void head_params(std::vector<nn::Param<S>*>& out) {
    current_head_.params(out);
    att_score_.params(out);
    h1_.params(out);
    h2_.params(out);
    p1_.params(out);
    p2_.params(out);
  }

  void params(std::vector<nn::Param<S>*>& out) {
    spatial_params(out);
    other_params(out);
  }

 private:
  Mat<S> temporal_forward(const Mat<S>& sr) {
    switch (cfg_.temporal) {
      case TemporalKind::kLstm: return lstm_.forward(sr);
      case TemporalKind::kDilatedConv: return tcn_.forward(sr);
      case TemporalKind::kAttention: return attn_.forward(sr);
    }
    throw ConfigError("bad temporal kind");
  }

  Mat<S> temporal_backward(const Mat<S>& d_tf) {
    switch (cfg_.temporal) {
      case TemporalKind::kLstm: return lstm_.backward(d_tf);
      case TemporalKind::kDilatedConv: return tcn_.backward(d_tf);
      case TemporalKind::kAttention: return attn_.backward(d_tf);
    }
    throw ConfigError("bad temporal kind");
  }

  void temporal_params(std::vector<nn::Param<S>*>& out) {
    switch (cfg_.temporal) {
      case TemporalKind::kLstm: lstm_.params(out); break;
      case TemporalKind::kDilatedConv: tcn_.params(out); break;
      case TemporalKind::kAttention: attn_.params(out); break;
    }
  }

  ModelConfig cfg_;
  SpatialEncoder<S> spatial_;
  nn::Lstm<S> lstm_;
  nn::DilatedConvEncoder<S> tcn_;
  nn::TransformerEncoder<S> attn_;
  nn::Dense<S> current_head_, att_score_, h1_, h2_, p1_, p2_;

  // forward caches
  NetworkOutput<S> last_;
  Mat<S> scores_, onehot_, h1_out_, te_, fused_, p1_out_;
};

// ----------------------------------------------------------------------------
// Supervised loss: lambda_current * L(current) + L(prediction), each a BCE
// summed over all 6 classes. The pooled current target is the per-class OR
// over the sampled frames; the per-frame variant scores each step.
// Populates `grads` ready for backward().
// ----------------------------------------------------------------------------
template <typename S>
struct LossBreakdown {
  S current = 0;
  S prediction = 0;
  S total = 0;
};

template <typename S>
LossBreakdown<S> supervised_loss(const ModelConfig& cfg,
                                 const NetworkOutput<S>& out,
                                 const Mat<S>& current_targets,  // (L, 6)
                                 const Mat<S>& pred_target,      // (1, 6)
                                 NetworkGrads<S>* grads) {
  LossBreakdown<S> loss;
  Mat<S> d_pred;
  loss.prediction = nn::bce_with_logits<S>(out.pred_logits, pred_target, &d_pred);
  if (grads) grads->d_pred_logits = d_pred;

  const S lam = static_cast<S>(cfg.lambda_current);
  if (cfg.per_frame_current) {
    Mat<S> d_cc;
    // Mean over frames keeps the scale comparable to the pooled variant.
    loss.current = nn::bce_with_logits<S>(out.cc_logits, current_targets, &d_cc) /
                   static_cast<S>(cfg.frames);
    if (grads) grads->d_cc_logits = d_cc * (lam / static_cast<S>(cfg.frames));
  } else {
    const Mat<S> pooled_target =
        current_targets.colwise().maxCoeff();  // per-class OR
    Mat<S> d_att;
    loss.current = nn::bce_on_probs<S>(out.cc_att, pooled_target, &d_att);
    if (grads) grads->d_cc_att = d_att * lam;
  }
  loss.total = lam * loss.current + loss.prediction;
  return loss;
}

}  // namespace rhexis::model
