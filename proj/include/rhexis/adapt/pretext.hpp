#pragma once

// ============================================================================
// Self-supervised pretext tasks on unlabeled snippets. Both tasks train the
// spatial + temporal encoders through a small task head; the head is
// dropped afterwards and the encoders warm-start supervised training.
//
//   Frame order:     binary — were the snippet's frames shuffled? Needs at
//                    least 2 frames; the shuffle is never the identity.
//   Reconstruction:  regress one quadrant of the frame `horizon` seconds
//                    past the anchor from the temporal summary, through an
//                    upsample+conv decoder; MSE in pixel space.
// ============================================================================

#include <algorithm>
#include <numeric>
#include <vector>

#include "rhexis/model/dataset.hpp"
#include "rhexis/model/network.hpp"
#include "rhexis/nn/conv2d.hpp"

namespace rhexis::adapt {

struct PretextOptions {
  int epochs = 2;
  int batch_size = 16;
  double lr_spatial = 5e-5;
  double lr_rest = 5e-4;
  int max_samples_per_epoch = 0;  // 0 = all
};

struct PretextResult {
  double final_loss = 0;
  double accuracy = 0;  // frame order only
  int steps = 0;
};

// ----------------------------------------------------------------------------
// Frame order
// ----------------------------------------------------------------------------

namespace detail {

// A random non-identity permutation of [0, n).
inline std::vector<int> shuffled_order(Rng& rng, int n) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  do {
    std::shuffle(order.begin(), order.end(), rng);
  } while (std::is_sorted(order.begin(), order.end()));
  return order;
}

}  // namespace detail

inline PretextResult pretrain_frame_order(
    model::AnticipationNet<float>& net, model::FrameStore& store,
    const std::vector<data::SampleRef>& samples, const data::SnippetSpec& spec,
    const PretextOptions& opt, std::uint64_t seed) {
  if (spec.frames < 2)
    throw ConfigError("frame-order pretext needs at least 2 frames");
  if (samples.empty()) throw DataError("frame-order pretext: no samples");

  const model::ModelConfig& mc = net.config();
  Rng rng = make_rng(derive_seed(seed, "frame_order"));
  nn::Dense<float> head(mc.temporal_dim, 1, rng);

  nn::Adam<float> adam;
  {
    std::vector<nn::Param<float>*> group;
    net.spatial_params(group);
    adam.add(group, static_cast<float>(opt.lr_spatial));
    group.clear();
    net.other_params(group);  // temporal encoder included; unused heads get
    adam.add(group, static_cast<float>(opt.lr_rest));  // zero gradients
    group.clear();
    head.params(group);
    adam.add(group, static_cast<float>(opt.lr_rest));
  }

  std::vector<size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);

  PretextResult result;
  double loss_sum = 0;
  long correct = 0, total = 0;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const size_t epoch_n =
        opt.max_samples_per_epoch > 0
            ? std::min<size_t>(opt.max_samples_per_epoch, order.size())
            : order.size();
    size_t start = 0;
    while (start < epoch_n) {
      const size_t batch_n = std::min<size_t>(opt.batch_size, epoch_n - start);
      adam.zero_grad();
      for (size_t b = 0; b < batch_n; ++b) {
        MatF frames = store.snippet(samples[order[start + b]], spec);
        const bool shuffle = uniform(rng, 0.0, 1.0) < 0.5;
        if (shuffle) {
          const std::vector<int> perm = detail::shuffled_order(rng, spec.frames);
          MatF shuffled(frames.rows(), frames.cols());
          for (int i = 0; i < spec.frames; ++i)
            shuffled.row(i) = frames.row(perm[i]);
          frames = std::move(shuffled);
        }
        const MatF tf = net.encode_sequence(frames);
        const MatF logit = head.forward(tf.bottomRows(1));
        MatF y(1, 1);
        y(0, 0) = shuffle ? 1.0f : 0.0f;
        MatF dz;
        loss_sum += nn::bce_with_logits<float>(logit, y, &dz);
        correct += ((logit(0, 0) > 0) == shuffle) ? 1 : 0;
        ++total;
        dz *= 1.0f / static_cast<float>(batch_n);
        const MatF d_tr = head.backward(dz);
        MatF d_tf = MatF::Zero(tf.rows(), tf.cols());
        d_tf.row(tf.rows() - 1) = d_tr;
        net.backward_sequence(d_tf);
      }
      adam.step();
      ++result.steps;
      start += batch_n;
    }
  }
  result.final_loss = loss_sum / std::max<long>(1, total);
  result.accuracy = static_cast<double>(correct) / std::max<long>(1, total);
  return result;  // the head goes out of scope: discarded by design
}

// ----------------------------------------------------------------------------
// Future-quadrant reconstruction
// ----------------------------------------------------------------------------

// TR -> dense -> (C0, sz/8, sz/8) -> [up2x + conv3x3 + relu] -> [up2x +
// conv3x3] -> sigmoid, producing one (sz/2, sz/2) RGB quadrant.
template <typename S>
class QuadrantDecoder {
 public:
  QuadrantDecoder(int feature_dim, int frame_size, Rng& rng) {
    if (frame_size % 8 != 0)
      throw ConfigError("reconstruction decoder needs frame_size % 8 == 0");
    base_ = frame_size / 8;
    fc_.init(feature_dim, c0_ * base_ * base_, rng);
    conv1_.init(c0_, c1_, 3, 1, 1, rng);
    conv2_.init(c1_, 3, 3, 1, 1, rng);
  }

  int quadrant_size() const { return base_ * 4; }

  Mat<S> forward(const Mat<S>& tr) {
    h0_ = nn::relu<S>(fc_.forward(tr));
    const Mat<S> u1 = nn::upsample2x<S>(h0_, c0_, base_, base_);
    h1_ = nn::relu<S>(conv1_.forward(u1, 2 * base_, 2 * base_));
    const Mat<S> u2 = nn::upsample2x<S>(h1_, c1_, 2 * base_, 2 * base_);
    logits_ = conv2_.forward(u2, 4 * base_, 4 * base_);
    probs_ = nn::sigmoid<S>(logits_);
    return probs_;
  }

  Mat<S> backward(const Mat<S>& d_probs) {
    const Mat<S> d_logits = nn::sigmoid_backward<S>(d_probs, probs_);
    const Mat<S> du2 = conv2_.backward(d_logits);
    const Mat<S> dh1 = nn::upsample2x_backward<S>(du2, c1_, 2 * base_, 2 * base_);
    const Mat<S> du1 = conv1_.backward(nn::relu_backward<S>(dh1, h1_));
    const Mat<S> dh0 = nn::upsample2x_backward<S>(du1, c0_, base_, base_);
    return fc_.backward(nn::relu_backward<S>(dh0, h0_));
  }

  void params(std::vector<nn::Param<S>*>& out) {
    fc_.params(out);
    conv1_.params(out);
    conv2_.params(out);
  }

 private:
  static constexpr int c0_ = 32, c1_ = 16;
  int base_ = 0;
  nn::Dense<S> fc_;
  nn::Conv2d<S> conv1_, conv2_;
  Mat<S> h0_, h1_, logits_, probs_;
};

// Extract quadrant q (0=TL, 1=TR, 2=BL, 3=BR) of frame t of a quantized
// channel-major video matrix, as float in [0, 1].
template <typename U8Mat>
MatF frame_quadrant(const U8Mat& video, int t, int frame_size, int q) {
  const int half = frame_size / 2;
  const int y0 = (q / 2) * half, x0 = (q % 2) * half;
  MatF out(1, 3 * half * half);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < half; ++y)
      for (int x = 0; x < half; ++x)
        out(0, (c * half + y) * half + x) =
            static_cast<float>(
                video(t, (c * frame_size + y0 + y) * frame_size + x0 + x)) /
            255.0f;
  return out;
}

inline PretextResult pretrain_reconstruction(
    model::AnticipationNet<float>& net, model::FrameStore& store,
    const std::vector<data::SampleRef>& samples, const data::SnippetSpec& spec,
    const PretextOptions& opt, std::uint64_t seed) {
  if (samples.empty()) throw DataError("reconstruction pretext: no samples");
  const model::ModelConfig& mc = net.config();
  Rng rng = make_rng(derive_seed(seed, "reconstruction"));
  QuadrantDecoder<float> decoder(mc.temporal_dim, mc.frame_size, rng);

  nn::Adam<float> adam;
  {
    std::vector<nn::Param<float>*> group;
    net.spatial_params(group);
    adam.add(group, static_cast<float>(opt.lr_spatial));
    group.clear();
    net.other_params(group);
    adam.add(group, static_cast<float>(opt.lr_rest));
    group.clear();
    decoder.params(group);
    adam.add(group, static_cast<float>(opt.lr_rest));
  }

  std::vector<size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);

  PretextResult result;
  double loss_sum = 0;
  long total = 0;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const size_t epoch_n =
        opt.max_samples_per_epoch > 0
            ? std::min<size_t>(opt.max_samples_per_epoch, order.size())
            : order.size();
    size_t start = 0;
    while (start < epoch_n) {
      const size_t batch_n = std::min<size_t>(opt.batch_size, epoch_n - start);
      adam.zero_grad();
      for (size_t b = 0; b < batch_n; ++b) {
        const data::SampleRef& ref = samples[order[start + b]];
        const int future = ref.anchor + kFps * spec.horizon;
        const auto& video = store.video(ref.video);
        if (future >= video.rows()) continue;  // cannot happen for valid anchors
        const MatF frames = store.snippet(ref, spec);
        const int q = uniform_int(rng, 0, 3);
        const MatF target = frame_quadrant(video, future, mc.frame_size, q);

        const MatF tf = net.encode_sequence(frames);
        const MatF pred = decoder.forward(tf.bottomRows(1));
        const float inv_n = 1.0f / static_cast<float>(pred.cols());
        const MatF diff = pred - target;
        loss_sum += diff.array().square().sum() * inv_n;
        ++total;
        MatF d_pred =
            diff * (2.0f * inv_n / static_cast<float>(batch_n));
        const MatF d_tr = decoder.backward(d_pred);
        MatF d_tf = MatF::Zero(tf.rows(), tf.cols());
        d_tf.row(tf.rows() - 1) = d_tr;
        net.backward_sequence(d_tf);
      }
      adam.step();
      ++result.steps;
      start += batch_n;
    }
  }
  result.final_loss = loss_sum / std::max<long>(1, total);
  return result;
}

}  // namespace rhexis::adapt
