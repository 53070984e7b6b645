#pragma once

// ============================================================================
// Supervised training loop.
//
// One snippet at a time through the network; minibatches of `batch_size`
// form via gradient accumulation (upstream gradients scaled by 1/batch).
// Adam runs with a reduced learning rate on the spatial encoder. After each
// epoch the overall (any-error) AUC on the validation split decides early
// stopping; the best-epoch weights are restored at the end. A multi-seed
// driver trains several independent runs and keeps the best by validation.
//
// Horizon handling: kFixed trains every presentation at one horizon;
// kRandom redraws the horizon (and its matching posterior label) per
// presentation, training a single horizon-conditioned model. Setting
// condition_on_horizon = false feeds a constant horizon token instead, so
// the network cannot condition — the unconditioned ablation.
// ============================================================================

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <vector>

#include <json.hpp>

#include "rhexis/eval/auc.hpp"
#include "rhexis/model/dataset.hpp"
#include "rhexis/model/network.hpp"

namespace rhexis::model {

enum class HorizonMode { kFixed, kRandom };

struct TrainOptions {
  int epochs = 10;
  int batch_size = 32;
  double lr_spatial = 5e-5;
  double lr_rest = 5e-4;
  int patience = 3;  // epochs without validation improvement before stopping
  HorizonMode horizon_mode = HorizonMode::kFixed;
  bool condition_on_horizon = true;
  int max_train_samples = 0;  // 0 = all; otherwise a seeded subset per epoch
  int max_eval_samples = 0;
  std::filesystem::path log_path;  // empty = no log file
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0;
  double val_auc = 0;
  bool improved = false;
};

struct TrainResult {
  AnticipationNet<float> net;
  double best_val_auc = 0;
  int best_epoch = -1;
  std::uint64_t seed = 0;
  std::vector<EpochLog> log;
};

inline std::vector<MatF> snapshot_params(AnticipationNet<float>& net) {
  std::vector<nn::Param<float>*> params;
  net.params(params);
  std::vector<MatF> snap;
  snap.reserve(params.size());
  for (auto* p : params) snap.push_back(p->value);
  return snap;
}

inline void restore_params(AnticipationNet<float>& net,
                           const std::vector<MatF>& snap) {
  std::vector<nn::Param<float>*> params;
  net.params(params);
  if (params.size() != snap.size())
    throw DataError("parameter snapshot does not match the network");
  for (size_t i = 0; i < params.size(); ++i) params[i]->value = snap[i];
}

// Overall (any-error) AUC of the network on labeled samples at one horizon.
// Labels are recomputed for the requested horizon, so sample lists built at
// a longer horizon evaluate correctly at shorter ones.
inline double evaluate_overall_auc(AnticipationNet<float>& net,
                                   FrameStore& store,
                                   const data::Corpus& corpus,
                                   const std::vector<data::SampleRef>& samples,
                                   int horizon, bool condition_on_horizon,
                                   int max_samples = 0) {
  const ModelConfig& mc = net.config();
  data::SnippetSpec spec{mc.frames, mc.stride, horizon};
  std::vector<double> scores;
  std::vector<int> labels;
  const size_t limit = max_samples > 0
                           ? std::min<size_t>(max_samples, samples.size())
                           : samples.size();
  for (size_t i = 0; i < limit; ++i) {
    const data::SampleRef& ref = samples[i];
    const data::ClassVector y =
        data::prediction_label(corpus.labels[ref.video].errors, ref.anchor, spec);
    const MatF frames = store.snippet(ref, spec);
    const auto out = net.forward(frames, condition_on_horizon ? horizon : 1);
    scores.push_back(out.pred_probs(0, kAnyError));
    labels.push_back(y[kAnyError] > 0.5f ? 1 : 0);
  }
  try {
    return rhexis::auc(scores, labels);
  } catch (const DataError&) {
    return 0.5;  // degenerate split (single class present)
  }
}

inline TrainResult train_anticipation(
    const data::Corpus& corpus, FrameStore& store, const ModelConfig& mc,
    const std::vector<data::SampleRef>& train_samples,
    const std::vector<data::SampleRef>& val_samples, int base_horizon,
    const TrainOptions& opt, std::uint64_t seed,
    const AnticipationNet<float>* warm_start = nullptr) {
  if (train_samples.empty()) throw DataError("no training samples");
  TrainResult result;
  result.seed = seed;
  if (warm_start) {
    result.net = *warm_start;  // e.g. pretext-pretrained encoders
  } else {
    result.net.init(mc, seed);
  }

  nn::Adam<float> adam;
  {
    std::vector<nn::Param<float>*> group;
    result.net.spatial_params(group);
    adam.add(group, static_cast<float>(opt.lr_spatial));
    group.clear();
    result.net.other_params(group);
    adam.add(group, static_cast<float>(opt.lr_rest));
  }

  Rng rng = make_rng(derive_seed(seed, "train"));
  std::vector<size_t> order(train_samples.size());
  std::iota(order.begin(), order.end(), 0);

  std::optional<std::ofstream> log_file;
  if (!opt.log_path.empty())
    log_file.emplace(opt.log_path, std::ios::app);

  std::vector<MatF> best_params = snapshot_params(result.net);
  int stale = 0;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const size_t epoch_n =
        opt.max_train_samples > 0
            ? std::min<size_t>(opt.max_train_samples, order.size())
            : order.size();

    double loss_sum = 0;
    size_t batch_start = 0;
    while (batch_start < epoch_n) {
      const size_t batch_n = std::min<size_t>(opt.batch_size, epoch_n - batch_start);
      adam.zero_grad();
      for (size_t b = 0; b < batch_n; ++b) {
        const data::SampleRef& ref = train_samples[order[batch_start + b]];
        const int horizon = opt.horizon_mode == HorizonMode::kRandom
                                ? uniform_int(rng, 1, 5)
                                : base_horizon;
        data::SnippetSpec spec{mc.frames, mc.stride, horizon};
        const MatF frames = store.snippet(ref, spec);
        const MatF current = current_target_matrix(corpus, ref, spec);
        const data::ClassVector yv = data::prediction_label(
            corpus.labels[ref.video].errors, ref.anchor, spec);
        MatF pred_target(1, kNumClasses);
        for (int c = 0; c < kNumClasses; ++c) pred_target(0, c) = yv[c];

        const auto out =
            result.net.forward(frames, opt.condition_on_horizon ? horizon : 1);
        NetworkGrads<float> grads;
        const auto loss =
            supervised_loss<float>(mc, out, current, pred_target, &grads);
        loss_sum += loss.total;
        const float inv = 1.0f / static_cast<float>(batch_n);
        if (grads.d_pred_logits.size()) grads.d_pred_logits *= inv;
        if (grads.d_cc_att.size()) grads.d_cc_att *= inv;
        if (grads.d_cc_logits.size()) grads.d_cc_logits *= inv;
        result.net.backward(grads);
      }
      adam.step();
      batch_start += batch_n;
    }

    // Validation: at the base horizon in fixed mode; averaged over all five
    // horizons in random mode.
    double val_auc = 0;
    if (opt.horizon_mode == HorizonMode::kRandom) {
      for (int h = 1; h <= 5; ++h)
        val_auc += evaluate_overall_auc(result.net, store, corpus, val_samples,
                                        h, opt.condition_on_horizon,
                                        opt.max_eval_samples);
      val_auc /= 5;
    } else {
      val_auc = evaluate_overall_auc(result.net, store, corpus, val_samples,
                                     base_horizon, opt.condition_on_horizon,
                                     opt.max_eval_samples);
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / static_cast<double>(epoch_n);
    entry.val_auc = val_auc;
    entry.improved = val_auc > result.best_val_auc;
    result.log.push_back(entry);
    if (log_file) {
      nlohmann::json j{{"seed", seed},
                       {"epoch", epoch},
                       {"train_loss", entry.train_loss},
                       {"val_auc", entry.val_auc},
                       {"improved", entry.improved}};
      *log_file << j.dump() << "\n";
    }

    if (entry.improved) {
      result.best_val_auc = val_auc;
      result.best_epoch = epoch;
      best_params = snapshot_params(result.net);
      stale = 0;
    } else if (++stale >= opt.patience) {
      break;
    }
  }
  restore_params(result.net, best_params);
  return result;
}

// Train one run per seed; return the run with the best validation AUC.
inline TrainResult train_best_of(
    const data::Corpus& corpus, FrameStore& store, const ModelConfig& mc,
    const std::vector<data::SampleRef>& train_samples,
    const std::vector<data::SampleRef>& val_samples, int base_horizon,
    const TrainOptions& opt, const std::vector<std::uint64_t>& seeds,
    const AnticipationNet<float>* warm_start = nullptr) {
  if (seeds.empty()) throw ConfigError("train_best_of: no seeds");
  std::optional<TrainResult> best;
  for (std::uint64_t seed : seeds) {
    TrainResult run =
        train_anticipation(corpus, store, mc, train_samples, val_samples,
                           base_horizon, opt, seed, warm_start);
    if (!best || run.best_val_auc > best->best_val_auc) best = std::move(run);
  }
  return std::move(*best);
}

}  // namespace rhexis::model
