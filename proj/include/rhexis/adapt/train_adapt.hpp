#pragma once

// ============================================================================
// Domain-adaptive training: supervised loss on labeled source snippets plus
// a feature-alignment penalty between source and target temporal summaries.
//
// Each optimizer step accumulates
//   (1) the supervised gradient of a source minibatch, and
//   (2) lambda_adapt times the discrepancy gradient between the TR features
//       of a small source batch and a small target batch.
// The discrepancy needs the whole batch at once, so it runs in two passes:
// forward all snippets to collect TR rows, differentiate the batch loss,
// then re-forward each snippet and push its TR row gradient back through.
//
// Early stopping follows the source-domain validation AUC; target labels are
// never consulted during training.
// ============================================================================

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <vector>

#include <json.hpp>

#include "rhexis/adapt/discrepancy.hpp"
#include "rhexis/model/trainer.hpp"

namespace rhexis::adapt {

struct AdaptOptions {
  int epochs = 10;
  int batch_supervised = 32;
  int batch_adapt = 8;  // source rows and target rows per discrepancy batch
  double lr_spatial = 5e-5;
  double lr_rest = 5e-4;
  double lambda_adapt = 1.0;
  DiscrepancyKind kind = DiscrepancyKind::kCoral;
  double sigma = 0;  // MMD bandwidth; <= 0 selects the median heuristic
  int patience = 3;
  int max_train_samples = 0;  // 0 = all; subset of supervised samples per epoch
  int max_eval_samples = 0;
  std::filesystem::path log_path;

  void validate() const {
    if (batch_supervised < 1) throw ConfigError("batch_supervised must be >= 1");
    if (batch_adapt < 2)
      throw ConfigError("batch_adapt must be >= 2 for batch statistics");
    if (lambda_adapt < 0) throw ConfigError("lambda_adapt must be >= 0");
  }
};

struct AdaptEpochLog {
  int epoch = 0;
  double train_loss = 0;   // mean supervised loss per snippet
  double discrepancy = 0;  // mean unweighted discrepancy per step
  double val_auc = 0;      // source validation
  bool improved = false;
};

struct AdaptResult {
  model::AnticipationNet<float> net;
  double best_val_auc = 0;
  int best_epoch = -1;
  std::uint64_t seed = 0;
  std::vector<AdaptEpochLog> log;
};

namespace detail {

// Endless shuffled pass over a sample list; reshuffles when exhausted.
class SampleCycle {
 public:
  SampleCycle(const std::vector<data::SampleRef>* samples, std::uint64_t seed)
      : samples_(samples), rng_(make_rng(seed)), order_(samples->size()) {
    std::iota(order_.begin(), order_.end(), 0);
    std::shuffle(order_.begin(), order_.end(), rng_);
  }

  const data::SampleRef& next() {
    if (pos_ >= order_.size()) {
      std::shuffle(order_.begin(), order_.end(), rng_);
      pos_ = 0;
    }
    return (*samples_)[order_[pos_++]];
  }

 private:
  const std::vector<data::SampleRef>* samples_;
  Rng rng_;
  std::vector<size_t> order_;
  size_t pos_ = 0;
};

}  // namespace detail

inline AdaptResult train_adapted(
    const data::Corpus& corpus, model::FrameStore& store,
    const model::ModelConfig& mc,
    const std::vector<data::SampleRef>& source_train,
    const std::vector<data::SampleRef>& source_val,
    const std::vector<data::SampleRef>& target_train, int horizon,
    const AdaptOptions& opt, std::uint64_t seed,
    const model::AnticipationNet<float>* warm_start = nullptr) {
  opt.validate();
  if (source_train.empty()) throw DataError("no source training samples");
  if (opt.lambda_adapt > 0 && target_train.size() < 2)
    throw DataError("adaptation needs at least 2 target samples");

  AdaptResult result;
  result.seed = seed;
  if (warm_start) {
    result.net = *warm_start;
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

  Rng rng = make_rng(derive_seed(seed, "adapt"));
  detail::SampleCycle source_cycle(&source_train,
                                   derive_seed(seed, "adapt_source"));
  detail::SampleCycle target_cycle(&target_train,
                                   derive_seed(seed, "adapt_target"));
  std::vector<size_t> order(source_train.size());
  std::iota(order.begin(), order.end(), 0);

  const data::SnippetSpec spec{mc.frames, mc.stride, horizon};

  std::optional<std::ofstream> log_file;
  if (!opt.log_path.empty()) log_file.emplace(opt.log_path, std::ios::app);

  std::vector<MatF> best_params = model::snapshot_params(result.net);
  int stale = 0;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const size_t epoch_n =
        opt.max_train_samples > 0
            ? std::min<size_t>(opt.max_train_samples, order.size())
            : order.size();

    double loss_sum = 0, disc_sum = 0;
    long steps = 0;
    size_t batch_start = 0;
    while (batch_start < epoch_n) {
      const size_t batch_n =
          std::min<size_t>(opt.batch_supervised, epoch_n - batch_start);
      adam.zero_grad();

      // --- supervised source pass -----------------------------------------
      for (size_t b = 0; b < batch_n; ++b) {
        const data::SampleRef& ref = source_train[order[batch_start + b]];
        const MatF frames = store.snippet(ref, spec);
        const MatF current = model::current_target_matrix(corpus, ref, spec);
        const data::ClassVector yv = data::prediction_label(
            corpus.labels[ref.video].errors, ref.anchor, spec);
        MatF pred_target(1, kNumClasses);
        for (int c = 0; c < kNumClasses; ++c) pred_target(0, c) = yv[c];

        const auto out = result.net.forward(frames, horizon);
        model::NetworkGrads<float> grads;
        const auto loss = model::supervised_loss<float>(mc, out, current,
                                                        pred_target, &grads);
        loss_sum += loss.total;
        const float inv = 1.0f / static_cast<float>(batch_n);
        if (grads.d_pred_logits.size()) grads.d_pred_logits *= inv;
        if (grads.d_cc_att.size()) grads.d_cc_att *= inv;
        if (grads.d_cc_logits.size()) grads.d_cc_logits *= inv;
        result.net.backward(grads);
      }

      // --- discrepancy pass -----------------------------------------------
      if (opt.lambda_adapt > 0) {
        std::vector<data::SampleRef> src_batch, tgt_batch;
        MatF xs(opt.batch_adapt, mc.temporal_dim);
        MatF xt(opt.batch_adapt, mc.temporal_dim);
        for (int b = 0; b < opt.batch_adapt; ++b) {
          src_batch.push_back(source_cycle.next());
          tgt_batch.push_back(target_cycle.next());
          xs.row(b) =
              result.net.forward(store.snippet(src_batch.back(), spec), horizon)
                  .tr;
          xt.row(b) =
              result.net.forward(store.snippet(tgt_batch.back(), spec), horizon)
                  .tr;
        }
        const auto disc = discrepancy<float>(opt.kind, xs, xt,
                                             static_cast<float>(opt.sigma));
        disc_sum += disc.loss;
        const float lam = static_cast<float>(opt.lambda_adapt);
        for (int b = 0; b < opt.batch_adapt; ++b) {
          model::NetworkGrads<float> grads;
          grads.d_tr = disc.grad_source.row(b) * lam;
          result.net.forward(store.snippet(src_batch[b], spec), horizon);
          result.net.backward(grads);
          grads.d_tr = disc.grad_target.row(b) * lam;
          result.net.forward(store.snippet(tgt_batch[b], spec), horizon);
          result.net.backward(grads);
        }
        ++steps;
      }

      adam.step();
      batch_start += batch_n;
    }

    const double val_auc =
        model::evaluate_overall_auc(result.net, store, corpus, source_val,
                                    horizon, true, opt.max_eval_samples);

    AdaptEpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / static_cast<double>(epoch_n);
    entry.discrepancy = steps > 0 ? disc_sum / steps : 0;
    entry.val_auc = val_auc;
    entry.improved = val_auc > result.best_val_auc;
    result.log.push_back(entry);
    if (log_file) {
      nlohmann::json j{{"seed", seed},
                       {"epoch", epoch},
                       {"kind", discrepancy_name(opt.kind)},
                       {"train_loss", entry.train_loss},
                       {"discrepancy", entry.discrepancy},
                       {"val_auc", entry.val_auc},
                       {"improved", entry.improved}};
      *log_file << j.dump() << "\n";
    }

    if (entry.improved) {
      result.best_val_auc = val_auc;
      result.best_epoch = epoch;
      best_params = model::snapshot_params(result.net);
      stale = 0;
    } else if (++stale >= opt.patience) {
      break;
    }
  }
  model::restore_params(result.net, best_params);
  return result;
}

}  // namespace rhexis::adapt
