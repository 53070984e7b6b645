#pragma once

// ============================================================================
// The horizon study: how anticipation quality degrades as the prediction
// horizon grows, under three training strategies.
//
//   fixed          — five separate models, one per horizon
//   conditioned    — one model, horizon drawn per presentation and fed to
//                    the network as a token
//   unconditioned  — trained the same way but with a constant token, so
//                    the model cannot use the horizon
//
// Each horizon is trained and scored on sample sets built at that horizon,
// so anchor validity and dataset balancing always refer to the horizon being
// measured. (Re-labeling one shared set built at the longest horizon would
// bias short-horizon scores: balancing would then keep anchors by their
// long-horizon labels.) The single-model strategies train on the horizon-5
// sets, whose anchors are valid for every presented horizon.
// ============================================================================

#include <array>
#include <vector>

#include <json.hpp>

#include "rhexis/eval/evaluate.hpp"
#include "rhexis/model/trainer.hpp"
#include "rhexis/pipeline/run_config.hpp"
#include "rhexis/pipeline/workspace.hpp"

namespace rhexis::pipeline {

struct SweepResult {
  std::array<double, 5> fixed_auc{};
  std::array<double, 5> conditioned_auc{};
  std::array<double, 5> unconditioned_auc{};
  double conditioning_sensitivity = 0;  // share of outputs moved by the token

  nlohmann::json to_json() const {
    return {{"horizons", {1, 2, 3, 4, 5}},
            {"fixed_auc", fixed_auc},
            {"conditioned_auc", conditioned_auc},
            {"unconditioned_auc", unconditioned_auc},
            {"conditioning_sensitivity", conditioning_sensitivity}};
  }
};

// Trains the three strategies on source train/validation and reports overall
// AUC per horizon on the source validation split.
inline SweepResult run_horizon_sweep(const Workspace& ws,
                                     model::FrameStore& store,
                                     const RunConfig& cfg, std::uint64_t seed) {
  const model::ModelConfig mc = cfg.model_config();
  SweepResult out;

  std::array<std::vector<data::SampleRef>, 5> train_h, val_h;
  for (int h = 1; h <= 5; ++h) {
    train_h[h - 1] =
        samples_for(ws, cfg, data::Domain::kSource, data::Split::kTrain, h);
    val_h[h - 1] = samples_for(ws, cfg, data::Domain::kSource,
                               data::Split::kValidation, h);
  }

  // Fixed: one model per horizon.
  for (int h = 1; h <= 5; ++h) {
    model::TrainOptions opt = cfg.train_options();
    opt.horizon_mode = model::HorizonMode::kFixed;
    opt.condition_on_horizon = true;
    model::TrainResult run = model::train_best_of(
        ws.corpus, store, mc, train_h[h - 1], val_h[h - 1], h, opt,
        {derive_seed(seed, "fixed", h)});
    out.fixed_auc[h - 1] =
        model::evaluate_overall_auc(run.net, store, ws.corpus, val_h[h - 1], h,
                                    true, cfg.max_eval_samples);
  }

  // Conditioned: one model across horizons, token active.
  {
    model::TrainOptions opt = cfg.train_options();
    opt.horizon_mode = model::HorizonMode::kRandom;
    opt.condition_on_horizon = true;
    model::TrainResult run = model::train_best_of(
        ws.corpus, store, mc, train_h[4], val_h[4], cfg.horizon, opt,
        {derive_seed(seed, "conditioned")});
    for (int h = 1; h <= 5; ++h)
      out.conditioned_auc[h - 1] =
          model::evaluate_overall_auc(run.net, store, ws.corpus, val_h[h - 1],
                                      h, true, cfg.max_eval_samples);
    out.conditioning_sensitivity = eval::horizon_sensitivity(
        run.net, store, val_h[4], 1, 5, cfg.max_eval_samples);
  }

  // Unconditioned ablation: same training, constant token.
  {
    model::TrainOptions opt = cfg.train_options();
    opt.horizon_mode = model::HorizonMode::kRandom;
    opt.condition_on_horizon = false;
    model::TrainResult run = model::train_best_of(
        ws.corpus, store, mc, train_h[4], val_h[4], cfg.horizon, opt,
        {derive_seed(seed, "unconditioned")});
    for (int h = 1; h <= 5; ++h)
      out.unconditioned_auc[h - 1] =
          model::evaluate_overall_auc(run.net, store, ws.corpus, val_h[h - 1],
                                      h, false, cfg.max_eval_samples);
  }

  return out;
}

}  // namespace rhexis::pipeline
