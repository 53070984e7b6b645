#pragma once

// ============================================================================
// Split evaluation: per-class ROC-AUC with DeLong 95% intervals, plus the
// overall (any-error) score. Labels are recomputed at the requested horizon
// so one sample list serves every horizon. A class with only one label
// value present in the split is reported as undefined rather than guessed.
// ============================================================================

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "rhexis/eval/auc.hpp"
#include "rhexis/model/dataset.hpp"
#include "rhexis/model/network.hpp"

namespace rhexis::eval {

struct ClassReport {
  bool defined = false;
  double auc = 0.5;
  double variance = 0;
  double ci_low = 0;
  double ci_high = 1;
  long positives = 0;
  long negatives = 0;
};

struct EvalReport {
  int horizon = 1;
  long samples = 0;
  std::array<ClassReport, kNumClasses> per_class{};

  // Overall anticipation quality = the any-error class.
  const ClassReport& overall() const { return per_class[kAnyError]; }

  nlohmann::json to_json() const {
    nlohmann::json classes = nlohmann::json::object();
    for (int c = 0; c < kNumClasses; ++c) {
      const ClassReport& r = per_class[c];
      classes[kClassNames[c]] = {
          {"defined", r.defined},   {"auc", r.auc},
          {"variance", r.variance}, {"ci_low", r.ci_low},
          {"ci_high", r.ci_high},   {"positives", r.positives},
          {"negatives", r.negatives}};
    }
    return {{"horizon", horizon},
            {"samples", samples},
            {"overall_auc", overall().auc},
            {"classes", classes}};
  }
};

// Scores and labels for every class over a labeled sample list.
struct ScoreTable {
  std::array<std::vector<double>, kNumClasses> scores;
  std::array<std::vector<int>, kNumClasses> labels;
  long samples = 0;
};

inline ScoreTable collect_scores(model::AnticipationNet<float>& net,
                                 model::FrameStore& store,
                                 const data::Corpus& corpus,
                                 const std::vector<data::SampleRef>& samples,
                                 int horizon, bool condition_on_horizon,
                                 int max_samples = 0) {
  const model::ModelConfig& mc = net.config();
  const data::SnippetSpec spec{mc.frames, mc.stride, horizon};
  ScoreTable table;
  const size_t limit = max_samples > 0
                           ? std::min<size_t>(max_samples, samples.size())
                           : samples.size();
  for (size_t i = 0; i < limit; ++i) {
    const data::SampleRef& ref = samples[i];
    const data::ClassVector y = data::prediction_label(
        corpus.labels[ref.video].errors, ref.anchor, spec);
    const MatF frames = store.snippet(ref, spec);
    const auto out = net.forward(frames, condition_on_horizon ? horizon : 1);
    for (int c = 0; c < kNumClasses; ++c) {
      table.scores[c].push_back(out.pred_probs(0, c));
      table.labels[c].push_back(y[c] > 0.5f ? 1 : 0);
    }
    ++table.samples;
  }
  return table;
}

inline EvalReport evaluate_scores(const ScoreTable& table, int horizon) {
  EvalReport report;
  report.horizon = horizon;
  report.samples = table.samples;
  for (int c = 0; c < kNumClasses; ++c) {
    ClassReport& r = report.per_class[c];
    for (int l : table.labels[c]) (l ? r.positives : r.negatives)++;
    if (r.positives == 0 || r.negatives == 0) continue;  // undefined
    const AucEstimate e = delong_auc(table.scores[c], table.labels[c]);
    r.defined = true;
    r.auc = e.auc;
    r.variance = e.variance;
    r.ci_low = e.ci_low;
    r.ci_high = e.ci_high;
  }
  return report;
}

inline EvalReport evaluate_split(model::AnticipationNet<float>& net,
                                 model::FrameStore& store,
                                 const data::Corpus& corpus,
                                 const std::vector<data::SampleRef>& samples,
                                 int horizon, bool condition_on_horizon,
                                 int max_samples = 0) {
  return evaluate_scores(collect_scores(net, store, corpus, samples, horizon,
                                        condition_on_horizon, max_samples),
                         horizon);
}

// One model across all five horizons (the horizon-conditioned setting).
inline std::array<EvalReport, 5> horizon_curve(
    model::AnticipationNet<float>& net, model::FrameStore& store,
    const data::Corpus& corpus, const std::vector<data::SampleRef>& samples,
    bool condition_on_horizon, int max_samples = 0) {
  std::array<EvalReport, 5> out;
  for (int h = 1; h <= 5; ++h)
    out[h - 1] = evaluate_split(net, store, corpus, samples, h,
                                condition_on_horizon, max_samples);
  return out;
}

// Fraction of samples whose prediction vector changes between two horizon
// tokens (frames held fixed): measures how much the conditioning is used.
inline double horizon_sensitivity(model::AnticipationNet<float>& net,
                                  model::FrameStore& store,
                                  const std::vector<data::SampleRef>& samples,
                                  int horizon_a, int horizon_b,
                                  int max_samples = 0) {
  const model::ModelConfig& mc = net.config();
  const data::SnippetSpec spec{mc.frames, mc.stride, horizon_a};
  const size_t limit = max_samples > 0
                           ? std::min<size_t>(max_samples, samples.size())
                           : samples.size();
  if (limit == 0) throw DataError("horizon_sensitivity: no samples");
  long differing = 0;
  for (size_t i = 0; i < limit; ++i) {
    const MatF frames = store.snippet(samples[i], spec);
    const MatF pa = net.forward(frames, horizon_a).pred_probs;
    const MatF pb = net.forward(frames, horizon_b).pred_probs;
    if (pa != pb) ++differing;
  }
  return static_cast<double>(differing) / static_cast<double>(limit);
}

}  // namespace rhexis::eval
