#pragma once

// ============================================================================
// Shared plumbing between the command-line stages: loading a corpus with
// its split assignment, assembling per-split sample lists from one config,
// installing the target-frame homogenizer, and summarizing snippet counts
// and class proportions.
// ============================================================================

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "rhexis/adapt/homogenize.hpp"
#include "rhexis/model/dataset.hpp"
#include "rhexis/pipeline/run_config.hpp"

namespace rhexis::pipeline {

struct Workspace {
  data::Corpus corpus;
  data::SplitAssignment assign;
};

inline Workspace open_workspace(const std::filesystem::path& corpus_dir,
                                const std::filesystem::path& splits_path) {
  Workspace ws;
  ws.corpus = data::load_corpus(corpus_dir);
  ws.assign = data::load_splits(splits_path);
  return ws;
}

// Labeled samples of (domain, split) under the config's snippet geometry.
inline std::vector<data::SampleRef> samples_for(const Workspace& ws,
                                                const RunConfig& cfg,
                                                data::Domain domain,
                                                data::Split split,
                                                int horizon_override = 0) {
  data::SnippetSpec spec = cfg.snippet_spec();
  if (horizon_override > 0) spec.horizon = horizon_override;
  return model::labeled_samples(ws.corpus, ws.assign, domain, split, spec,
                                cfg.dataset_options())
      .samples;
}

inline std::vector<data::SampleRef> unlabeled_samples_for(
    const Workspace& ws, const RunConfig& cfg, data::Domain domain,
    data::Split split) {
  return model::unlabeled_samples(ws.corpus, ws.assign, domain, split,
                                  cfg.snippet_spec(), cfg.dataset_options())
      .samples;
}

// True when any homogenization step is switched on.
inline bool homogenization_enabled(const RunConfig& cfg) {
  return cfg.homog_crop_fraction < 1.0 || cfg.homog_border_mask ||
         cfg.homog_match_histogram;
}

// Routes target frames through crop/mask/histogram matching before caching.
inline void install_homogenizer(model::FrameStore& store,
                                const data::Corpus& corpus,
                                const RunConfig& cfg) {
  if (!homogenization_enabled(cfg)) return;
  const adapt::HomogenizeOptions hopt = cfg.homogenize_options();
  std::shared_ptr<adapt::ReferenceSet> refs;
  if (hopt.match_histogram)
    refs = std::make_shared<adapt::ReferenceSet>(adapt::build_reference_set(
        corpus, cfg.frame_size, cfg.homog_references_per_video,
        derive_seed(cfg.seed, "references")));
  store.set_target_preprocessor(
      [refs, hopt](const Image& raw, const data::VideoMeta&) {
        return adapt::homogenize(raw, hopt, refs.get());
      });
}

// Fraction of snippets carrying each class in the posterior window, over an
// unbalanced enumeration (balancing would skew the no-error share).
inline nlohmann::json proportion_summary(
    const std::vector<data::SampleRef>& samples) {
  nlohmann::json out = nlohmann::json::object();
  std::array<long, kNumClasses> counts{};
  for (const auto& ref : samples)
    for (int c = 0; c < kNumClasses; ++c)
      if (ref.prediction[c] > 0.5f) ++counts[c];
  out["samples"] = samples.size();
  for (int c = 0; c < kNumClasses; ++c)
    out[kClassNames[c]] =
        samples.empty()
            ? 0.0
            : static_cast<double>(counts[c]) / static_cast<double>(samples.size());
  return out;
}

// Per-domain, per-split snippet counts plus source-domain class proportions.
inline nlohmann::json snippet_summary(const Workspace& ws,
                                      const RunConfig& cfg) {
  nlohmann::json out;
  out["spec"] = {{"frames", cfg.frames},
                 {"stride", cfg.stride},
                 {"horizon", cfg.horizon},
                 {"duration_s", cfg.snippet_spec().duration_s()}};

  for (data::Domain domain : {data::Domain::kSource, data::Domain::kTarget}) {
    const char* dname = domain == data::Domain::kSource ? "source" : "target";
    for (data::Split split :
         {data::Split::kTrain, data::Split::kValidation, data::Split::kTest}) {
      nlohmann::json entry;
      try {
        entry["labeled"] =
            samples_for(ws, cfg, domain, split).size();
      } catch (const DataError&) {
        entry["labeled"] = nullptr;  // split holds unlabeled videos
      }
      try {
        entry["unlabeled"] = unlabeled_samples_for(ws, cfg, domain, split).size();
      } catch (const DataError&) {
        entry["unlabeled"] = nullptr;  // empty split
      }
      out[dname][data::split_name(split)] = entry;
    }
  }

  // Source proportions from the raw (unbalanced) enumeration of all splits.
  RunConfig raw = cfg;
  raw.balance = false;
  std::vector<data::SampleRef> all;
  for (data::Split split :
       {data::Split::kTrain, data::Split::kValidation, data::Split::kTest}) {
    const auto part = samples_for(ws, raw, data::Domain::kSource, split);
    all.insert(all.end(), part.begin(), part.end());
  }
  out["source_proportions"] = proportion_summary(all);
  return out;
}

}  // namespace rhexis::pipeline
