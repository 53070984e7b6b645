// Tests for the flat run configuration, the workspace assembly helpers, and
// the three-strategy horizon sweep.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "rhexis/pipeline/run_config.hpp"
#include "rhexis/pipeline/sweep.hpp"
#include "rhexis/pipeline/workspace.hpp"
#include "rhexis/videogen/generate.hpp"

namespace fs = std::filesystem;
using namespace rhexis;
using pipeline::RunConfig;

namespace {

// Small dual-domain corpus shared by the workspace/sweep tests.
const fs::path& fixture_corpus() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "rhexis_test_pipeline_corpus";
    if (!fs::exists(d / "manifest.json")) {
      videogen::GeneratorConfig g;
      g.seed = 818;
      g.source.videos = 4;
      g.source.duration_min_s = 12;
      g.source.duration_max_s = 14;
      g.source.resolution = 32;
      g.source.rates = {6, 5, 4, 4};
      g.target.videos = 4;
      g.target.duration_min_s = 12;
      g.target.duration_max_s = 14;
      g.target.resolution = 48;
      g.target.rates = {6, 5, 4, 4};
      g.target.recording_days = 2;
      g.target.labeled_fraction = 0.5;
      videogen::generate_corpus(g, d);
    }
    return d;
  }();
  return dir;
}

// RunConfig shrunk to the fixture scale: tiny model, tolerant splits.
RunConfig tiny_run_config() {
  RunConfig cfg;
  cfg.seed = 818;
  cfg.frames = 3;
  cfg.stride = 2;
  cfg.frame_size = 16;
  cfg.spatial_widths = {4, 6};
  cfg.temporal = "dilated_conv";
  cfg.temporal_dim = 8;
  cfg.conv_layers = 2;
  cfg.horizon_dim = 4;
  cfg.head_hidden = 5;
  cfg.lambda_current = 0.3;
  cfg.split_tolerance = 1.0;
  cfg.epochs = 1;
  cfg.train_seeds = 1;
  cfg.max_train_samples = 20;
  cfg.max_eval_samples = 20;
  return cfg;
}

pipeline::Workspace fixture_workspace(const RunConfig& cfg) {
  const fs::path splits = fixture_corpus() / "splits.json";
  if (!fs::exists(splits)) {
    const data::Corpus corpus = data::load_corpus(fixture_corpus());
    data::save_splits(splits,
                      data::split_corpus(corpus, cfg.seed, cfg.split_options()));
  }
  return pipeline::open_workspace(fixture_corpus(), splits);
}

// ---------------------------------------------------------------------------

TEST(RunConfig, DefaultsAreValidAndRoundTrip) {
  RunConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  const nlohmann::json j = cfg.to_json();
  EXPECT_EQ(j["frames"], 10);
  EXPECT_EQ(j["stride"], 3);
  EXPECT_EQ(j["temporal"], "lstm");
  EXPECT_EQ(j["train_seeds"], 5);

  RunConfig back;
  back.frames = 99;  // must be overwritten by apply
  back.apply(j);
  EXPECT_EQ(back.to_json(), j);
}

TEST(RunConfig, UnknownKeysAndBadValuesThrow) {
  RunConfig cfg;
  EXPECT_THROW(cfg.apply({{"no_such_key", 1}}), ConfigError);
  EXPECT_THROW(cfg.apply({{"frames", "not a number"}}), ConfigError);
  EXPECT_THROW(cfg.apply(nlohmann::json::array()), ConfigError);
}

TEST(RunConfig, TypedConvertersCarryValues) {
  RunConfig cfg = tiny_run_config();
  const model::ModelConfig mc = cfg.model_config();
  EXPECT_EQ(mc.frames, 3);
  EXPECT_EQ(mc.stride, 2);
  EXPECT_EQ(mc.temporal, model::TemporalKind::kDilatedConv);
  EXPECT_EQ(mc.spatial_widths, (std::vector<int>{4, 6}));

  cfg.horizon_mode = "random";
  EXPECT_EQ(cfg.train_options().horizon_mode, model::HorizonMode::kRandom);
  cfg.horizon_mode = "sideways";
  EXPECT_THROW(cfg.train_options(), ConfigError);
  cfg.horizon_mode = "fixed";

  cfg.adapt_kind = "mmd";
  EXPECT_EQ(cfg.adapt_options().kind, DiscrepancyKind::kMmd);
  cfg.adapt_kind = "nothing";
  EXPECT_THROW(cfg.adapt_options(), ConfigError);

  const videogen::GeneratorConfig g = cfg.generator_config();
  EXPECT_EQ(g.seed, cfg.seed);
  EXPECT_EQ(g.source.videos, cfg.source_videos);
  EXPECT_DOUBLE_EQ(g.target.labeled_fraction, cfg.target_labeled_fraction);
}

TEST(RunConfig, HashIsStableAndSensitive) {
  const RunConfig a;
  const RunConfig b;
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);

  RunConfig c;
  c.frames = 11;
  EXPECT_NE(a.hash(), c.hash());
  RunConfig d;
  d.temporal = "attention";
  EXPECT_NE(a.hash(), d.hash());
}

TEST(RunConfig, OverridesParseJsonWithBareStringFallback) {
  RunConfig cfg;
  pipeline::apply_overrides(cfg, {"frames=7", "lambda_current=0.25",
                                  "balance=false", "temporal=attention",
                                  "spatial_widths=[8,16]"});
  EXPECT_EQ(cfg.frames, 7);
  EXPECT_DOUBLE_EQ(cfg.lambda_current, 0.25);
  EXPECT_FALSE(cfg.balance);
  EXPECT_EQ(cfg.temporal, "attention");
  EXPECT_EQ(cfg.spatial_widths, (std::vector<int>{8, 16}));

  EXPECT_THROW(pipeline::apply_overrides(cfg, {"frames"}), ConfigError);
  EXPECT_THROW(pipeline::apply_overrides(cfg, {"=3"}), ConfigError);
  EXPECT_THROW(pipeline::apply_overrides(cfg, {"nope=3"}), ConfigError);
}

TEST(RunConfig, FileLoadingAndRunMeta) {
  const fs::path dir = fs::temp_directory_path() / "rhexis_test_pipeline_cfg";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "good.json");
    out << R"({"frames": 5, "temporal": "dilated_conv"})";
  }
  const RunConfig cfg = pipeline::load_run_config(dir / "good.json");
  EXPECT_EQ(cfg.frames, 5);
  EXPECT_EQ(cfg.temporal, "dilated_conv");

  EXPECT_THROW(pipeline::load_run_config(dir / "missing.json"), DataError);
  {
    std::ofstream out(dir / "bad.json");
    out << "{ not json";
  }
  EXPECT_THROW(pipeline::load_run_config(dir / "bad.json"), DataError);

  pipeline::write_run_meta(dir / "meta", cfg, "test");
  std::ifstream in(dir / "meta" / "run_meta.json");
  ASSERT_TRUE(in.good());
  nlohmann::json meta;
  in >> meta;
  EXPECT_EQ(meta["command"], "test");
  EXPECT_EQ(meta["config_hash"], cfg.hash());
  EXPECT_EQ(meta["config"]["frames"], 5);
}

TEST(RunConfig, RunSeedsAreDistinctAndDerived) {
  RunConfig cfg;
  cfg.train_seeds = 4;
  const auto seeds = cfg.run_seeds();
  ASSERT_EQ(seeds.size(), 4u);
  for (size_t i = 0; i < seeds.size(); ++i)
    for (size_t j = i + 1; j < seeds.size(); ++j)
      EXPECT_NE(seeds[i], seeds[j]);
  EXPECT_EQ(seeds[0], derive_seed(cfg.seed, "run", 0));

  cfg.train_seeds = 0;
  EXPECT_THROW(cfg.run_seeds(), ConfigError);
}

// ---------------------------------------------------------------------------

TEST(Workspace, AssemblesLabeledAndUnlabeledSamples) {
  const RunConfig cfg = tiny_run_config();
  const pipeline::Workspace ws = fixture_workspace(cfg);
  EXPECT_EQ(ws.corpus.videos.size(), 8u);

  const auto train = pipeline::samples_for(ws, cfg, data::Domain::kSource,
                                           data::Split::kTrain);
  ASSERT_FALSE(train.empty());
  for (const auto& s : train) {
    const auto& meta = ws.corpus.videos[s.video];
    EXPECT_EQ(meta.domain, data::Domain::kSource);
    EXPECT_EQ(ws.assign.of(meta.id), data::Split::kTrain);
    EXPECT_TRUE(ws.corpus.labels[s.video].labeled());
  }

  const auto unlabeled = pipeline::unlabeled_samples_for(
      ws, cfg, data::Domain::kTarget, data::Split::kTrain);
  ASSERT_FALSE(unlabeled.empty());
  for (const auto& s : unlabeled)
    EXPECT_EQ(ws.corpus.videos[s.video].domain, data::Domain::kTarget);

  // A longer horizon needs more future footage, so it can only shrink the
  // per-video anchor range.
  const auto far = pipeline::samples_for(ws, cfg, data::Domain::kSource,
                                         data::Split::kTrain, 5);
  EXPECT_LE(far.size(), pipeline::samples_for(ws, cfg, data::Domain::kSource,
                                              data::Split::kTrain, 1)
                            .size());
}

TEST(Workspace, SnippetSummaryHasTheExpectedShape) {
  const RunConfig cfg = tiny_run_config();
  const pipeline::Workspace ws = fixture_workspace(cfg);
  const nlohmann::json j = pipeline::snippet_summary(ws, cfg);

  ASSERT_TRUE(j.contains("spec"));
  EXPECT_EQ(j["spec"]["frames"], 3);
  EXPECT_NEAR(j["spec"]["duration_s"].get<double>(), 3.0 * 2 / 30, 1e-12);
  for (const char* domain : {"source", "target"})
    for (const char* split : {"train", "validation", "test"}) {
      ASSERT_TRUE(j[domain].contains(split)) << domain << "/" << split;
      EXPECT_TRUE(j[domain][split].contains("labeled"));
      EXPECT_TRUE(j[domain][split].contains("unlabeled"));
    }
  ASSERT_TRUE(j.contains("source_proportions"));
  const auto& props = j["source_proportions"];
  for (int c = 0; c < kNumClasses; ++c) {
    ASSERT_TRUE(props.contains(kClassNames[c]));
    const double p = props[kClassNames[c]].get<double>();
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
  EXPECT_GT(props["samples"].get<long>(), 0);
}

TEST(Workspace, HomogenizerInstallsOnlyWhenAsked) {
  RunConfig cfg = tiny_run_config();
  const pipeline::Workspace ws = fixture_workspace(cfg);

  EXPECT_FALSE(pipeline::homogenization_enabled(cfg));
  cfg.homog_border_mask = true;
  cfg.homog_match_histogram = true;
  EXPECT_TRUE(pipeline::homogenization_enabled(cfg));

  // Find a target video and check its frames come out border-masked.
  int target_video = -1;
  for (size_t v = 0; v < ws.corpus.videos.size(); ++v)
    if (ws.corpus.videos[v].domain == data::Domain::kTarget) {
      target_video = static_cast<int>(v);
      break;
    }
  ASSERT_GE(target_video, 0);

  model::FrameStore store(&ws.corpus, cfg.frame_size);
  pipeline::install_homogenizer(store, ws.corpus, cfg);
  const auto& frames = store.video(target_video);
  const int sz = cfg.frame_size;
  ASSERT_EQ(frames.cols(), 3L * sz * sz);
  const double cx = (sz - 1) / 2.0;
  const double r = sz / 2.0;
  long border_sum = 0, interior_sum = 0;
  for (int y = 0; y < sz; ++y)
    for (int x = 0; x < sz; ++x) {
      const double d2 = (x - cx) * (x - cx) + (y - cx) * (y - cx);
      for (int c = 0; c < 3; ++c)
        (d2 > r * r ? border_sum : interior_sum) +=
            frames(0, (static_cast<long>(c) * sz + y) * sz + x);
    }
  EXPECT_EQ(border_sum, 0);
  EXPECT_GT(interior_sum, 0);
}

// ---------------------------------------------------------------------------

TEST(Sweep, ProducesCurvesForAllThreeStrategies) {
  const RunConfig cfg = tiny_run_config();
  const pipeline::Workspace ws = fixture_workspace(cfg);

  model::FrameStore store(&ws.corpus, cfg.frame_size);
  const pipeline::SweepResult res =
      pipeline::run_horizon_sweep(ws, store, cfg, 33);

  for (int h = 0; h < 5; ++h) {
    for (double a : {res.fixed_auc[h], res.conditioned_auc[h],
                     res.unconditioned_auc[h]}) {
      EXPECT_GE(a, 0.0);
      EXPECT_LE(a, 1.0);
    }
  }
  EXPECT_GE(res.conditioning_sensitivity, 0.0);
  EXPECT_LE(res.conditioning_sensitivity, 1.0);

  const nlohmann::json j = res.to_json();
  EXPECT_EQ(j["fixed_auc"].size(), 5u);
  EXPECT_EQ(j["conditioned_auc"].size(), 5u);
  EXPECT_EQ(j["unconditioned_auc"].size(), 5u);
  EXPECT_TRUE(j.contains("conditioning_sensitivity"));
}

}  // namespace
