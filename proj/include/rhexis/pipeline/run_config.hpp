#pragma once

// ============================================================================
// One flat configuration for the whole pipeline. Every stage reads its
// options from here through typed converters; the JSON form is a single
// flat object. Unknown keys are rejected so typos fail loudly. Precedence
// is defaults < config file < command-line overrides, and the canonical
// dump (sorted keys) feeds a stable 64-bit hash used to tag runs.
// ============================================================================

#include <array>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rhexis/adapt/homogenize.hpp"
#include "rhexis/adapt/pretext.hpp"
#include "rhexis/adapt/train_adapt.hpp"
#include "rhexis/data/snippets.hpp"
#include "rhexis/data/splits.hpp"
#include "rhexis/model/config.hpp"
#include "rhexis/model/trainer.hpp"
#include "rhexis/videogen/generate.hpp"

namespace rhexis::pipeline {

struct RunConfig {
  // --- corpus generation ---------------------------------------------------
  std::uint64_t seed = 1;
  int source_videos = 10;
  int target_videos = 6;
  double source_duration_min_s = 20;
  double source_duration_max_s = 40;
  double target_duration_min_s = 20;
  double target_duration_max_s = 40;
  int source_resolution = 64;
  int target_resolution = 96;
  double source_rate_smoothness = 5.0;
  double source_rate_out_of_red_reflex = 4.0;
  double source_rate_radial_extension = 3.0;
  double source_rate_tear = 3.0;
  double target_rate_smoothness = 5.0;
  double target_rate_out_of_red_reflex = 4.0;
  double target_rate_radial_extension = 3.0;
  double target_rate_tear = 3.0;
  int target_recording_days = 2;
  double target_labeled_fraction = 0.5;

  // --- expected snippet class proportions (for corpus sanity checks) ------
  double expected_prop_smoothness = 0.21;
  double expected_prop_out_of_red_reflex = 0.12;
  double expected_prop_radial_extension = 0.062;
  double expected_prop_tear = 0.0034;
  double expected_prop_no_error = 0.588;
  double proportion_tolerance_pp = 2.0;

  // --- splits --------------------------------------------------------------
  double split_tolerance = 0.20;
  int split_restarts = 40;
  int split_swaps = 1200;

  // --- snippets ------------------------------------------------------------
  int frames = 10;
  int stride = 3;
  int horizon = 1;
  double shift_s = 1.0 / 15;
  int keep_every = 3;
  bool balance = true;

  // --- model ---------------------------------------------------------------
  std::string temporal = "lstm";
  int frame_size = 64;
  std::vector<int> spatial_widths{16, 32, 64, 128};
  int temporal_dim = 256;
  int lstm_layers = 2;
  int conv_layers = 4;
  int attn_layers = 3;
  int attn_heads = 8;
  int horizon_dim = 8;
  int head_hidden = 64;
  double lambda_current = 0.1;
  bool per_frame_current = false;

  // --- training ------------------------------------------------------------
  int epochs = 10;
  int batch_size = 32;
  double lr_spatial = 5e-5;
  double lr_rest = 5e-4;
  int patience = 3;
  std::string horizon_mode = "fixed";  // or "random"
  bool condition_on_horizon = true;
  int train_seeds = 5;
  int max_train_samples = 0;
  int max_eval_samples = 0;

  // --- domain adaptation ---------------------------------------------------
  std::string adapt_kind = "coral";
  double lambda_adapt = 1.0;
  int batch_adapt = 8;
  double mmd_sigma = 0;  // <= 0: median heuristic
  double homog_crop_fraction = 1.0;
  bool homog_border_mask = false;
  bool homog_match_histogram = false;
  int homog_references_per_video = 4;

  // --- pretext pretraining -------------------------------------------------
  std::string pretext_task = "frame_order";  // or "reconstruction"
  int pretext_epochs = 2;
  int pretext_batch = 16;
  int pretext_max_samples = 0;

  // --- latency -------------------------------------------------------------
  int latency_inferences = 1000;

  // -------------------------------------------------------------------------

  struct Field {
    const char* key;
    std::function<void(RunConfig&, const nlohmann::json&)> set;
    std::function<nlohmann::json(const RunConfig&)> get;
  };

  template <typename T>
  static Field make_field(const char* key, T RunConfig::* member) {
    return {key,
            [member, key](RunConfig& c, const nlohmann::json& v) {
              try {
                c.*member = v.get<T>();
              } catch (const nlohmann::json::exception& e) {
                throw ConfigError(std::string("bad value for '") + key +
                                  "': " + e.what());
              }
            },
            [member](const RunConfig& c) { return nlohmann::json(c.*member); }};
  }

  static const std::vector<Field>& fields() {
    static const std::vector<Field> f = {
        make_field("seed", &RunConfig::seed),
        make_field("source_videos", &RunConfig::source_videos),
        make_field("target_videos", &RunConfig::target_videos),
        make_field("source_duration_min_s", &RunConfig::source_duration_min_s),
        make_field("source_duration_max_s", &RunConfig::source_duration_max_s),
        make_field("target_duration_min_s", &RunConfig::target_duration_min_s),
        make_field("target_duration_max_s", &RunConfig::target_duration_max_s),
        make_field("source_resolution", &RunConfig::source_resolution),
        make_field("target_resolution", &RunConfig::target_resolution),
        make_field("source_rate_smoothness", &RunConfig::source_rate_smoothness),
        make_field("source_rate_out_of_red_reflex",
                   &RunConfig::source_rate_out_of_red_reflex),
        make_field("source_rate_radial_extension",
                   &RunConfig::source_rate_radial_extension),
        make_field("source_rate_tear", &RunConfig::source_rate_tear),
        make_field("target_rate_smoothness", &RunConfig::target_rate_smoothness),
        make_field("target_rate_out_of_red_reflex",
                   &RunConfig::target_rate_out_of_red_reflex),
        make_field("target_rate_radial_extension",
                   &RunConfig::target_rate_radial_extension),
        make_field("target_rate_tear", &RunConfig::target_rate_tear),
        make_field("target_recording_days", &RunConfig::target_recording_days),
        make_field("target_labeled_fraction",
                   &RunConfig::target_labeled_fraction),
        make_field("expected_prop_smoothness",
                   &RunConfig::expected_prop_smoothness),
        make_field("expected_prop_out_of_red_reflex",
                   &RunConfig::expected_prop_out_of_red_reflex),
        make_field("expected_prop_radial_extension",
                   &RunConfig::expected_prop_radial_extension),
        make_field("expected_prop_tear", &RunConfig::expected_prop_tear),
        make_field("expected_prop_no_error", &RunConfig::expected_prop_no_error),
        make_field("proportion_tolerance_pp",
                   &RunConfig::proportion_tolerance_pp),
        make_field("split_tolerance", &RunConfig::split_tolerance),
        make_field("split_restarts", &RunConfig::split_restarts),
        make_field("split_swaps", &RunConfig::split_swaps),
        make_field("frames", &RunConfig::frames),
        make_field("stride", &RunConfig::stride),
        make_field("horizon", &RunConfig::horizon),
        make_field("shift_s", &RunConfig::shift_s),
        make_field("keep_every", &RunConfig::keep_every),
        make_field("balance", &RunConfig::balance),
        make_field("temporal", &RunConfig::temporal),
        make_field("frame_size", &RunConfig::frame_size),
        make_field("spatial_widths", &RunConfig::spatial_widths),
        make_field("temporal_dim", &RunConfig::temporal_dim),
        make_field("lstm_layers", &RunConfig::lstm_layers),
        make_field("conv_layers", &RunConfig::conv_layers),
        make_field("attn_layers", &RunConfig::attn_layers),
        make_field("attn_heads", &RunConfig::attn_heads),
        make_field("horizon_dim", &RunConfig::horizon_dim),
        make_field("head_hidden", &RunConfig::head_hidden),
        make_field("lambda_current", &RunConfig::lambda_current),
        make_field("per_frame_current", &RunConfig::per_frame_current),
        make_field("epochs", &RunConfig::epochs),
        make_field("batch_size", &RunConfig::batch_size),
        make_field("lr_spatial", &RunConfig::lr_spatial),
        make_field("lr_rest", &RunConfig::lr_rest),
        make_field("patience", &RunConfig::patience),
        make_field("horizon_mode", &RunConfig::horizon_mode),
        make_field("condition_on_horizon", &RunConfig::condition_on_horizon),
        make_field("train_seeds", &RunConfig::train_seeds),
        make_field("max_train_samples", &RunConfig::max_train_samples),
        make_field("max_eval_samples", &RunConfig::max_eval_samples),
        make_field("adapt_kind", &RunConfig::adapt_kind),
        make_field("lambda_adapt", &RunConfig::lambda_adapt),
        make_field("batch_adapt", &RunConfig::batch_adapt),
        make_field("mmd_sigma", &RunConfig::mmd_sigma),
        make_field("homog_crop_fraction", &RunConfig::homog_crop_fraction),
        make_field("homog_border_mask", &RunConfig::homog_border_mask),
        make_field("homog_match_histogram",
                   &RunConfig::homog_match_histogram),
        make_field("homog_references_per_video",
                   &RunConfig::homog_references_per_video),
        make_field("pretext_task", &RunConfig::pretext_task),
        make_field("pretext_epochs", &RunConfig::pretext_epochs),
        make_field("pretext_batch", &RunConfig::pretext_batch),
        make_field("pretext_max_samples", &RunConfig::pretext_max_samples),
        make_field("latency_inferences", &RunConfig::latency_inferences),
    };
    return f;
  }

  // Partial update; every key must be known.
  void apply(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      bool found = false;
      for (const Field& f : fields()) {
        if (key == f.key) {
          f.set(*this, value);
          found = true;
          break;
        }
      }
      if (!found) throw ConfigError("unknown config key: " + key);
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const Field& f : fields()) j[f.key] = f.get(*this);
    return j;
  }

  // FNV-1a over the canonical (sorted-key) dump.
  std::string hash() const {
    const std::string dump = to_json().dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : dump) {
      h ^= c;
      h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
  }

  // --- typed converters (each validates its slice) -------------------------

  videogen::GeneratorConfig generator_config() const {
    videogen::GeneratorConfig g;
    g.seed = seed;
    g.source.videos = source_videos;
    g.source.duration_min_s = source_duration_min_s;
    g.source.duration_max_s = source_duration_max_s;
    g.source.resolution = source_resolution;
    g.source.rates = {source_rate_smoothness, source_rate_out_of_red_reflex,
                      source_rate_radial_extension, source_rate_tear};
    g.target.videos = target_videos;
    g.target.duration_min_s = target_duration_min_s;
    g.target.duration_max_s = target_duration_max_s;
    g.target.resolution = target_resolution;
    g.target.rates = {target_rate_smoothness, target_rate_out_of_red_reflex,
                      target_rate_radial_extension, target_rate_tear};
    g.target.recording_days = target_recording_days;
    g.target.labeled_fraction = target_labeled_fraction;
    return g;
  }

  data::SnippetSpec snippet_spec() const {
    data::SnippetSpec s{frames, stride, horizon};
    s.validate();
    return s;
  }

  data::DatasetOptions dataset_options() const {
    data::DatasetOptions o;
    o.shift_s = shift_s;
    o.keep_every = keep_every;
    o.balance = balance;
    return o;
  }

  data::SplitOptions split_options() const {
    data::SplitOptions o;
    o.stratification_tolerance = split_tolerance;
    o.restarts = split_restarts;
    o.swaps_per_restart = split_swaps;
    return o;
  }

  model::ModelConfig model_config() const {
    model::ModelConfig m;
    m.frames = frames;
    m.stride = stride;
    m.frame_size = frame_size;
    m.spatial_widths = spatial_widths;
    m.temporal = model::temporal_from_name(temporal);
    m.temporal_dim = temporal_dim;
    m.lstm_layers = lstm_layers;
    m.conv_layers = conv_layers;
    m.attn_layers = attn_layers;
    m.attn_heads = attn_heads;
    m.horizon_dim = horizon_dim;
    m.head_hidden = head_hidden;
    m.lambda_current = lambda_current;
    m.per_frame_current = per_frame_current;
    m.validate();
    return m;
  }

  model::TrainOptions train_options() const {
    model::TrainOptions o;
    o.epochs = epochs;
    o.batch_size = batch_size;
    o.lr_spatial = lr_spatial;
    o.lr_rest = lr_rest;
    o.patience = patience;
    if (horizon_mode == "fixed") {
      o.horizon_mode = model::HorizonMode::kFixed;
    } else if (horizon_mode == "random") {
      o.horizon_mode = model::HorizonMode::kRandom;
    } else {
      throw ConfigError("unknown horizon_mode: " + horizon_mode);
    }
    o.condition_on_horizon = condition_on_horizon;
    o.max_train_samples = max_train_samples;
    o.max_eval_samples = max_eval_samples;
    return o;
  }

  adapt::AdaptOptions adapt_options() const {
    adapt::AdaptOptions o;
    o.epochs = epochs;
    o.batch_supervised = batch_size;
    o.batch_adapt = batch_adapt;
    o.lr_spatial = lr_spatial;
    o.lr_rest = lr_rest;
    o.lambda_adapt = lambda_adapt;
    o.kind = discrepancy_from_name(adapt_kind);
    o.sigma = mmd_sigma;
    o.patience = patience;
    o.max_train_samples = max_train_samples;
    o.max_eval_samples = max_eval_samples;
    o.validate();
    return o;
  }

  adapt::HomogenizeOptions homogenize_options() const {
    adapt::HomogenizeOptions o;
    o.crop_fraction = homog_crop_fraction;
    o.border_mask = homog_border_mask;
    o.match_histogram = homog_match_histogram;
    o.out_size = frame_size;
    o.validate();
    return o;
  }

  adapt::PretextOptions pretext_options() const {
    adapt::PretextOptions o;
    o.epochs = pretext_epochs;
    o.batch_size = pretext_batch;
    o.lr_spatial = lr_spatial;
    o.lr_rest = lr_rest;
    o.max_samples_per_epoch = pretext_max_samples;
    return o;
  }

  std::array<double, 5> expected_proportions() const {
    return {expected_prop_smoothness, expected_prop_out_of_red_reflex,
            expected_prop_radial_extension, expected_prop_tear,
            expected_prop_no_error};
  }

  // Seeds for the multi-run training protocol.
  std::vector<std::uint64_t> run_seeds() const {
    if (train_seeds < 1) throw ConfigError("train_seeds must be >= 1");
    std::vector<std::uint64_t> seeds(train_seeds);
    for (int i = 0; i < train_seeds; ++i)
      seeds[i] = derive_seed(seed, "run", i);
    return seeds;
  }

  void validate() const {
    snippet_spec();
    model_config();
    train_options();
    adapt_options();
    homogenize_options();
    if (horizon < 1 || horizon > 5)
      throw ConfigError("horizon must be in [1, 5]");
    if (latency_inferences < 1)
      throw ConfigError("latency_inferences must be >= 1");
    if (pretext_task != "frame_order" && pretext_task != "reconstruction")
      throw ConfigError("unknown pretext_task: " + pretext_task);
    for (double p : expected_proportions())
      if (p < 0 || p > 1)
        throw ConfigError("expected proportions must be in [0, 1]");
  }
};

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in.good())
    throw DataError("cannot read config file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad JSON in " + path.string() + ": " + e.what());
  }
  RunConfig cfg;
  cfg.apply(j);
  return cfg;
}

// "key=value" strings from the command line; values parse as JSON when they
// can (numbers, bools, arrays) and as bare strings otherwise.
inline void apply_overrides(RunConfig& cfg,
                            const std::vector<std::string>& overrides) {
  for (const std::string& kv : overrides) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("override must look like key=value: " + kv);
    const std::string key = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    nlohmann::json value;
    try {
      value = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception&) {
      value = raw;  // unquoted string, e.g. temporal=lstm
    }
    cfg.apply({{key, value}});
  }
}

inline void write_run_meta(const std::filesystem::path& dir,
                           const RunConfig& cfg, const std::string& command) {
  std::filesystem::create_directories(dir);
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  const nlohmann::json meta{{"version", kVersion},
                            {"command", command},
                            {"timestamp", stamp},
                            {"config_hash", cfg.hash()},
                            {"config", cfg.to_json()}};
  std::ofstream out(dir / "run_meta.json");
  out << meta.dump(2) << "\n";
  if (!out.good()) throw DataError("failed to write run_meta.json");
}

}  // namespace rhexis::pipeline
