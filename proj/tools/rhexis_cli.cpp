// ============================================================================
// Command-line front end. Every long-running stage is a subcommand over the
// same flat JSON config (defaults < --config file < --set overrides):
//
//   generate   synthesize a dual-domain corpus
//   split      assign videos to train/validation/test
//   snippets   summarize snippet counts and class proportions
//   train      supervised training on the source domain
//   pretrain   self-supervised pretext on unlabeled target video
//   adapt      adversarial-free domain-adaptive training
//   eval       per-class AUC report + figures for a checkpoint
//   sweep      horizon study across the three training strategies
//   latency    inference timing across observed-window lengths
//
// Training-style commands demand an explicit --seed and write run_meta.json
// next to their outputs for exact reproduction.
// ============================================================================

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rhexis/adapt/pretext.hpp"
#include "rhexis/adapt/train_adapt.hpp"
#include "rhexis/eval/evaluate.hpp"
#include "rhexis/eval/figures.hpp"
#include "rhexis/eval/latency.hpp"
#include "rhexis/model/checkpoint.hpp"
#include "rhexis/pipeline/run_config.hpp"
#include "rhexis/pipeline/sweep.hpp"
#include "rhexis/pipeline/workspace.hpp"
#include "rhexis/videogen/generate.hpp"

namespace fs = std::filesystem;
using namespace rhexis;
using pipeline::RunConfig;

namespace {

struct ConfigArgs {
  std::string config_file;
  std::vector<std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "JSON config file");
    cmd->add_option("--set", overrides,
                    "override a config key (key=value, repeatable)");
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_file.empty()) cfg = pipeline::load_run_config(config_file);
    pipeline::apply_overrides(cfg, overrides);
    cfg.validate();
    return cfg;
  }
};

void write_json(const fs::path& path, const nlohmann::json& j) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << j.dump(2) << "\n";
  if (!out.good()) throw DataError("failed to write " + path.string());
}

// --------------------------------------------------------------------------

int cmd_generate(const ConfigArgs& cargs, const std::string& out_dir) {
  const RunConfig cfg = cargs.resolve();
  videogen::generate_corpus(cfg.generator_config(), out_dir);
  pipeline::write_run_meta(out_dir, cfg, "generate");
  const data::Corpus corpus = data::load_corpus(out_dir);
  long frames = 0, labeled = 0;
  for (const auto& v : corpus.videos) frames += v.num_frames;
  for (const auto& l : corpus.labels) labeled += l.labeled() ? 1 : 0;
  std::printf("generated %zu videos (%ld frames, %ld labeled) in %s\n",
              corpus.videos.size(), frames, labeled, out_dir.c_str());
  return 0;
}

int cmd_split(const ConfigArgs& cargs, const std::string& corpus_dir,
              std::string out_file) {
  const RunConfig cfg = cargs.resolve();
  if (out_file.empty()) out_file = (fs::path(corpus_dir) / "splits.json").string();
  const data::Corpus corpus = data::load_corpus(corpus_dir);
  const data::SplitAssignment assign =
      data::split_corpus(corpus, cfg.seed, cfg.split_options());
  data::save_splits(out_file, assign);
  int counts[3] = {0, 0, 0};
  for (const auto& [id, split] : assign.by_id)
    counts[static_cast<int>(split)]++;
  std::printf(
      "split %zu videos: %d train / %d validation / %d test "
      "(stratification deviation %.3f) -> %s\n",
      assign.by_id.size(), counts[0], counts[1], counts[2],
      assign.source_deviation, out_file.c_str());
  return 0;
}

int cmd_snippets(const ConfigArgs& cargs, const std::string& corpus_dir,
                 std::string splits_file, const std::string& out_file) {
  const RunConfig cfg = cargs.resolve();
  if (splits_file.empty())
    splits_file = (fs::path(corpus_dir) / "splits.json").string();
  const pipeline::Workspace ws =
      pipeline::open_workspace(corpus_dir, splits_file);
  const nlohmann::json summary = pipeline::snippet_summary(ws, cfg);
  if (out_file.empty()) {
    std::cout << summary.dump(2) << "\n";
  } else {
    write_json(out_file, summary);
    std::printf("wrote %s\n", out_file.c_str());
  }
  return 0;
}

int cmd_train(const ConfigArgs& cargs, const std::string& corpus_dir,
              std::string splits_file, std::uint64_t seed,
              const std::string& out_dir) {
  RunConfig cfg = cargs.resolve();
  cfg.seed = seed;
  if (splits_file.empty())
    splits_file = (fs::path(corpus_dir) / "splits.json").string();
  const pipeline::Workspace ws =
      pipeline::open_workspace(corpus_dir, splits_file);

  const auto train = pipeline::samples_for(ws, cfg, data::Domain::kSource,
                                           data::Split::kTrain);
  const auto val = pipeline::samples_for(ws, cfg, data::Domain::kSource,
                                         data::Split::kValidation);
  model::FrameStore store(&ws.corpus, cfg.frame_size);

  fs::create_directories(out_dir);
  model::TrainOptions opt = cfg.train_options();
  opt.log_path = fs::path(out_dir) / "train_log.jsonl";

  const model::TrainResult run =
      model::train_best_of(ws.corpus, store, cfg.model_config(), train, val,
                           cfg.horizon, opt, cfg.run_seeds());

  const nlohmann::json meta{{"command", "train"},
                            {"best_val_auc", run.best_val_auc},
                            {"best_epoch", run.best_epoch},
                            {"seed", run.seed},
                            {"horizon", cfg.horizon},
                            {"horizon_mode", cfg.horizon_mode},
                            {"condition_on_horizon", cfg.condition_on_horizon},
                            {"config_hash", cfg.hash()},
                            {"config", cfg.to_json()}};
  model::AnticipationNet<float> net = run.net;
  const fs::path ckpt = fs::path(out_dir) / "model.ckpt";
  model::save_checkpoint(ckpt, net, meta);
  pipeline::write_run_meta(out_dir, cfg, "train");
  std::printf("trained %d seed(s); best validation AUC %.4f (seed %llu) -> %s\n",
              cfg.train_seeds, run.best_val_auc,
              static_cast<unsigned long long>(run.seed), ckpt.c_str());
  return 0;
}

int cmd_pretrain(const ConfigArgs& cargs, const std::string& corpus_dir,
                 std::string splits_file, std::uint64_t seed,
                 const std::string& out_dir) {
  RunConfig cfg = cargs.resolve();
  cfg.seed = seed;
  if (splits_file.empty())
    splits_file = (fs::path(corpus_dir) / "splits.json").string();
  const pipeline::Workspace ws =
      pipeline::open_workspace(corpus_dir, splits_file);

  const auto unlabeled = pipeline::unlabeled_samples_for(
      ws, cfg, data::Domain::kTarget, data::Split::kTrain);
  model::FrameStore store(&ws.corpus, cfg.frame_size);
  pipeline::install_homogenizer(store, ws.corpus, cfg);

  model::AnticipationNet<float> net(cfg.model_config(), seed);
  const data::SnippetSpec spec = cfg.snippet_spec();
  adapt::PretextResult res;
  if (cfg.pretext_task == "frame_order") {
    res = adapt::pretrain_frame_order(net, store, unlabeled, spec,
                                      cfg.pretext_options(),
                                      derive_seed(seed, "pretext"));
  } else {
    res = adapt::pretrain_reconstruction(net, store, unlabeled, spec,
                                         cfg.pretext_options(),
                                         derive_seed(seed, "pretext"));
  }

  fs::create_directories(out_dir);
  const nlohmann::json meta{{"command", "pretrain"},
                            {"pretext_task", cfg.pretext_task},
                            {"final_loss", res.final_loss},
                            {"accuracy", res.accuracy},
                            {"steps", res.steps},
                            {"seed", seed},
                            {"config_hash", cfg.hash()},
                            {"config", cfg.to_json()}};
  const fs::path ckpt = fs::path(out_dir) / "pretext.ckpt";
  model::save_checkpoint(ckpt, net, meta);
  pipeline::write_run_meta(out_dir, cfg, "pretrain");
  std::printf("pretext '%s': loss %.4f%s over %d steps -> %s\n",
              cfg.pretext_task.c_str(), res.final_loss,
              cfg.pretext_task == "frame_order"
                  ? (" accuracy " + std::to_string(res.accuracy)).c_str()
                  : "",
              res.steps, ckpt.c_str());
  return 0;
}

int cmd_adapt(const ConfigArgs& cargs, const std::string& corpus_dir,
              std::string splits_file, std::uint64_t seed,
              const std::string& out_dir, const std::string& warm_start) {
  RunConfig cfg = cargs.resolve();
  cfg.seed = seed;
  if (splits_file.empty())
    splits_file = (fs::path(corpus_dir) / "splits.json").string();
  const pipeline::Workspace ws =
      pipeline::open_workspace(corpus_dir, splits_file);

  const auto train = pipeline::samples_for(ws, cfg, data::Domain::kSource,
                                           data::Split::kTrain);
  const auto val = pipeline::samples_for(ws, cfg, data::Domain::kSource,
                                         data::Split::kValidation);
  const auto target = pipeline::unlabeled_samples_for(
      ws, cfg, data::Domain::kTarget, data::Split::kTrain);

  model::FrameStore store(&ws.corpus, cfg.frame_size);
  pipeline::install_homogenizer(store, ws.corpus, cfg);

  std::optional<model::AnticipationNet<float>> warm;
  if (!warm_start.empty()) warm = model::load_checkpoint(warm_start);

  fs::create_directories(out_dir);
  adapt::AdaptOptions opt = cfg.adapt_options();
  opt.log_path = fs::path(out_dir) / "adapt_log.jsonl";

  const adapt::AdaptResult run = adapt::train_adapted(
      ws.corpus, store, cfg.model_config(), train, val, target, cfg.horizon,
      opt, seed, warm ? &*warm : nullptr);

  const nlohmann::json meta{{"command", "adapt"},
                            {"adapt_kind", cfg.adapt_kind},
                            {"lambda_adapt", cfg.lambda_adapt},
                            {"best_val_auc", run.best_val_auc},
                            {"best_epoch", run.best_epoch},
                            {"seed", seed},
                            {"horizon", cfg.horizon},
                            {"warm_start", warm_start},
                            {"config_hash", cfg.hash()},
                            {"config", cfg.to_json()}};
  model::AnticipationNet<float> net = run.net;
  const fs::path ckpt = fs::path(out_dir) / "model.ckpt";
  model::save_checkpoint(ckpt, net, meta);
  pipeline::write_run_meta(out_dir, cfg, "adapt");
  std::printf("adapted (%s): best source validation AUC %.4f -> %s\n",
              cfg.adapt_kind.c_str(), run.best_val_auc, ckpt.c_str());
  return 0;
}

int cmd_eval(const ConfigArgs& cargs, const std::string& corpus_dir,
             std::string splits_file, const std::string& checkpoint,
             const std::string& domain_name, const std::string& split_name,
             const std::string& out_dir) {
  RunConfig cfg = cargs.resolve();
  if (splits_file.empty())
    splits_file = (fs::path(corpus_dir) / "splits.json").string();
  const pipeline::Workspace ws =
      pipeline::open_workspace(corpus_dir, splits_file);

  nlohmann::json meta;
  model::AnticipationNet<float> net = model::load_checkpoint(checkpoint, &meta);
  // The checkpoint owns the snippet geometry; the config supplies the rest.
  cfg.frames = net.config().frames;
  cfg.stride = net.config().stride;
  cfg.frame_size = net.config().frame_size;
  const bool condition = meta.value("condition_on_horizon", true);

  const data::Domain domain = domain_name == "source" ? data::Domain::kSource
                                                      : data::Domain::kTarget;
  const data::Split split = data::split_from_name(split_name);
  // Build at the longest horizon so the curve can visit every shorter one.
  const auto samples = pipeline::samples_for(ws, cfg, domain, split, 5);
  if (samples.empty()) throw DataError("no labeled samples in that split");

  model::FrameStore store(&ws.corpus, cfg.frame_size);
  pipeline::install_homogenizer(store, ws.corpus, cfg);

  const eval::EvalReport report = eval::evaluate_split(
      net, store, ws.corpus, samples, cfg.horizon, condition,
      cfg.max_eval_samples);
  const auto curve = eval::horizon_curve(net, store, ws.corpus, samples,
                                         condition, cfg.max_eval_samples);

  nlohmann::json out{{"checkpoint", checkpoint},
                     {"domain", domain_name},
                     {"split", split_name},
                     {"report", report.to_json()},
                     {"horizon_curve", nlohmann::json::array()}};
  for (const auto& r : curve) out["horizon_curve"].push_back(r.to_json());

  if (out_dir.empty()) {
    std::cout << out.dump(2) << "\n";
  } else {
    fs::create_directories(out_dir);
    write_json(fs::path(out_dir) / "report.json", out);

    std::vector<eval::Bar> bars;
    for (int c = 0; c < kNumClasses; ++c) {
      const auto& r = report.per_class[c];
      bars.push_back({kClassNames[c], r.auc, r.ci_low, r.ci_high, r.defined});
    }
    eval::save_bar_chart(fs::path(out_dir) / "fig_class_auc.png",
                         "per-class anticipation AUC (horizon " +
                             std::to_string(cfg.horizon) + " s)",
                         "AUC", bars, 0.0, 1.0);

    eval::Series series{"overall AUC", {}, {}};
    for (int h = 1; h <= 5; ++h) {
      series.x.push_back(h);
      series.y.push_back(curve[h - 1].overall().auc);
    }
    eval::save_line_chart(fs::path(out_dir) / "fig_horizon.png",
                          "anticipation AUC by horizon", "horizon (s)", "AUC",
                          {series}, 0.3, 1.0);
    pipeline::write_run_meta(out_dir, cfg, "eval");
    std::printf("evaluated %ld samples; overall AUC %.4f -> %s\n",
                report.samples, report.overall().auc, out_dir.c_str());
  }
  return 0;
}

int cmd_sweep(const ConfigArgs& cargs, const std::string& corpus_dir,
              std::string splits_file, std::uint64_t seed,
              const std::string& out_dir) {
  RunConfig cfg = cargs.resolve();
  cfg.seed = seed;
  if (splits_file.empty())
    splits_file = (fs::path(corpus_dir) / "splits.json").string();
  const pipeline::Workspace ws =
      pipeline::open_workspace(corpus_dir, splits_file);

  model::FrameStore store(&ws.corpus, cfg.frame_size);
  const pipeline::SweepResult result =
      pipeline::run_horizon_sweep(ws, store, cfg, seed);

  fs::create_directories(out_dir);
  write_json(fs::path(out_dir) / "sweep.json", result.to_json());

  std::vector<eval::Series> series(3);
  series[0].name = "fixed";
  series[1].name = "conditioned";
  series[2].name = "unconditioned";
  for (int h = 1; h <= 5; ++h) {
    for (auto& s : series) s.x.push_back(h);
    series[0].y.push_back(result.fixed_auc[h - 1]);
    series[1].y.push_back(result.conditioned_auc[h - 1]);
    series[2].y.push_back(result.unconditioned_auc[h - 1]);
  }
  eval::save_line_chart(fs::path(out_dir) / "fig_horizon.png",
                        "anticipation AUC by horizon and strategy",
                        "horizon (s)", "AUC", series, 0.3, 1.0);
  pipeline::write_run_meta(out_dir, cfg, "sweep");
  std::printf(
      "sweep done: fixed %.3f->%.3f, conditioned %.3f->%.3f, "
      "unconditioned %.3f->%.3f (sensitivity %.2f) -> %s\n",
      result.fixed_auc[0], result.fixed_auc[4], result.conditioned_auc[0],
      result.conditioned_auc[4], result.unconditioned_auc[0],
      result.unconditioned_auc[4], result.conditioning_sensitivity,
      out_dir.c_str());
  return 0;
}

int cmd_latency(const ConfigArgs& cargs, const std::string& pairs_arg,
                const std::string& out_dir) {
  const RunConfig cfg = cargs.resolve();

  std::vector<std::pair<int, int>> pairs;
  std::string token;
  std::istringstream stream(pairs_arg);
  while (std::getline(stream, token, ',')) {
    const size_t colon = token.find(':');
    if (colon == std::string::npos)
      throw ConfigError("latency pairs must look like L:S,L:S,...");
    pairs.emplace_back(std::stoi(token.substr(0, colon)),
                       std::stoi(token.substr(colon + 1)));
  }
  if (pairs.empty()) throw ConfigError("no latency pairs given");

  nlohmann::json out = nlohmann::json::array();
  std::printf("%8s %8s %12s %12s %12s %12s\n", "frames", "stride", "total ms",
              "mean ms", "p90 ms", "spatial ms");
  for (const auto& [frames, stride] : pairs) {
    RunConfig variant = cfg;
    variant.frames = frames;
    variant.stride = stride;
    const eval::LatencyReport rep = eval::measure_latency(
        variant.model_config(), cfg.latency_inferences, cfg.seed);
    out.push_back(rep.to_json());
    std::printf("%8d %8d %12.2f %12.4f %12.4f %12.2f\n", rep.frames,
                rep.stride, rep.total_ms, rep.mean_ms, rep.p90_ms,
                rep.spatial_total_ms);
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_json(fs::path(out_dir) / "latency.json", out);
    pipeline::write_run_meta(out_dir, cfg, "latency");
    std::printf("wrote %s\n", (fs::path(out_dir) / "latency.json").c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anticipatory surgical-error prediction pipeline"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // Shared option storage per subcommand.
  struct {
    ConfigArgs cargs;
    std::string out;
  } gen;
  struct {
    ConfigArgs cargs;
    std::string corpus, out;
  } spl;
  struct {
    ConfigArgs cargs;
    std::string corpus, splits, out;
  } snip;
  struct {
    ConfigArgs cargs;
    std::string corpus, splits, out;
    std::uint64_t seed = 0;
  } tr, pre, swp;
  struct {
    ConfigArgs cargs;
    std::string corpus, splits, out, warm;
    std::uint64_t seed = 0;
  } ad;
  struct {
    ConfigArgs cargs;
    std::string corpus, splits, checkpoint, domain = "target",
                split = "test", out;
  } ev;
  struct {
    ConfigArgs cargs;
    std::string pairs = "1:1,10:3,30:2,60:1", out;
  } lat;

  CLI::App* c_gen = app.add_subcommand("generate", "synthesize a corpus");
  gen.cargs.attach(c_gen);
  c_gen->add_option("--out", gen.out, "corpus directory")->required();

  CLI::App* c_spl = app.add_subcommand("split", "assign videos to splits");
  spl.cargs.attach(c_spl);
  c_spl->add_option("--corpus", spl.corpus, "corpus directory")->required();
  c_spl->add_option("--out", spl.out, "splits file (default corpus/splits.json)");

  CLI::App* c_snip = app.add_subcommand("snippets", "summarize snippets");
  snip.cargs.attach(c_snip);
  c_snip->add_option("--corpus", snip.corpus, "corpus directory")->required();
  c_snip->add_option("--splits", snip.splits, "splits file");
  c_snip->add_option("--out", snip.out, "write JSON here instead of stdout");

  CLI::App* c_tr = app.add_subcommand("train", "supervised source training");
  tr.cargs.attach(c_tr);
  c_tr->add_option("--corpus", tr.corpus, "corpus directory")->required();
  c_tr->add_option("--splits", tr.splits, "splits file");
  c_tr->add_option("--seed", tr.seed, "run seed")->required();
  c_tr->add_option("--out", tr.out, "output directory")->required();

  CLI::App* c_pre = app.add_subcommand("pretrain", "self-supervised pretext");
  pre.cargs.attach(c_pre);
  c_pre->add_option("--corpus", pre.corpus, "corpus directory")->required();
  c_pre->add_option("--splits", pre.splits, "splits file");
  c_pre->add_option("--seed", pre.seed, "run seed")->required();
  c_pre->add_option("--out", pre.out, "output directory")->required();

  CLI::App* c_ad = app.add_subcommand("adapt", "domain-adaptive training");
  ad.cargs.attach(c_ad);
  c_ad->add_option("--corpus", ad.corpus, "corpus directory")->required();
  c_ad->add_option("--splits", ad.splits, "splits file");
  c_ad->add_option("--seed", ad.seed, "run seed")->required();
  c_ad->add_option("--out", ad.out, "output directory")->required();
  c_ad->add_option("--warm-start", ad.warm, "checkpoint to start from");

  CLI::App* c_ev = app.add_subcommand("eval", "evaluate a checkpoint");
  ev.cargs.attach(c_ev);
  c_ev->add_option("--corpus", ev.corpus, "corpus directory")->required();
  c_ev->add_option("--splits", ev.splits, "splits file");
  c_ev->add_option("--checkpoint", ev.checkpoint, "model checkpoint")->required();
  c_ev->add_option("--domain", ev.domain, "source|target")
      ->check(CLI::IsMember({"source", "target"}));
  c_ev->add_option("--split", ev.split, "validation|test")
      ->check(CLI::IsMember({"train", "validation", "test"}));
  c_ev->add_option("--out", ev.out, "report directory (stdout if omitted)");

  CLI::App* c_swp = app.add_subcommand("sweep", "horizon study");
  swp.cargs.attach(c_swp);
  c_swp->add_option("--corpus", swp.corpus, "corpus directory")->required();
  c_swp->add_option("--splits", swp.splits, "splits file");
  c_swp->add_option("--seed", swp.seed, "run seed")->required();
  c_swp->add_option("--out", swp.out, "output directory")->required();

  CLI::App* c_lat = app.add_subcommand("latency", "inference timing");
  lat.cargs.attach(c_lat);
  c_lat->add_option("--pairs", lat.pairs, "frames:stride list");
  c_lat->add_option("--out", lat.out, "output directory (optional)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_gen->parsed()) return cmd_generate(gen.cargs, gen.out);
    if (c_spl->parsed()) return cmd_split(spl.cargs, spl.corpus, spl.out);
    if (c_snip->parsed())
      return cmd_snippets(snip.cargs, snip.corpus, snip.splits, snip.out);
    if (c_tr->parsed())
      return cmd_train(tr.cargs, tr.corpus, tr.splits, tr.seed, tr.out);
    if (c_pre->parsed())
      return cmd_pretrain(pre.cargs, pre.corpus, pre.splits, pre.seed, pre.out);
    if (c_ad->parsed())
      return cmd_adapt(ad.cargs, ad.corpus, ad.splits, ad.seed, ad.out,
                       ad.warm);
    if (c_ev->parsed())
      return cmd_eval(ev.cargs, ev.corpus, ev.splits, ev.checkpoint, ev.domain,
                      ev.split, ev.out);
    if (c_swp->parsed())
      return cmd_sweep(swp.cargs, swp.corpus, swp.splits, swp.seed, swp.out);
    if (c_lat->parsed()) return cmd_latency(lat.cargs, lat.pairs, lat.out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
