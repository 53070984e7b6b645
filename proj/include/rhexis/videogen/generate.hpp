#pragma once

// ============================================================================
// Video and corpus generation. A video is a pure function of (seed, options):
// events are scheduled, scene dynamics integrated, and frames rendered in a
// domain style. A corpus is a directory tree
//
//   <root>/<domain>/<video_id>/frames/%06d.png
//   <root>/<domain>/<video_id>/annotations.jsonl     (labeled videos only)
//   <root>/manifest.json                             (written last, atomically)
//
// Source videos are always labeled. Target videos are labeled only for the
// configured fraction, grouped by recording day, because downstream training
// must treat the remaining target videos as unlabeled.
// ============================================================================

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rhexis/data/video.hpp"
#include "rhexis/image.hpp"
#include "rhexis/rng.hpp"
#include "rhexis/videogen/events.hpp"
#include "rhexis/videogen/render.hpp"
#include "rhexis/videogen/scene.hpp"
#include "rhexis/videogen/style.hpp"

namespace rhexis::videogen {

struct GenVideoOptions {
  std::uint64_t seed = 1;
  data::Domain domain = data::Domain::kSource;
  double duration_s = 30;
  ErrorRates rates;
  int resolution = 64;
  int recording_day = 0;
  int recording_days = 1;  // tint group count (matters for target styles)
  bool labeled = true;
  bool render = true;      // false skips pixel generation (labels only)
  std::string id;          // defaults to a seed-derived name
};

struct GeneratedVideo {
  data::VideoMeta meta;
  data::VideoLabels labels;  // always populated in memory
  SceneTrack scene;
  DomainStyle style;
  VideoLook look;
  std::vector<ImageU8> frames;  // empty when options.render is false
};

// Render one frame of a generated video on demand (bitwise identical to the
// eager path, which uses the same per-frame noise stream).
inline ImageU8 render_video_frame(const GeneratedVideo& v, int t) {
  Rng rng = make_rng(derive_seed(hash_str(v.meta.id), "frame", t));
  return quantize(render_frame(v.scene, t, v.style, v.look, rng));
}

inline GeneratedVideo generate_video(const GenVideoOptions& opt) {
  if (opt.duration_s < 10 || opt.duration_s > 222)
    throw ConfigError("video duration must be in [10, 222] seconds");
  if (opt.resolution < 16) throw ConfigError("resolution too small");
  opt.rates.validate();

  GeneratedVideo v;
  v.meta.id = opt.id.empty()
                  ? std::string(data::domain_name(opt.domain)) + "_" +
                        std::to_string(opt.seed)
                  : opt.id;
  v.meta.domain = opt.domain;
  v.meta.fps = kFps;
  v.meta.num_frames = static_cast<int>(std::lround(opt.duration_s * kFps));
  v.meta.width = v.meta.height = opt.resolution;
  v.meta.recording_day = opt.recording_day;
  v.meta.labeled = opt.labeled;

  const std::uint64_t vid_seed = derive_seed(opt.seed, "video");
  Rng ev_rng = make_rng(derive_seed(vid_seed, "events"));
  std::vector<Event> events = schedule_events(ev_rng, opt.duration_s, opt.rates);
  Rng scene_rng = make_rng(derive_seed(vid_seed, "scene"));
  v.scene = build_scene(scene_rng, v.meta.num_frames, events);

  v.style = default_style(opt.domain, opt.resolution, opt.recording_days);
  Rng look_rng = make_rng(derive_seed(vid_seed, "look"));
  v.look = sample_look(v.style, opt.recording_day, look_rng);
  v.meta.eye_cx = v.look.eye_cx;
  v.meta.eye_cy = v.look.eye_cy;
  v.meta.eye_r = v.look.eye_r;

  v.labels.errors = v.scene.flags;
  v.labels.euler = v.scene.euler;

  if (opt.render) {
    v.frames.reserve(v.meta.num_frames);
    for (int t = 0; t < v.meta.num_frames; ++t) {
      Rng frame_rng = make_rng(derive_seed(hash_str(v.meta.id), "frame", t));
      v.frames.push_back(
          quantize(render_frame(v.scene, t, v.style, v.look, frame_rng)));
    }
  }
  return v;
}

// ----------------------------------------------------------------------------
// Corpus generation
// ----------------------------------------------------------------------------
struct DomainCorpusConfig {
  int videos = 0;
  double duration_min_s = 20;
  double duration_max_s = 40;
  int resolution = 64;
  ErrorRates rates;
  int recording_days = 1;        // > 1 only meaningful for the target domain
  double labeled_fraction = 1.0;
};

struct GeneratorConfig {
  std::uint64_t seed = 1;
  DomainCorpusConfig source;
  DomainCorpusConfig target;
  bool write_frames = true;
};

namespace detail {

// Largest-remainder apportionment of `total` across buckets proportional to
// weights; deterministic (ties by lower index).
inline std::vector<int> apportion(const std::vector<int>& weights, int total) {
  const int n = static_cast<int>(weights.size());
  long wsum = 0;
  for (int w : weights) wsum += w;
  std::vector<int> out(n, 0);
  if (wsum == 0 || total <= 0) return out;
  std::vector<std::pair<double, int>> rem;
  int given = 0;
  for (int i = 0; i < n; ++i) {
    const double exact = static_cast<double>(total) * weights[i] / wsum;
    out[i] = std::min(weights[i], static_cast<int>(exact));
    given += out[i];
    rem.push_back({exact - static_cast<int>(exact), i});
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;
  });
  for (int k = 0; given < total && k < n; ++k) {
    const int i = rem[k].second;
    if (out[i] < weights[i]) {
      ++out[i];
      ++given;
    }
  }
  return out;
}

inline void write_annotations(const std::filesystem::path& path,
                              const data::VideoLabels& labels) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (size_t f = 0; f < labels.errors.size(); ++f) {
    nlohmann::json j;
    j["frame"] = static_cast<int>(f);
    j["errors"] = {
        {"smoothness", mask_has(labels.errors[f], kSmoothness)},
        {"out_of_red_reflex", mask_has(labels.errors[f], kOutOfRedReflex)},
        {"radial_extension", mask_has(labels.errors[f], kRadialExtension)},
        {"tear", mask_has(labels.errors[f], kTear)},
    };
    j["euler"] = {{"x", labels.euler[f].x},
                  {"y", labels.euler[f].y},
                  {"z", labels.euler[f].z}};
    out << j.dump() << "\n";
  }
}

inline nlohmann::json meta_to_json(const data::VideoMeta& m) {
  return nlohmann::json{
      {"id", m.id},
      {"domain", data::domain_name(m.domain)},
      {"fps", m.fps},
      {"duration_s", m.duration_s()},
      {"num_frames", m.num_frames},
      {"resolution", {m.width, m.height}},
      {"recording_day", m.recording_day},
      {"labeled", m.labeled},
      {"eye", {{"cx", m.eye_cx}, {"cy", m.eye_cy}, {"r", m.eye_r}}},
  };
}

}  // namespace detail

// Generate one corpus video by global index, without touching the disk.
inline GeneratedVideo generate_corpus_video(const GeneratorConfig& cfg,
                                            data::Domain domain, int index,
                                            bool render) {
  const DomainCorpusConfig& dc =
      domain == data::Domain::kSource ? cfg.source : cfg.target;
  GenVideoOptions opt;
  opt.seed = derive_seed(cfg.seed, data::domain_name(domain), index);
  opt.domain = domain;
  Rng rng = make_rng(derive_seed(opt.seed, "duration"));
  opt.duration_s = std::floor(uniform(rng, dc.duration_min_s, dc.duration_max_s));
  opt.rates = dc.rates;
  opt.resolution = dc.resolution;
  opt.recording_days = dc.recording_days;
  opt.recording_day = dc.recording_days > 1 ? index % dc.recording_days : 0;
  opt.render = render;

  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c%03d",
                domain == data::Domain::kSource ? 's' : 't', index);
  opt.id = buf;

  // Labeled assignment: per recording day, the trailing videos of the day
  // are labeled so that each day contributes its largest-remainder share of
  // the labeled total.
  if (dc.labeled_fraction >= 1.0) {
    opt.labeled = true;
  } else {
    const int days = std::max(1, dc.recording_days);
    std::vector<int> day_count(days, 0);
    for (int i = 0; i < dc.videos; ++i) ++day_count[days > 1 ? i % days : 0];
    const int total_labeled =
        static_cast<int>(std::lround(dc.labeled_fraction * dc.videos));
    std::vector<int> day_labeled = detail::apportion(day_count, total_labeled);
    const int day = opt.recording_day;
    const int pos_in_day = days > 1 ? index / days : index;
    opt.labeled = pos_in_day >= day_count[day] - day_labeled[day];
  }
  return generate_video(opt);
}

// Generate and write a full corpus. The manifest is written last via a
// temporary file and rename, so a crash mid-run never leaves a readable but
// incomplete corpus root.
inline std::vector<data::VideoMeta> generate_corpus(
    const GeneratorConfig& cfg, const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  fs::create_directories(root);
  std::vector<data::VideoMeta> metas;

  for (data::Domain domain : {data::Domain::kSource, data::Domain::kTarget}) {
    const DomainCorpusConfig& dc =
        domain == data::Domain::kSource ? cfg.source : cfg.target;
    for (int i = 0; i < dc.videos; ++i) {
      GeneratedVideo v =
          generate_corpus_video(cfg, domain, i, cfg.write_frames);
      const fs::path dir = root / data::domain_name(domain) / v.meta.id;
      fs::create_directories(dir / "frames");
      if (cfg.write_frames) {
        char name[32];
        for (int t = 0; t < v.meta.num_frames; ++t) {
          std::snprintf(name, sizeof(name), "%06d.png", t);
          write_png((dir / "frames" / name).string(), v.frames[t]);
        }
      }
      if (v.meta.labeled)
        detail::write_annotations(dir / "annotations.jsonl", v.labels);
      metas.push_back(v.meta);
    }
  }

  nlohmann::json manifest;
  manifest["fps"] = kFps;
  manifest["videos"] = nlohmann::json::array();
  for (const data::VideoMeta& m : metas)
    manifest["videos"].push_back(detail::meta_to_json(m));
  const fs::path tmp = root / "manifest.json.tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << manifest.dump(2) << "\n";
  }
  fs::rename(tmp, root / "manifest.json");
  return metas;
}

}  // namespace rhexis::videogen
