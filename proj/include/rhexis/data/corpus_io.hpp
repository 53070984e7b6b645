#pragma once

// ============================================================================
// On-disk corpus reading. The layout is the one the generator writes:
//
//   <root>/<domain>/<video_id>/frames/%06d.png
//   <root>/<domain>/<video_id>/annotations.jsonl   (labeled videos only)
//   <root>/manifest.json
//
// The manifest and all annotations load eagerly (they are small); frames
// load on demand per video.
// ============================================================================

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "rhexis/data/video.hpp"
#include "rhexis/image.hpp"

namespace rhexis::data {

struct Corpus {
  std::filesystem::path root;
  std::vector<VideoMeta> videos;
  std::vector<VideoLabels> labels;  // parallel to videos; empty if unlabeled
  std::unordered_map<std::string, int> by_id;

  int index_of(const std::string& id) const {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("unknown video id: " + id);
    return it->second;
  }
  std::filesystem::path video_dir(int v) const {
    return root / domain_name(videos[v].domain) / videos[v].id;
  }
};

namespace detail {

inline VideoMeta meta_from_json(const nlohmann::json& j) {
  VideoMeta m;
  m.id = j.at("id").get<std::string>();
  m.domain = domain_from_name(j.at("domain").get<std::string>());
  m.fps = j.at("fps").get<int>();
  m.num_frames = j.contains("num_frames")
                     ? j.at("num_frames").get<int>()
                     : static_cast<int>(
                           std::lround(j.at("duration_s").get<double>() * m.fps));
  m.width = j.at("resolution")[0].get<int>();
  m.height = j.at("resolution")[1].get<int>();
  m.recording_day = j.at("recording_day").get<int>();
  m.labeled = j.at("labeled").get<bool>();
  if (j.contains("eye")) {
    m.eye_cx = j["eye"].at("cx").get<double>();
    m.eye_cy = j["eye"].at("cy").get<double>();
    m.eye_r = j["eye"].at("r").get<double>();
  }
  if (m.fps != kFps) throw DataError("unsupported fps for video " + m.id);
  return m;
}

inline VideoLabels read_annotations(const std::filesystem::path& path,
                                    int num_frames) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  VideoLabels labels;
  labels.errors.assign(num_frames, 0);
  labels.euler.assign(num_frames, {});
  std::string line;
  int count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    const int f = j.at("frame").get<int>();
    if (f < 0 || f >= num_frames)
      throw DataError("annotation frame out of range in " + path.string());
    const auto& e = j.at("errors");
    ErrorMask m = 0;
    if (e.at("smoothness").get<bool>()) mask_set(m, kSmoothness);
    if (e.at("out_of_red_reflex").get<bool>()) mask_set(m, kOutOfRedReflex);
    if (e.at("radial_extension").get<bool>()) mask_set(m, kRadialExtension);
    if (e.at("tear").get<bool>()) mask_set(m, kTear);
    labels.errors[f] = m;
    const auto& eu = j.at("euler");
    labels.euler[f] = {eu.at("x").get<double>(), eu.at("y").get<double>(),
                       eu.at("z").get<double>()};
    ++count;
  }
  if (count != num_frames)
    throw DataError("annotation count mismatch in " + path.string());
  return labels;
}

}  // namespace detail

inline Corpus load_corpus(const std::filesystem::path& root) {
  std::ifstream in(root / "manifest.json");
  if (!in) throw DataError("no manifest.json under " + root.string());
  nlohmann::json manifest = nlohmann::json::parse(in);
  Corpus corpus;
  corpus.root = root;
  for (const auto& j : manifest.at("videos")) {
    VideoMeta m = detail::meta_from_json(j);
    const int idx = static_cast<int>(corpus.videos.size());
    if (!corpus.by_id.emplace(m.id, idx).second)
      throw DataError("duplicate video id: " + m.id);
    corpus.labels.push_back(
        m.labeled ? detail::read_annotations(
                        root / domain_name(m.domain) / m.id /
                            "annotations.jsonl",
                        m.num_frames)
                  : VideoLabels{});
    corpus.videos.push_back(std::move(m));
  }
  return corpus;
}

inline ImageU8 load_frame(const Corpus& corpus, int video, int t) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06d.png", t);
  return read_png((corpus.video_dir(video) / "frames" / name).string());
}

inline std::vector<ImageU8> load_frames(const Corpus& corpus, int video) {
  std::vector<ImageU8> frames;
  frames.reserve(corpus.videos[video].num_frames);
  for (int t = 0; t < corpus.videos[video].num_frames; ++t)
    frames.push_back(load_frame(corpus, video, t));
  return frames;
}

}  // namespace rhexis::data
