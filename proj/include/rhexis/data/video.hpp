#pragma once

// ============================================================================
// Core video record types shared by the generator, the ingest layer and the
// snippet builder. Frames are stored separately (see FrameStore) so label-only
// passes never touch pixel data.
// ============================================================================

#include <cmath>
#include <string>
#include <vector>

#include "rhexis/common.hpp"

namespace rhexis::data {

enum class Domain { kSource, kTarget };

inline const char* domain_name(Domain d) {
  return d == Domain::kSource ? "source" : "target";
}

inline Domain domain_from_name(const std::string& s) {
  if (s == "source") return Domain::kSource;
  if (s == "target") return Domain::kTarget;
  throw ConfigError("unknown domain: " + s);
}

struct EulerAngles {
  double x = 0, y = 0, z = 0;
};

struct VideoMeta {
  std::string id;
  Domain domain = Domain::kSource;
  int fps = kFps;
  int num_frames = 0;
  int width = 0;
  int height = 0;
  int recording_day = 0;    // group key for target splits
  bool labeled = false;
  // Eye region in pixels (center, radius), emitted by the generator and used
  // by the source crop. Zero radius means unknown (centered crop fallback).
  double eye_cx = 0, eye_cy = 0, eye_r = 0;

  double duration_s() const {
    return static_cast<double>(num_frames) / fps;
  }
};

struct VideoLabels {
  std::vector<ErrorMask> errors;   // one mask per frame; empty if unlabeled
  std::vector<EulerAngles> euler;  // one per frame; may be empty

  bool labeled() const { return !errors.empty(); }
};

// Per-frame eye tilt flag: true when the squared tilt magnitude exceeds
// (pi/12)^2 (strict inequality).
inline std::vector<bool> annotate_red_reflex(
    const std::vector<EulerAngles>& euler) {
  std::vector<bool> flags(euler.size());
  const double thresh = red_reflex_threshold_sq();
  for (size_t t = 0; t < euler.size(); ++t) {
    const EulerAngles& e = euler[t];
    if (!std::isfinite(e.x) || !std::isfinite(e.y))
      throw DataError("annotate_red_reflex: non-finite angle at frame " +
                      std::to_string(t));
    flags[t] = e.x * e.x + e.y * e.y > thresh;
  }
  return flags;
}

}  // namespace rhexis::data
