#pragma once

// ============================================================================
// Per-domain frame preprocessing.
//
// Source frames: crop a square around the eye (from manifest metadata when
// available, otherwise the largest centered square), zero every pixel outside
// the inscribed circle, and resize to the configured square size.
//
// Target frames: normalize to [0,1] and resize to the configured square
// size. No masking; bridging that appearance difference is the adaptation
// stage's job.
// ============================================================================

#include <algorithm>
#include <cmath>

#include "rhexis/data/video.hpp"
#include "rhexis/image.hpp"

namespace rhexis::data {

struct EyeCircle {
  double cx = 0, cy = 0, r = 0;  // pixels; r == 0 means unknown
};

inline EyeCircle eye_circle(const VideoMeta& m) {
  return {m.eye_cx, m.eye_cy, m.eye_r};
}

// Zero all pixels outside the largest circle inscribed in the (square)
// image.
inline void zero_outside_circle(Image& img) {
  const float cx = img.width / 2.0f;
  const float cy = img.height / 2.0f;
  const float r = std::min(img.width, img.height) / 2.0f;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const float dx = x + 0.5f - cx;
      const float dy = y + 0.5f - cy;
      if (dx * dx + dy * dy > r * r)
        img.at(0, y, x) = img.at(1, y, x) = img.at(2, y, x) = 0.0f;
    }
}

// Largest square crop centered on (cx, cy), shifted as needed to stay in
// bounds; side limited both by the requested side and the image.
inline Image square_crop_around(const Image& img, double cx, double cy,
                                int side) {
  side = std::min({side, img.width, img.height});
  int x0 = static_cast<int>(std::lround(cx - side / 2.0));
  int y0 = static_cast<int>(std::lround(cy - side / 2.0));
  x0 = std::clamp(x0, 0, img.width - side);
  y0 = std::clamp(y0, 0, img.height - side);
  return crop(img, x0, y0, side, side);
}

inline Image preprocess_source(const Image& frame, const EyeCircle& eye,
                               int out_size) {
  if (std::min(frame.width, frame.height) < out_size)
    throw DataError("source frame smaller than the crop target");
  Image cropped;
  if (eye.r > 0) {
    const int side = std::max(8, static_cast<int>(std::lround(2 * eye.r)));
    cropped = square_crop_around(frame, eye.cx, eye.cy, side);
  } else {
    const int side = std::min(frame.width, frame.height);
    cropped = square_crop_around(frame, frame.width / 2.0, frame.height / 2.0,
                                 side);
  }
  zero_outside_circle(cropped);
  Image out = resize(cropped, out_size, out_size);
  // Resampling at the mask boundary can bleed tiny values outward; re-apply
  // the mask so border pixels are exactly zero.
  zero_outside_circle(out);
  out.clamp01();
  return out;
}

inline Image preprocess_target(const Image& frame, int out_size) {
  if (frame.width < 1 || frame.height < 1)
    throw DataError("empty target frame");
  Image out = resize(frame, out_size, out_size);
  out.clamp01();
  return out;
}

}  // namespace rhexis::data
