#pragma once

// ============================================================================
// Domain rendering styles. The two domains share scene dynamics but differ in
// palette, zoom, noise and masking, which is exactly the appearance gap the
// adaptation stage has to bridge.
// ============================================================================

#include <array>

#include "rhexis/data/video.hpp"
#include "rhexis/rng.hpp"

namespace rhexis::videogen {

struct Rgb {
  float r = 0, g = 0, b = 0;
};

inline Rgb operator*(const Rgb& c, float k) { return {c.r * k, c.g * k, c.b * k}; }
inline Rgb operator+(const Rgb& a, const Rgb& b) {
  return {a.r + b.r, a.g + b.g, a.b + b.b};
}

// One palette element: a base color plus a per-video jitter range.
struct ColorRange {
  Rgb base;
  float jitter = 0;  // uniform +- per channel, drawn once per video

  Rgb sample(Rng& rng) const {
    return {base.r + static_cast<float>(uniform(rng, -jitter, jitter)),
            base.g + static_cast<float>(uniform(rng, -jitter, jitter)),
            base.b + static_cast<float>(uniform(rng, -jitter, jitter))};
  }
};

struct DomainStyle {
  data::Domain domain = data::Domain::kSource;
  int resolution = 64;
  bool border_mask = true;   // zero everything outside the eye circle
  float zoom = 1.0f;         // eye radius as a fraction of the half-frame
  float noise_level = 0.015f;
  ColorRange background;     // visible only without the border mask
  ColorRange iris;
  ColorRange pupil;
  ColorRange reflex;         // red-reflex glow at full brightness
  ColorRange flap;           // capsulorhexis flap arc
  ColorRange tool;
  ColorRange tear_mark;
  float vignette = 0.0f;     // radial darkening strength
  int recording_days = 1;    // number of per-day tint groups (target only)
  float day_tint = 0.0f;     // +- multiplicative tint range across days
};

// Simulator-like look: cool palette, fixed framing, masked border.
inline DomainStyle source_style(int resolution) {
  DomainStyle s;
  s.domain = data::Domain::kSource;
  s.resolution = resolution;
  s.border_mask = true;
  s.zoom = 0.92f;
  s.noise_level = 0.015f;
  s.background = {{0.02f, 0.02f, 0.03f}, 0.005f};
  s.iris = {{0.30f, 0.42f, 0.55f}, 0.04f};
  s.pupil = {{0.10f, 0.08f, 0.14f}, 0.02f};
  s.reflex = {{0.85f, 0.33f, 0.12f}, 0.05f};
  s.flap = {{0.62f, 0.80f, 0.86f}, 0.04f};
  s.tool = {{0.80f, 0.80f, 0.78f}, 0.04f};
  s.tear_mark = {{0.95f, 0.55f, 0.65f}, 0.03f};
  s.vignette = 0.0f;
  s.recording_days = 1;
  s.day_tint = 0.0f;
  return s;
}

// Surgery-like look: warm palette, tighter zoom, visible surround, more
// sensor noise, and a per-recording-day tint.
inline DomainStyle target_style(int resolution, int recording_days = 5) {
  DomainStyle s;
  s.domain = data::Domain::kTarget;
  s.resolution = resolution;
  s.border_mask = false;
  s.zoom = 1.18f;
  s.noise_level = 0.030f;
  s.background = {{0.36f, 0.16f, 0.13f}, 0.03f};
  s.iris = {{0.48f, 0.34f, 0.18f}, 0.05f};
  s.pupil = {{0.22f, 0.06f, 0.05f}, 0.02f};
  s.reflex = {{0.95f, 0.45f, 0.10f}, 0.05f};
  s.flap = {{0.88f, 0.78f, 0.58f}, 0.04f};
  s.tool = {{0.62f, 0.72f, 0.66f}, 0.04f};
  s.tear_mark = {{0.98f, 0.62f, 0.60f}, 0.03f};
  s.vignette = 0.35f;
  s.recording_days = recording_days;
  s.day_tint = 0.10f;
  return s;
}

inline DomainStyle default_style(data::Domain d, int resolution,
                                 int recording_days = 5) {
  return d == data::Domain::kSource ? source_style(resolution)
                                    : target_style(resolution, recording_days);
}

// Multiplicative RGB tint for one recording day, fixed per (style, day).
inline Rgb day_tint_factor(const DomainStyle& style, int day) {
  if (style.day_tint <= 0 || style.recording_days <= 1) return {1, 1, 1};
  Rng rng = make_rng(derive_seed(0x9e11u, "day_tint", day));
  const float j = style.day_tint;
  return {1 + static_cast<float>(uniform(rng, -j, j)),
          1 + static_cast<float>(uniform(rng, -j, j)),
          1 + static_cast<float>(uniform(rng, -j, j))};
}

}  // namespace rhexis::videogen
