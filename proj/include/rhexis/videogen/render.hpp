#pragma once

// ============================================================================
// Analytic per-pixel scene renderer. Draws, per frame: the dark surround
// (zeroed outside the eye circle when the style masks the border), the iris
// ring, the pupil with a red-reflex glow whose brightness falls and whose
// center shifts as the eye tilts, the capsulorhexis flap arc (reading the
// historical radius profile), a tear streak at the leading edge while a tear
// is flagged, and the tool tip. Everything uses soft edges so sub-pixel
// motion of scene elements shows up in pixel intensities at small
// resolutions.
// ============================================================================

#include <cmath>

#include "rhexis/image.hpp"
#include "rhexis/rng.hpp"
#include "rhexis/videogen/scene.hpp"
#include "rhexis/videogen/style.hpp"

namespace rhexis::videogen {

// Palette and framing drawn once per video from the style ranges.
struct VideoLook {
  Rgb background, iris, pupil, reflex, flap, tool, tear_mark;
  Rgb day{1, 1, 1};
  float eye_cx = 0, eye_cy = 0;  // pixels
  float eye_r = 0;               // pixels
  float noise = 0;
};

inline VideoLook sample_look(const DomainStyle& style, int recording_day,
                             Rng& rng) {
  VideoLook look;
  look.background = style.background.sample(rng);
  look.iris = style.iris.sample(rng);
  look.pupil = style.pupil.sample(rng);
  look.reflex = style.reflex.sample(rng);
  look.flap = style.flap.sample(rng);
  look.tool = style.tool.sample(rng);
  look.tear_mark = style.tear_mark.sample(rng);
  look.day = day_tint_factor(style, recording_day);
  const float res = static_cast<float>(style.resolution);
  look.eye_cx = res * (0.5f + static_cast<float>(uniform(rng, -0.02, 0.02)));
  look.eye_cy = res * (0.5f + static_cast<float>(uniform(rng, -0.02, 0.02)));
  look.eye_r = 0.5f * res * style.zoom *
               (1.0f + static_cast<float>(uniform(rng, -0.03, 0.03)));
  look.noise = style.noise_level;
  return look;
}

namespace detail {

inline float soft_disc(float dist, float radius, float edge) {
  return 1.0f / (1.0f + std::exp((dist - radius) / edge));
}

inline float mix1(float a, float b, float t) { return a + (b - a) * t; }

inline void mix_rgb(float& r, float& g, float& b, const Rgb& c, float t) {
  r = mix1(r, c.r, t);
  g = mix1(g, c.g, t);
  b = mix1(b, c.b, t);
}

}  // namespace detail

// Render one frame. frame_rng drives only the per-pixel sensor noise, so a
// frame can be reproduced in isolation from (video seed, frame index).
inline Image render_frame(const SceneTrack& track, int t,
                          const DomainStyle& style, const VideoLook& look,
                          Rng& frame_rng) {
  using detail::mix_rgb;
  using detail::soft_disc;
  const SceneState& s = track.states[t];
  const int res = style.resolution;
  Image img(res, res);

  const float pupil_r = 0.80f * look.eye_r;
  const float reflex_r = 0.62f * pupil_r;
  const float arc_w = std::max(0.9f, 0.045f * pupil_r);
  const float tool_px = 0.5f + 0.085f * pupil_r;
  const float edge = std::max(0.5f, res / 128.0f);

  // Red reflex: brightness attenuates and center shifts with tilt.
  const double mag = std::sqrt(s.tilt_x * s.tilt_x + s.tilt_y * s.tilt_y);
  const float dim = static_cast<float>(std::min(1.0, mag / kRedReflexAngle));
  const float reflex_gain = 1.0f - 0.72f * dim * dim;
  const float rcx =
      look.eye_cx + 0.18f * pupil_r * static_cast<float>(s.tilt_x / kRedReflexAngle);
  const float rcy =
      look.eye_cy + 0.18f * pupil_r * static_cast<float>(s.tilt_y / kRedReflexAngle);

  const float tx = static_cast<float>(s.tool_x) * res;
  const float ty = static_cast<float>(s.tool_y) * res;
  const bool tearing = mask_has(track.flags[t], kTear);
  const int bins = static_cast<int>(track.hist_radius.size());
  const float flap_angle = static_cast<float>(s.flap_angle);

  for (int y = 0; y < res; ++y) {
    for (int x = 0; x < res; ++x) {
      const float dx = x + 0.5f - look.eye_cx;
      const float dy = y + 0.5f - look.eye_cy;
      const float dist = std::sqrt(dx * dx + dy * dy);
      const float rho = dist / look.eye_r;

      if (style.border_mask && rho > 1.0f) {
        img.at(0, y, x) = img.at(1, y, x) = img.at(2, y, x) = 0.0f;
        continue;
      }

      float r, g, b;
      if (rho > 1.0f) {
        const float shade = 1.0f - 0.25f * std::min(1.5f, rho - 1.0f);
        r = look.background.r * shade;
        g = look.background.g * shade;
        b = look.background.b * shade;
      } else if (dist > pupil_r) {
        const float shade = 1.0f - 0.35f * (rho - 0.8f) / 0.2f;
        r = look.iris.r * shade;
        g = look.iris.g * shade;
        b = look.iris.b * shade;
      } else {
        r = look.pupil.r;
        g = look.pupil.g;
        b = look.pupil.b;
        const float rdx = x + 0.5f - rcx;
        const float rdy = y + 0.5f - rcy;
        const float rd = std::sqrt(rdx * rdx + rdy * rdy);
        const float glow = reflex_gain * soft_disc(rd, reflex_r, 2 * edge);
        r += look.reflex.r * glow;
        g += look.reflex.g * glow;
        b += look.reflex.b * glow;
      }

      // Flap arc over the already-cut angular range.
      if (dist <= pupil_r * 1.05f) {
        float a_rel = std::atan2(dy, dx) - static_cast<float>(track.start_angle);
        a_rel -= 2 * static_cast<float>(M_PI) *
                 std::floor(a_rel / (2 * static_cast<float>(M_PI)));
        if (a_rel <= flap_angle) {
          const int bin = std::min(
              bins - 1, static_cast<int>(a_rel / (2 * M_PI) * bins));
          const float arc_r =
              static_cast<float>(track.hist_radius[bin]) * pupil_r;
          const float d_arc = std::abs(dist - arc_r);
          const float it = std::exp(-0.5f * (d_arc / arc_w) * (d_arc / arc_w));
          mix_rgb(r, g, b, look.flap, 0.85f * it);

          // Tear streak: jagged radial mark just behind the leading edge.
          if (tearing && a_rel > flap_angle - 0.10f) {
            const float jag =
                0.5f + 0.5f * std::sin(31.0f * a_rel + 0.7f * t);
            const float reach = (0.06f + 0.16f * jag) * pupil_r;
            if (dist > arc_r - 1.0f && dist < arc_r + reach)
              mix_rgb(r, g, b, look.tear_mark, 0.9f);
          }
        }
      }

      // Tool tip.
      const float tdx = x + 0.5f - tx;
      const float tdy = y + 0.5f - ty;
      const float td = std::sqrt(tdx * tdx + tdy * tdy);
      mix_rgb(r, g, b, look.tool, 0.95f * soft_disc(td, tool_px, edge));

      if (style.vignette > 0) {
        const float v = 1.0f - style.vignette * std::min(1.5f, rho * rho);
        r *= v;
        g *= v;
        b *= v;
      }
      r *= look.day.r;
      g *= look.day.g;
      b *= look.day.b;

      if (look.noise > 0) {
        r += static_cast<float>(gaussian(frame_rng, 0.0, look.noise));
        g += static_cast<float>(gaussian(frame_rng, 0.0, look.noise));
        b += static_cast<float>(gaussian(frame_rng, 0.0, look.noise));
      }
      img.at(0, y, x) = std::clamp(r, 0.0f, 1.0f);
      img.at(1, y, x) = std::clamp(g, 0.0f, 1.0f);
      img.at(2, y, x) = std::clamp(b, 0.0f, 1.0f);
    }
  }
  return img;
}

}  // namespace rhexis::videogen
