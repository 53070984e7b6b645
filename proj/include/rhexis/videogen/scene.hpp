#pragma once

// ============================================================================
// Scene dynamics: integrate per-frame eye tilt, flap growth and tool motion
// from a scheduled event list. All four error classes are expressed through
// deterministic profiles that begin at each event's precursor onset, so the
// warning signature is present in the observable state well before the
// flagged window starts.
//
// Guarantees provided by construction:
//   - out_of_red_reflex flags recomputed from the emitted Euler track match
//     the scheduled windows exactly (the tilt magnitude crosses the
//     threshold precisely at the scheduled frames, and baseline wander plus
//     noise is kept strictly below it elsewhere);
//   - flap_angle is non-decreasing; tilt stays inside (-pi/2, pi/2);
//   - every tear window lies inside a radial-extension window.
// ============================================================================

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "rhexis/common.hpp"
#include "rhexis/data/video.hpp"
#include "rhexis/rng.hpp"
#include "rhexis/videogen/events.hpp"

namespace rhexis::videogen {

struct SceneState {
  int time_index = 0;
  double tilt_x = 0, tilt_y = 0, tilt_z = 0;  // Euler angles, radians
  double flap_angle = 0;       // arc progress in [0, 2pi]
  double flap_radius = 0;      // leading-edge radius in pupil units
  double tool_x = 0, tool_y = 0;  // nominal [0,1] image coordinates
  double irregularity_phase = 0;
};

struct SceneTrack {
  std::vector<SceneState> states;
  std::vector<ErrorMask> flags;
  std::vector<data::EulerAngles> euler;
  std::vector<Event> events;
  // Per-class latent precursor intensity per frame (0 when inactive):
  // smoothness = oscillation envelope above baseline; red reflex = tilt
  // magnitude over threshold ratio; radial = outward drift; tear = flap
  // speed multiplier above 1.
  std::array<std::vector<double>, kNumErrorClasses> precursor;
  // Radius recorded when the flap edge crossed each angle bin; rendering
  // reads bins up to the current flap_angle only.
  std::vector<double> hist_radius;
  double start_angle = 0;  // absolute angle where the flap began
};

namespace detail {

// 6t^5 - 15t^4 + 10t^3, clamped: smooth 0..1 ramp with zero end slopes.
inline double smoothstep5(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (t * (t * 6 - 15) + 10);
}

// Front-loaded 0..1 ramp used for precursor build-up, so a meaningful part
// of the warning signature is already visible one second before the event.
inline double ramp(double t) { return std::pow(std::clamp(t, 0.0, 1.0), 0.7); }

// Per-event tilt-magnitude profile as a fraction of the flag threshold.
// Below 0.97 strictly before `start`, at or above 1.04 inside
// [start, end), strictly below 0.97 from `end` on.
inline double red_reflex_mag_ratio(const Event& e, int t) {
  const int release = static_cast<int>(0.6 * kFps);
  if (t < e.onset || t >= e.end + release) return -1;  // inactive
  if (t < e.start) {
    const double p = static_cast<double>(t - e.onset) / (e.start - e.onset);
    return 0.30 + 0.66 * ramp(p);
  }
  if (t < e.end) {
    const double q = static_cast<double>(t - e.start) / (e.end - e.start);
    return 1.04 + 0.30 * std::sin(M_PI * q);
  }
  const double u = static_cast<double>(t - e.end + 1) / release;
  return std::max(0.30, 0.96 - 0.66 * smoothstep5(u));
}

// Crossfade weight of the baseline component inside an event's profile
// region: fades out over the first 40% of the precursor, fades back in over
// the release window.
inline double baseline_weight(const Event& e, int t) {
  const int release = static_cast<int>(0.6 * kFps);
  if (t < e.onset || t >= e.end + release) return 1;
  const int fade = std::max(1, (e.start - e.onset) * 2 / 5);
  if (t < e.onset + fade)
    return 1 - smoothstep5(static_cast<double>(t - e.onset) / fade);
  if (t < e.end) return 0;
  return smoothstep5(static_cast<double>(t - e.end + 1) / release);
}

// Radial outward drift in pupil units. Ramps during the precursor, peaks
// mid-event, decays after the end.
inline double radial_drift(const Event& e, int t, double amp) {
  const int release = static_cast<int>(0.8 * kFps);
  if (t < e.onset || t >= e.end + release) return 0;
  if (t < e.start) {
    const double p = static_cast<double>(t - e.onset) / (e.start - e.onset);
    return amp * 0.38 * ramp(p);
  }
  if (t < e.end) {
    const double q = static_cast<double>(t - e.start) / (e.end - e.start);
    return amp * (0.38 + 0.62 * std::pow(std::sin(M_PI * q), 0.8));
  }
  const double u = static_cast<double>(t - e.end + 1) / release;
  return amp * 0.38 * (1 - smoothstep5(u));
}

// Smoothness oscillation envelope above the quiet baseline.
inline double oscillation_envelope(const Event& e, int t, double peak) {
  const int release = static_cast<int>(0.7 * kFps);
  if (t < e.onset || t >= e.end + release) return 0;
  const double at_start = 0.021;
  if (t < e.start) {
    const double p = static_cast<double>(t - e.onset) / (e.start - e.onset);
    return at_start * ramp(p);
  }
  if (t < e.end) {
    const double q = static_cast<double>(t - e.start) / (e.end - e.start);
    return at_start + (peak - at_start) * std::pow(std::sin(M_PI * q), 0.7);
  }
  const double u = static_cast<double>(t - e.end + 1) / release;
  return at_start * (1 - smoothstep5(u));
}

// Flap speed multiplier minus 1 for a tear event.
inline double tear_speed_excess(const Event& e, int t) {
  const int release = static_cast<int>(0.6 * kFps);
  if (t < e.onset || t >= e.end + release) return 0;
  const double full = 1.5 * e.magnitude;
  if (t < e.start) {
    const double p = static_cast<double>(t - e.onset) / (e.start - e.onset);
    return full * ramp(p);
  }
  if (t < e.end) return full;
  const double u = static_cast<double>(t - e.end + 1) / release;
  return full * (1 - smoothstep5(u));
}

}  // namespace detail

inline SceneTrack build_scene(Rng& rng, int num_frames,
                              const std::vector<Event>& events) {
  using detail::smoothstep5;
  if (num_frames < 1) throw ConfigError("build_scene: empty video");
  SceneTrack track;
  track.events = events;
  track.states.resize(num_frames);
  track.flags.assign(num_frames, 0);
  track.euler.resize(num_frames);
  for (auto& p : track.precursor) p.assign(num_frames, 0.0);

  // Per-video baseline parameters.
  const double r_base = uniform(rng, 0.40, 0.46);
  track.start_angle = uniform(rng, 0.0, 2 * M_PI);
  const double angle0 = uniform(rng, 0.15, 0.5);
  const double omega =
      (2 * M_PI - angle0) / (num_frames / static_cast<double>(kFps)) *
      uniform(rng, 0.85, 1.02);
  const double thresh = kRedReflexAngle;  // pi/12

  // Baseline tilt wander: two slow sinusoids per axis, capped well below
  // the red-reflex threshold, plus light OU noise faded out near events.
  struct Wander {
    double a1, f1, p1, a2, f2, p2;
    double at(double t) const {
      return a1 * std::sin(2 * M_PI * f1 * t + p1) +
             a2 * std::sin(2 * M_PI * f2 * t + p2);
    }
  };
  auto draw_wander = [&rng]() {
    return Wander{uniform(rng, 0.030, 0.055), uniform(rng, 0.04, 0.10),
                  uniform(rng, 0.0, 2 * M_PI), uniform(rng, 0.015, 0.030),
                  uniform(rng, 0.10, 0.22), uniform(rng, 0.0, 2 * M_PI)};
  };
  const Wander wx = draw_wander(), wy = draw_wander();
  const double za = uniform(rng, 0.10, 0.30);
  const double zf = uniform(rng, 0.02, 0.06);
  const double zp = uniform(rng, 0.0, 2 * M_PI);

  const double osc_freq = uniform(rng, 1.0, 1.8);       // Hz
  const double osc_phase = uniform(rng, 0.0, 2 * M_PI);
  const double osc_quiet = 0.004;

  std::vector<const Event*> by_class[kNumErrorClasses];
  for (const Event& e : events) by_class[e.cls].push_back(&e);

  // OU noise states (tilt x/y, radius, tool x/y).
  double nx = 0, ny = 0, nr = 0, ntx = 0, nty = 0;
  const double dt = 1.0 / kFps;
  auto ou = [&](double& state, double tau_s, double sd) {
    const double g = dt / tau_s;
    state += -state * g + gaussian(rng, 0.0, sd * std::sqrt(2 * g));
    return state;
  };

  double flap_angle = angle0;
  const int hist_bins = 1024;
  track.hist_radius.assign(hist_bins, r_base);
  int hist_filled = static_cast<int>(angle0 / (2 * M_PI) * hist_bins);

  for (int t = 0; t < num_frames; ++t) {
    const double ts = t * dt;
    SceneState& s = track.states[t];
    s.time_index = t;

    // ---- tilt ----------------------------------------------------------
    double bx = wx.at(ts) + ou(nx, 0.5, 0.005);
    double by = wy.at(ts) + ou(ny, 0.5, 0.005);
    double w = 1, ratio = -1, dir = 0;
    for (const Event* e : by_class[kOutOfRedReflex]) {
      const double r = detail::red_reflex_mag_ratio(*e, t);
      if (r >= 0) {
        ratio = r;
        w = detail::baseline_weight(*e, t);
        dir = e->direction + 0.3 * std::sin(2 * M_PI * 0.2 * (t - e->onset) * dt);
        track.precursor[kOutOfRedReflex][t] = r;
        break;
      }
    }
    if (ratio < 0) {
      s.tilt_x = bx;
      s.tilt_y = by;
    } else {
      const double mag = ratio * thresh;
      s.tilt_x = w * bx + (1 - w) * mag * std::cos(dir);
      s.tilt_y = w * by + (1 - w) * mag * std::sin(dir);
    }
    s.tilt_z = za * std::sin(2 * M_PI * zf * ts + zp);

    // ---- flap radius ---------------------------------------------------
    double drift = 0, tear_spike = 0, speed_excess = 0;
    for (const Event* e : by_class[kRadialExtension]) {
      const double d = detail::radial_drift(*e, t, 0.20 * e->magnitude);
      if (d > 0) {
        drift = d;
        track.precursor[kRadialExtension][t] = d;
        break;
      }
    }
    for (const Event* e : by_class[kTear]) {
      const double x = detail::tear_speed_excess(*e, t);
      if (x > 0) {
        speed_excess = x;
        track.precursor[kTear][t] = x;
        if (t >= e->start && t < e->end)
          tear_spike = 0.22 * e->magnitude * (1 + 0.25 * uniform(rng, -1.0, 1.0));
        break;
      }
    }
    double osc_amp = osc_quiet;
    for (const Event* e : by_class[kSmoothness]) {
      const double a = detail::oscillation_envelope(*e, t, 0.065 * e->magnitude);
      if (a > 0) {
        osc_amp = osc_quiet + a;
        track.precursor[kSmoothness][t] = a;
        break;
      }
    }
    s.irregularity_phase = 2 * M_PI * osc_freq * ts + osc_phase;
    const double osc = osc_amp * std::sin(s.irregularity_phase);
    s.flap_radius = r_base + drift + tear_spike + osc + ou(nr, 0.4, 0.004);

    // ---- flap growth (non-decreasing, capped at full circle) -----------
    s.flap_angle = flap_angle;
    flap_angle = std::min(2 * M_PI, flap_angle + omega * (1 + speed_excess) * dt);
    const int upto = std::min(
        hist_bins, static_cast<int>(s.flap_angle / (2 * M_PI) * hist_bins));
    for (; hist_filled < upto; ++hist_filled)
      track.hist_radius[hist_filled] = s.flap_radius;

    // ---- tool tip ------------------------------------------------------
    // The tool rides the flap leading edge, so radial drift moves it outward
    // and irregular cutting shakes it radially at the oscillation frequency.
    const double abs_angle = track.start_angle + s.flap_angle;
    const double shake =
        3.0 * (osc_amp - osc_quiet) * std::sin(2 * M_PI * 2 * osc_freq * ts);
    const double tool_r = s.flap_radius * 1.05 + 0.03 + shake;
    s.tool_x = 0.5 + 0.33 * (tool_r * std::cos(abs_angle) + ou(ntx, 0.3, 0.02));
    s.tool_y = 0.5 + 0.33 * (tool_r * std::sin(abs_angle) + ou(nty, 0.3, 0.02));

    // ---- flags ---------------------------------------------------------
    track.euler[t] = {s.tilt_x, s.tilt_y, s.tilt_z};
    ErrorMask m = 0;
    for (int cls : {kSmoothness, kRadialExtension, kTear})
      for (const Event* e : by_class[cls])
        if (t >= e->start && t < e->end) mask_set(m, cls);
    if (s.tilt_x * s.tilt_x + s.tilt_y * s.tilt_y > red_reflex_threshold_sq())
      mask_set(m, kOutOfRedReflex);
    track.flags[t] = m;
  }
  return track;
}

}  // namespace rhexis::videogen
