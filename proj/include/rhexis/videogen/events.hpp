#pragma once

// ============================================================================
// Error event scheduling. Each event owns a flagged window [start, end) plus
// a precursor onset strictly earlier than the window, which is where the
// observable warning signature (drift, oscillation, tilt approach, speed-up)
// begins. Leads are drawn in [1.1, 3.0] s so anticipation one second ahead is
// always possible while five seconds ahead is not.
// ============================================================================

#include <algorithm>
#include <cmath>
#include <vector>

#include "rhexis/common.hpp"
#include "rhexis/rng.hpp"

namespace rhexis::videogen {

// Event intensities in expected events per minute, one per error class.
struct ErrorRates {
  double smoothness = 0;
  double out_of_red_reflex = 0;
  double radial_extension = 0;
  double tear = 0;

  double of(int cls) const {
    switch (cls) {
      case kSmoothness: return smoothness;
      case kOutOfRedReflex: return out_of_red_reflex;
      case kRadialExtension: return radial_extension;
      case kTear: return tear;
    }
    throw ConfigError("ErrorRates: bad class index");
  }
  void validate() const {
    for (int c = 0; c < kNumErrorClasses; ++c)
      if (of(c) < 0) throw ConfigError("error rates must be non-negative");
  }
};

struct Event {
  int cls = 0;       // ClassId of the error
  int onset = 0;     // precursor onset, raw frame index
  int start = 0;     // first flagged frame
  int end = 0;       // one past the last flagged frame
  double direction = 0;   // per-event angle (tilt direction, etc.)
  double magnitude = 1;   // per-event strength scale in [0.8, 1.2]

  double lead_s() const { return static_cast<double>(start - onset) / kFps; }
  double duration_s() const { return static_cast<double>(end - start) / kFps; }
};

namespace detail {

constexpr double kLeadMinS = 1.4;
constexpr double kLeadMaxS = 3.0;
// Same-class quiet gap between an event's end and the next start. Must
// exceed the maximum lead plus the post-event release window so that the
// profile regions [onset, end + release] of same-class events never overlap.
constexpr double kEventGapS = 4.0;
constexpr double kEndMarginS = 1.5;  // keep events away from the video end

// Lognormal-ish duration around a median, clipped to [lo, hi].
inline double draw_duration(Rng& rng, double median_s, double lo, double hi) {
  const double d = median_s * std::exp(gaussian(rng, 0.0, 0.35));
  return std::clamp(d, lo, hi);
}

inline double class_median_duration(int cls) {
  switch (cls) {
    case kSmoothness: return 1.5;
    case kOutOfRedReflex: return 0.7;
    case kRadialExtension: return 1.7;
    case kTear: return 0.5;
  }
  return 1.0;
}

}  // namespace detail

// Schedule events of one class along [0, duration_s] with exponential gaps,
// so the expected count is proportional to the rate for rates that are small
// against the saturation limit. Zero rate produces zero events exactly.
inline std::vector<Event> schedule_class_events(Rng& rng, int cls,
                                                double rate_per_min,
                                                double duration_s) {
  using namespace detail;
  std::vector<Event> events;
  if (rate_per_min <= 0) return events;
  const double lambda = rate_per_min / 60.0;  // events per second
  double t = kLeadMaxS + 0.5;                 // room for the first precursor
  std::exponential_distribution<double> gap(lambda);
  while (true) {
    t += gap(rng);
    const double dur = draw_duration(rng, class_median_duration(cls), 0.4,
                                     cls == kRadialExtension ? 3.5 : 2.0);
    if (t + dur > duration_s - kEndMarginS) break;
    Event e;
    e.cls = cls;
    e.start = static_cast<int>(std::lround(t * kFps));
    e.end = e.start + std::max(1, static_cast<int>(std::lround(dur * kFps)));
    const double lead = uniform(rng, kLeadMinS, kLeadMaxS);
    e.onset = e.start - static_cast<int>(std::lround(lead * kFps));
    e.direction = uniform(rng, 0.0, 2.0 * M_PI);
    e.magnitude = uniform(rng, 0.8, 1.2);
    events.push_back(e);
    t += dur + kEventGapS;
  }
  return events;
}

// Tears are nested inside long radial-extension events: the radial window
// always starts first, and the tear begins at least one second into it so the
// shared drift precursor satisfies the minimum lead.
inline std::vector<Event> schedule_tears(Rng& rng,
                                         const std::vector<Event>& radial,
                                         double tear_rate, double radial_rate) {
  std::vector<Event> tears;
  if (tear_rate <= 0 || radial_rate <= 0) return tears;
  const double p = std::min(1.0, tear_rate / radial_rate);
  for (const Event& re : radial) {
    if (re.duration_s() < 1.6) continue;
    if (uniform(rng, 0.0, 1.0) >= p) continue;
    Event t;
    t.cls = kTear;
    const int earliest = re.start + kFps;  // >= 1 s after radial onset
    const int latest = re.end - static_cast<int>(0.4 * kFps);
    t.start = uniform_int(rng, earliest, std::max(earliest, latest - 1));
    t.end = std::min(re.end,
                     t.start + uniform_int(rng, kFps * 3 / 10, kFps * 8 / 10));
    // Shared precursor: the radial drift accelerating from the radial start.
    t.onset = re.start;
    const double lead_cap =
        detail::kLeadMaxS * kFps;
    if (t.start - t.onset > lead_cap)
      t.onset = t.start - static_cast<int>(lead_cap);
    t.direction = re.direction;
    t.magnitude = uniform(rng, 0.9, 1.2);
    tears.push_back(t);
  }
  return tears;
}

// Full per-video schedule, sorted by start frame.
inline std::vector<Event> schedule_events(Rng& rng, double duration_s,
                                          const ErrorRates& rates) {
  rates.validate();
  std::vector<Event> all;
  for (int cls : {kSmoothness, kOutOfRedReflex, kRadialExtension}) {
    std::vector<Event> ev = schedule_class_events(
        rng, cls, rates.of(cls), duration_s);
    all.insert(all.end(), ev.begin(), ev.end());
  }
  std::vector<Event> radial;
  for (const Event& e : all)
    if (e.cls == kRadialExtension) radial.push_back(e);
  std::vector<Event> tears =
      schedule_tears(rng, radial, rates.tear, rates.radial_extension);
  all.insert(all.end(), tears.begin(), tears.end());
  std::stable_sort(all.begin(), all.end(), [](const Event& a, const Event& b) {
    return a.start < b.start;
  });
  return all;
}

}  // namespace rhexis::videogen
