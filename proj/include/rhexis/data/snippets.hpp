#pragma once

// ============================================================================
// Snippet decomposition: turn a labeled 30 Hz video into supervised samples.
//
// A snippet anchored at raw frame t observes L strided frames ending at t
// (sampled indices t - (L-1-i)*S for i = 0..L-1, covering the D = L*S/30
// second window (t-D, t]) and predicts error content in the 1-second
// posterior window (t+dT, t+dT+1], i.e. raw frames t+30*dT+1 .. t+30*(dT+1).
//
// Class vector layout (width 6) is fixed by ClassId: the four error classes,
// then no_error, then any_error.
// ============================================================================

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rhexis/common.hpp"
#include "rhexis/data/video.hpp"

namespace rhexis::data {

// ----------------------------------------------------------------------------
// Sampling geometry
// ----------------------------------------------------------------------------
struct SnippetSpec {
  int frames = 10;   // L: frames observed by the model
  int stride = 3;    // S: one frame kept out of every S raw frames
  int horizon = 1;   // dT: prediction horizon in whole seconds

  // Observed-window duration in seconds: D = L*S/30.
  double duration_s() const {
    return static_cast<double>(frames) * stride / kFps;
  }
  // Observed-window span in raw frames: 30*D.
  int span_frames() const { return frames * stride; }

  void validate() const {
    if (frames < 1) throw ConfigError("snippet frames must be >= 1");
    if (stride < 1) throw ConfigError("snippet stride must be >= 1");
    if (horizon < 1 || horizon > 5)
      throw ConfigError("snippet horizon must be in [1,5] seconds");
  }
};

// Raw index of the i-th sampled frame (i in 0..L-1), newest at i = L-1.
inline int sampled_frame(int anchor, const SnippetSpec& spec, int i) {
  return anchor - (spec.frames - 1 - i) * spec.stride;
}

// Raw posterior window, inclusive on both ends.
inline int posterior_first(int anchor, const SnippetSpec& spec) {
  return anchor + kFps * spec.horizon + 1;
}
inline int posterior_last(int anchor, const SnippetSpec& spec) {
  return anchor + kFps * (spec.horizon + 1);
}

// Raw observed window (t-D, t], inclusive on both ends in frame indices.
inline int observed_first(int anchor, const SnippetSpec& spec) {
  return anchor - spec.span_frames() + 1;
}

// An anchor is valid when the observed window starts at t-D >= 0 and the
// posterior window fits inside the video.
inline bool anchor_valid(int num_frames, int anchor, const SnippetSpec& spec) {
  return anchor >= spec.span_frames() &&
         posterior_last(anchor, spec) <= num_frames - 1;
}

// ----------------------------------------------------------------------------
// Labels
// ----------------------------------------------------------------------------
using ClassVector = std::array<float, kNumClasses>;

inline ErrorMask window_or(const std::vector<ErrorMask>& track, int first,
                           int last) {
  if (first < 0 || last >= static_cast<int>(track.size()) || first > last)
    throw DataError("window_or: range out of bounds");
  ErrorMask m = 0;
  for (int f = first; f <= last; ++f) m |= track[f];
  return m;
}

// Prediction label: per-class OR over the raw posterior window, expanded
// with the no_error / any_error classes.
inline ClassVector prediction_label(const std::vector<ErrorMask>& track,
                                    int anchor, const SnippetSpec& spec) {
  return expand_mask(window_or(track, posterior_first(anchor, spec),
                               posterior_last(anchor, spec)));
}

struct SnippetLabels {
  std::vector<ClassVector> current;  // L x 6, one row per sampled frame
  ClassVector prediction;            // 6
};

inline SnippetLabels snippet_labels(const std::vector<ErrorMask>& track,
                                    int anchor, const SnippetSpec& spec) {
  SnippetLabels out;
  out.current.resize(spec.frames);
  for (int i = 0; i < spec.frames; ++i) {
    const int f = sampled_frame(anchor, spec, i);
    if (f < 0 || f >= static_cast<int>(track.size()))
      throw DataError("snippet_labels: sampled frame out of range");
    out.current[i] = expand_mask(track[f]);
  }
  out.prediction = prediction_label(track, anchor, spec);
  return out;
}

// A snippet is error-free when neither the raw observed window nor the
// posterior window contains any of the four error classes. Both windows
// depend only on (anchor, D, dT), so equal-duration specs agree on this.
inline bool snippet_error_free(const std::vector<ErrorMask>& track, int anchor,
                               const SnippetSpec& spec) {
  return !mask_any(window_or(track, observed_first(anchor, spec), anchor)) &&
         !mask_any(window_or(track, posterior_first(anchor, spec),
                             posterior_last(anchor, spec)));
}

// ----------------------------------------------------------------------------
// Dataset building
// ----------------------------------------------------------------------------
struct SampleRef {
  int video = 0;         // caller-supplied video handle
  int anchor = 0;        // raw frame index t
  int anchor_index = 0;  // position in the video's valid-anchor enumeration
  ClassVector prediction{};
  bool error_free = false;
};

struct TrackView {
  int video = 0;                               // handle copied into SampleRef
  const std::vector<ErrorMask>* errors = nullptr;
};

struct DatasetOptions {
  double shift_s = 1.0 / 15;  // anchor advance (1/15 s source, 1/30 s target)
  int keep_every = 3;         // keep one of this many error-free snippets
  bool balance = true;        // false = keep all error-free snippets
};

// Enumerate anchors at multiples of the shift and keep the valid ones.
// With balancing on, an error-free snippet survives only when its position
// in the valid-anchor enumeration is a multiple of keep_every.
inline std::vector<SampleRef> build_dataset(const std::vector<TrackView>& tracks,
                                            const SnippetSpec& spec,
                                            const DatasetOptions& opt) {
  spec.validate();
  if (tracks.empty()) throw DataError("build_dataset: empty split");
  const int shift = static_cast<int>(std::lround(opt.shift_s * kFps));
  if (shift < 1) throw ConfigError("build_dataset: shift below one frame");
  if (opt.keep_every < 1) throw ConfigError("build_dataset: keep_every < 1");

  std::vector<SampleRef> out;
  for (const TrackView& tv : tracks) {
    if (!tv.errors) throw DataError("build_dataset: unlabeled video");
    const auto& track = *tv.errors;
    const int n = static_cast<int>(track.size());
    int index = 0;
    for (int anchor = 0; anchor <= n - 1; anchor += shift) {
      if (!anchor_valid(n, anchor, spec)) continue;
      SampleRef ref;
      ref.video = tv.video;
      ref.anchor = anchor;
      ref.anchor_index = index++;
      ref.error_free = snippet_error_free(track, anchor, spec);
      if (opt.balance && ref.error_free &&
          ref.anchor_index % opt.keep_every != 0)
        continue;
      ref.prediction = prediction_label(track, anchor, spec);
      out.push_back(ref);
    }
  }
  return out;
}

// Per-class fraction of samples whose prediction label contains the class.
inline std::array<double, kNumClasses> class_proportions(
    const std::vector<SampleRef>& samples) {
  std::array<double, kNumClasses> p{};
  if (samples.empty()) return p;
  for (const SampleRef& s : samples)
    for (int c = 0; c < kNumClasses; ++c) p[c] += s.prediction[c];
  for (double& v : p) v /= static_cast<double>(samples.size());
  return p;
}

// ----------------------------------------------------------------------------
// Error co-occurrence at 1-second resolution
// ----------------------------------------------------------------------------
struct CooccurrenceMatrix {
  std::array<std::array<double, kNumErrorClasses>, kNumErrorClasses> m{};
  std::array<bool, kNumErrorClasses> defined{};  // row A defined iff |S_A| > 0
};

// Collapse a 30 Hz track into whole-second bins (OR within each bin); the
// trailing partial second is dropped.
inline std::vector<ErrorMask> to_second_bins(
    const std::vector<ErrorMask>& track) {
  std::vector<ErrorMask> bins(track.size() / kFps, 0);
  for (size_t b = 0; b < bins.size(); ++b)
    for (int f = 0; f < kFps; ++f) bins[b] |= track[b * kFps + f];
  return bins;
}

// M(A,B) = 100 * |S_A intersect S_B| / |S_A| over the pooled second bins of
// all tracks, where S_A is the set of seconds in which class A occurs.
inline CooccurrenceMatrix cooccurrence(
    const std::vector<std::vector<ErrorMask>>& bin_tracks) {
  std::array<std::array<long, kNumErrorClasses>, kNumErrorClasses> inter{};
  std::array<long, kNumErrorClasses> count{};
  for (const auto& bins : bin_tracks)
    for (ErrorMask m : bins)
      for (int a = 0; a < kNumErrorClasses; ++a) {
        if (!mask_has(m, static_cast<ClassId>(a))) continue;
        ++count[a];
        for (int b = 0; b < kNumErrorClasses; ++b)
          if (mask_has(m, static_cast<ClassId>(b))) ++inter[a][b];
      }
  CooccurrenceMatrix out;
  for (int a = 0; a < kNumErrorClasses; ++a) {
    out.defined[a] = count[a] > 0;
    for (int b = 0; b < kNumErrorClasses; ++b)
      out.m[a][b] = out.defined[a]
                        ? 100.0 * inter[a][b] / static_cast<double>(count[a])
                        : 0.0;
  }
  return out;
}

}  // namespace rhexis::data
