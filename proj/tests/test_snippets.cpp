#include <gtest/gtest.h>

#include <vector>

#include "rhexis/data/snippets.hpp"
#include "rhexis/rng.hpp"

using namespace rhexis;
using namespace rhexis::data;

namespace {

// Random per-frame error track with short runs per class.
std::vector<ErrorMask> random_track(Rng& rng, int n, double rate = 0.02) {
  std::vector<ErrorMask> track(n, 0);
  for (int c = 0; c < kNumErrorClasses; ++c) {
    int f = 0;
    while (f < n) {
      if (uniform(rng, 0, 1) < rate) {
        int len = uniform_int(rng, 5, 40);
        for (int k = f; k < std::min(n, f + len); ++k)
          mask_set(track[k], static_cast<ClassId>(c));
        f += len;
      } else {
        ++f;
      }
    }
  }
  return track;
}

// Brute-force posterior label: scan every raw frame whose instant lies in
// (t+dT, t+dT+1] with t = anchor/30.
std::array<float, kNumClasses> prediction_bruteforce(
    const std::vector<ErrorMask>& track, int anchor, const SnippetSpec& spec) {
  ErrorMask m = 0;
  const double t = anchor / 30.0;
  for (int f = 0; f < static_cast<int>(track.size()); ++f) {
    const double instant = f / 30.0;
    if (instant > t + spec.horizon && instant <= t + spec.horizon + 1)
      m |= track[f];
  }
  return expand_mask(m);
}

}  // namespace

TEST(SnippetSpec, DurationTable) {
  // (L, S) -> D in seconds for every configuration in the sweep table.
  const struct { int l, s; double d; } rows[] = {
      {1, 1, 1.0 / 30}, {5, 2, 1.0 / 3}, {10, 1, 1.0 / 3},
      {5, 6, 1.0},      {10, 3, 1.0},    {30, 1, 1.0},
      {10, 6, 2.0},     {30, 2, 2.0},    {60, 1, 2.0},
  };
  for (const auto& r : rows) {
    SnippetSpec spec{r.l, r.s, 1};
    EXPECT_DOUBLE_EQ(spec.duration_s(), r.d) << r.l << "," << r.s;
  }
}

TEST(SnippetSpec, Validation) {
  EXPECT_NO_THROW((SnippetSpec{10, 3, 5}.validate()));
  EXPECT_THROW((SnippetSpec{0, 3, 1}.validate()), ConfigError);
  EXPECT_THROW((SnippetSpec{10, 0, 1}.validate()), ConfigError);
  EXPECT_THROW((SnippetSpec{10, 3, 0}.validate()), ConfigError);
  EXPECT_THROW((SnippetSpec{10, 3, 6}.validate()), ConfigError);
}

TEST(Snippets, SampledFrameGeometry) {
  SnippetSpec spec{10, 3, 1};
  const int anchor = 100;
  EXPECT_EQ(sampled_frame(anchor, spec, 9), 100);
  EXPECT_EQ(sampled_frame(anchor, spec, 0), 100 - 27);
  EXPECT_EQ(spec.span_frames(), 30);  // 10 frames covering 1 s of raw video
  EXPECT_EQ(observed_first(anchor, spec), 71);
  EXPECT_EQ(posterior_first(anchor, spec), 131);
  EXPECT_EQ(posterior_last(anchor, spec), 160);
}

TEST(Snippets, AnchorValidity) {
  SnippetSpec spec{10, 3, 1};
  // Needs anchor >= 30 and anchor + 60 <= n-1.
  EXPECT_FALSE(anchor_valid(300, 29, spec));
  EXPECT_TRUE(anchor_valid(300, 30, spec));
  EXPECT_TRUE(anchor_valid(300, 239, spec));
  EXPECT_FALSE(anchor_valid(300, 240, spec));
}

TEST(Snippets, ErrorFreeVideoPredictionLabel) {
  std::vector<ErrorMask> track(300, 0);
  SnippetSpec spec{10, 3, 1};
  ClassVector p = prediction_label(track, 60, spec);
  EXPECT_EQ(p, (ClassVector{0, 0, 0, 0, 1, 0}));
}

TEST(Snippets, PosteriorWindowIsHalfOpen) {
  SnippetSpec spec{5, 6, 2};
  const int anchor = 60;
  // Window (t+2, t+3] = raw frames 121..150 inclusive.
  for (int f : {120, 151}) {
    std::vector<ErrorMask> track(240, 0);
    mask_set(track[f], kTear);
    EXPECT_EQ(prediction_label(track, anchor, spec)[kTear], 0.0f) << f;
  }
  for (int f : {121, 150}) {
    std::vector<ErrorMask> track(240, 0);
    mask_set(track[f], kTear);
    EXPECT_EQ(prediction_label(track, anchor, spec)[kTear], 1.0f) << f;
  }
}

TEST(Snippets, PredictionMatchesFrameScanOracle) {
  Rng rng = make_rng(301);
  for (int rep = 0; rep < 200; ++rep) {
    SnippetSpec spec{uniform_int(rng, 1, 30), uniform_int(rng, 1, 6),
                     uniform_int(rng, 1, 5)};
    const int n = uniform_int(rng, spec.span_frames() + 30 * 6 + 2, 900);
    std::vector<ErrorMask> track = random_track(rng, n, 0.05);
    const int lo = spec.span_frames();
    const int hi = n - 1 - 30 * (spec.horizon + 1);
    ASSERT_LE(lo, hi);
    const int anchor = uniform_int(rng, lo, hi);
    EXPECT_EQ(prediction_label(track, anchor, spec),
              prediction_bruteforce(track, anchor, spec));
  }
}

TEST(Snippets, CurrentLabelsReadSampledFramesOnly) {
  std::vector<ErrorMask> track(300, 0);
  SnippetSpec spec{10, 3, 1};
  const int anchor = 90;
  mask_set(track[90], kSmoothness);       // sampled (i = 9)
  mask_set(track[89], kRadialExtension);  // skipped frame
  SnippetLabels labels = snippet_labels(track, anchor, spec);
  ASSERT_EQ(labels.current.size(), 10u);
  EXPECT_EQ(labels.current[9][kSmoothness], 1.0f);
  EXPECT_EQ(labels.current[9][kRadialExtension], 0.0f);
  EXPECT_EQ(labels.current[8], (ClassVector{0, 0, 0, 0, 1, 0}));
}

TEST(Snippets, ComplementarityOnEveryEmittedSnippet) {
  Rng rng = make_rng(302);
  std::vector<ErrorMask> track = random_track(rng, 600, 0.05);
  TrackView tv{0, &track};
  SnippetSpec spec{10, 3, 2};
  for (const SampleRef& s :
       build_dataset({tv}, spec, DatasetOptions{1.0 / 30, 3, true})) {
    EXPECT_EQ(s.prediction[kNoError], 1.0f - s.prediction[kAnyError]);
    float any = std::max({s.prediction[0], s.prediction[1], s.prediction[2],
                          s.prediction[3]});
    EXPECT_EQ(s.prediction[kAnyError], any);
  }
}

TEST(Dataset, KeepAllVersusBalanced) {
  Rng rng = make_rng(303);
  std::vector<ErrorMask> track = random_track(rng, 1800, 0.0005);
  TrackView tv{0, &track};
  SnippetSpec spec{10, 3, 1};
  auto all = build_dataset({tv}, spec, DatasetOptions{1.0 / 15, 3, false});
  auto balanced = build_dataset({tv}, spec, DatasetOptions{1.0 / 15, 3, true});
  size_t free_all = 0, free_bal = 0;
  for (const auto& s : all) free_all += s.error_free;
  for (const auto& s : balanced) free_bal += s.error_free;
  ASSERT_GT(free_all, 10u);
  EXPECT_EQ(all.size() - free_all, balanced.size() - free_bal);
  EXPECT_LE(free_bal, free_all / 3 + 1);
  EXPECT_GE(free_bal, free_all / 3 - 1);
}

TEST(Dataset, EqualDurationSpecsGiveIdenticalCountsAndLabels) {
  Rng rng = make_rng(304);
  std::vector<std::vector<ErrorMask>> tracks;
  std::vector<TrackView> views;
  for (int v = 0; v < 5; ++v)
    tracks.push_back(random_track(rng, uniform_int(rng, 300, 900), 0.03));
  for (int v = 0; v < 5; ++v) views.push_back({v, &tracks[v]});

  DatasetOptions opt{1.0 / 15, 3, true};
  auto a = build_dataset(views, SnippetSpec{10, 3, 1}, opt);
  auto b = build_dataset(views, SnippetSpec{5, 6, 1}, opt);
  auto c = build_dataset(views, SnippetSpec{30, 1, 1}, opt);
  ASSERT_EQ(a.size(), b.size());
  ASSERT_EQ(a.size(), c.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].video, b[i].video);
    EXPECT_EQ(a[i].anchor, b[i].anchor);
    EXPECT_EQ(a[i].prediction, b[i].prediction);
    EXPECT_EQ(a[i].prediction, c[i].prediction);
  }
}

TEST(Dataset, RejectsBadInput) {
  std::vector<ErrorMask> track(300, 0);
  TrackView tv{0, &track};
  SnippetSpec spec{10, 3, 1};
  EXPECT_THROW(build_dataset({}, spec, {}), DataError);
  EXPECT_THROW(build_dataset({TrackView{0, nullptr}}, spec, {}), DataError);
  EXPECT_THROW(build_dataset({tv}, spec, DatasetOptions{0.0, 3, true}),
               ConfigError);
}

TEST(Cooccurrence, HandComputedExamples) {
  // Two classes over 4 one-second bins: A on {0,1}, B on {0,2}.
  std::vector<ErrorMask> bins(4, 0);
  mask_set(bins[0], kSmoothness);
  mask_set(bins[1], kSmoothness);
  mask_set(bins[0], kTear);
  mask_set(bins[2], kTear);
  CooccurrenceMatrix m = cooccurrence({bins});
  EXPECT_TRUE(m.defined[kSmoothness]);
  EXPECT_TRUE(m.defined[kTear]);
  EXPECT_FALSE(m.defined[kOutOfRedReflex]);
  EXPECT_DOUBLE_EQ(m.m[kSmoothness][kSmoothness], 100.0);
  EXPECT_DOUBLE_EQ(m.m[kSmoothness][kTear], 50.0);
  EXPECT_DOUBLE_EQ(m.m[kTear][kSmoothness], 50.0);
  EXPECT_DOUBLE_EQ(m.m[kSmoothness][kOutOfRedReflex], 0.0);
}

TEST(Cooccurrence, DisjointClassesAreZero) {
  std::vector<ErrorMask> bins(2, 0);
  mask_set(bins[0], kSmoothness);
  mask_set(bins[1], kRadialExtension);
  CooccurrenceMatrix m = cooccurrence({bins});
  EXPECT_DOUBLE_EQ(m.m[kSmoothness][kRadialExtension], 0.0);
  EXPECT_DOUBLE_EQ(m.m[kRadialExtension][kSmoothness], 0.0);
}

TEST(Cooccurrence, SecondBinsDropPartialTail) {
  std::vector<ErrorMask> track(75, 0);  // 2.5 s
  mask_set(track[70], kTear);           // inside the dropped tail
  std::vector<ErrorMask> bins = to_second_bins(track);
  ASSERT_EQ(bins.size(), 2u);
  EXPECT_EQ(bins[0], 0);
  EXPECT_EQ(bins[1], 0);
}
