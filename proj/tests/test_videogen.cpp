#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "rhexis/eval/auc.hpp"
#include "rhexis/videogen/generate.hpp"

using namespace rhexis;
using namespace rhexis::videogen;
namespace fs = std::filesystem;

namespace {

GenVideoOptions dyn_opts(std::uint64_t seed, double duration,
                         const ErrorRates& rates) {
  GenVideoOptions opt;
  opt.seed = seed;
  opt.duration_s = duration;
  opt.rates = rates;
  opt.render = false;
  return opt;
}

ErrorRates busy_rates() { return {5.0, 4.0, 4.0, 2.0}; }

// One-sided Mann-Whitney p-value (normal approximation with tie-corrected
// variance omitted; fine for continuous features) for "a tends larger".
double rank_test_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> joined = a;
  joined.insert(joined.end(), b.begin(), b.end());
  std::vector<double> r = midranks(joined);
  double ra = 0;
  for (size_t i = 0; i < a.size(); ++i) ra += r[i];
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  const double u = ra - n * (n + 1) / 2;
  const double z = (u - n * m / 2) / std::sqrt(n * m * (n + m + 1) / 12.0);
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

// Observable per-class precursor features computed from the scene track.
double scene_feature(const SceneTrack& track, int cls, int t) {
  switch (cls) {
    case kOutOfRedReflex: {
      const auto& e = track.euler[t];
      return std::sqrt(e.x * e.x + e.y * e.y);
    }
    case kRadialExtension:
      return track.states[t].flap_radius;
    case kSmoothness: {
      // High-frequency radius amplitude: residual after a local linear fit.
      const int w = 5;
      const int lo = std::max(0, t - w);
      const int hi = std::min<int>(track.states.size() - 1, t + w);
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (int f = lo; f <= hi; ++f) {
        sx += f;
        sy += track.states[f].flap_radius;
        sxx += static_cast<double>(f) * f;
        sxy += f * track.states[f].flap_radius;
      }
      const double k = hi - lo + 1;
      const double slope = (k * sxy - sx * sy) / std::max(1e-12, k * sxx - sx * sx);
      const double icpt = (sy - slope * sx) / k;
      double acc = 0;
      for (int f = lo; f <= hi; ++f) {
        const double res = track.states[f].flap_radius - (slope * f + icpt);
        acc += res * res;
      }
      return std::sqrt(acc / k);
    }
    case kTear: {
      const int t1 = std::min<int>(track.states.size() - 1, t + 1);
      const int t0 = std::max(0, t - 1);
      return (track.states[t1].flap_angle - track.states[t0].flap_angle) /
             std::max(1, t1 - t0);
    }
  }
  return 0;
}

bool near_any_event(const SceneTrack& track, int t, int margin) {
  for (const Event& e : track.events)
    if (t >= e.onset - margin && t < e.end + margin) return true;
  return false;
}

}  // namespace

TEST(GenerateVideo, ZeroRatesGiveCleanTrack) {
  GeneratedVideo v = generate_video(dyn_opts(7, 60, ErrorRates{}));
  EXPECT_EQ(v.meta.num_frames, 1800);
  EXPECT_EQ(v.labels.errors.size(), 1800u);
  for (ErrorMask m : v.labels.errors) EXPECT_EQ(m, 0);
  EXPECT_TRUE(v.scene.events.empty());
}

TEST(GenerateVideo, DeterministicAcrossRuns) {
  GenVideoOptions opt;
  opt.seed = 7;
  opt.duration_s = 12;
  opt.rates = busy_rates();
  opt.resolution = 32;
  GeneratedVideo a = generate_video(opt);
  GeneratedVideo b = generate_video(opt);
  ASSERT_EQ(a.frames.size(), b.frames.size());
  for (size_t t = 0; t < a.frames.size(); ++t)
    ASSERT_EQ(a.frames[t].data, b.frames[t].data) << "frame " << t;
  EXPECT_EQ(a.labels.errors, b.labels.errors);
  for (size_t t = 0; t < a.labels.euler.size(); ++t) {
    EXPECT_EQ(a.labels.euler[t].x, b.labels.euler[t].x);
    EXPECT_EQ(a.labels.euler[t].y, b.labels.euler[t].y);
  }
}

TEST(GenerateVideo, LazyFrameMatchesEagerFrame) {
  GenVideoOptions opt;
  opt.seed = 19;
  opt.duration_s = 10;
  opt.rates = busy_rates();
  opt.resolution = 32;
  GeneratedVideo v = generate_video(opt);
  for (int t : {0, 77, 299})
    EXPECT_EQ(render_video_frame(v, t).data, v.frames[t].data);
}

TEST(GenerateVideo, RejectsBadOptions) {
  GenVideoOptions opt;
  opt.duration_s = 5;
  EXPECT_THROW(generate_video(opt), ConfigError);
  opt.duration_s = 300;
  EXPECT_THROW(generate_video(opt), ConfigError);
  opt.duration_s = 30;
  opt.rates.tear = -1;
  EXPECT_THROW(generate_video(opt), ConfigError);
}

TEST(GenerateVideo, RedReflexFlagsMatchEulerRuleAndSchedule) {
  ErrorRates rates;
  rates.out_of_red_reflex = 5.0;
  GeneratedVideo v = generate_video(dyn_opts(11, 120, rates));
  ASSERT_FALSE(v.scene.events.empty());
  std::vector<bool> rule = data::annotate_red_reflex(v.labels.euler);
  for (int t = 0; t < v.meta.num_frames; ++t) {
    EXPECT_EQ(mask_has(v.labels.errors[t], kOutOfRedReflex), rule[t]) << t;
    bool scheduled = false;
    for (const Event& e : v.scene.events)
      if (e.cls == kOutOfRedReflex && t >= e.start && t < e.end)
        scheduled = true;
    EXPECT_EQ(rule[t], scheduled) << "frame " << t;
  }
}

TEST(GenerateVideo, SceneInvariantsHold) {
  GeneratedVideo v = generate_video(dyn_opts(23, 90, busy_rates()));
  double prev = -1;
  for (const SceneState& s : v.scene.states) {
    EXPECT_GE(s.flap_angle, prev);
    prev = s.flap_angle;
    EXPECT_LE(s.flap_angle, 2 * M_PI + 1e-12);
    EXPECT_LT(std::abs(s.tilt_x), M_PI / 2);
    EXPECT_LT(std::abs(s.tilt_y), M_PI / 2);
    EXPECT_TRUE(std::isfinite(s.flap_radius));
  }
}

TEST(GenerateVideo, EventStructureInvariants) {
  int tears = 0;
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    GeneratedVideo v = generate_video(dyn_opts(seed, 150, busy_rates()));
    for (const Event& e : v.scene.events) {
      // Precursor lead within [1, 3] s of the first flagged frame.
      EXPECT_GE(e.start - e.onset, kFps) << "class " << e.cls;
      EXPECT_LE(e.start - e.onset, 3 * kFps + 1);
      EXPECT_LT(e.onset, e.start);
      EXPECT_LT(e.start, e.end);
      if (e.cls == kTear) {
        ++tears;
        bool inside = false;
        for (const Event& re : v.scene.events)
          if (re.cls == kRadialExtension && re.start < e.start &&
              e.end <= re.end)
            inside = true;
        EXPECT_TRUE(inside) << "tear not nested in a radial extension";
      }
    }
    // Flags outside scheduled windows must be empty for declared classes.
    for (int t = 0; t < v.meta.num_frames; ++t)
      for (int cls : {kSmoothness, kRadialExtension, kTear}) {
        bool scheduled = false;
        for (const Event& e : v.scene.events)
          if (e.cls == cls && t >= e.start && t < e.end) scheduled = true;
        EXPECT_EQ(mask_has(v.labels.errors[t], cls), scheduled);
      }
  }
  EXPECT_GT(tears, 0);
}

TEST(GenerateVideo, PrecursorDominatesQuietWindows) {
  // Observable feature one second before each event start vs the same
  // feature far from any event: one-sided rank test per class.
  std::array<std::vector<double>, kNumErrorClasses> pre, quiet;
  int events = 0;
  for (std::uint64_t seed = 100; seed < 114; ++seed) {
    GeneratedVideo v = generate_video(dyn_opts(seed, 120, {5.0, 4.0, 4.0, 4.0}));
    for (const Event& e : v.scene.events) {
      ++events;
      pre[e.cls].push_back(scene_feature(v.scene, e.cls, e.start - kFps));
    }
    Rng rng = make_rng(derive_seed(seed, "probe"));
    for (int k = 0; k < 120; ++k) {
      const int t = uniform_int(rng, 60, v.meta.num_frames - 60);
      if (near_any_event(v.scene, t, 3 * kFps)) continue;
      for (int c = 0; c < kNumErrorClasses; ++c)
        quiet[c].push_back(scene_feature(v.scene, c, t));
    }
  }
  EXPECT_GT(events, 200);
  for (int c = 0; c < kNumErrorClasses; ++c) {
    ASSERT_GT(pre[c].size(), 20u) << "class " << c;
    ASSERT_GT(quiet[c].size(), 100u);
    EXPECT_LT(rank_test_p(pre[c], quiet[c]), 0.01) << "class " << c;
  }
}

TEST(Render, SourceBorderIsExactlyZero) {
  GenVideoOptions opt;
  opt.seed = 31;
  opt.duration_s = 10;
  opt.resolution = 48;
  GeneratedVideo v = generate_video(opt);
  const ImageU8& f = v.frames[50];
  int outside = 0;
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      const float dx = x + 0.5f - v.look.eye_cx;
      const float dy = y + 0.5f - v.look.eye_cy;
      if (std::sqrt(dx * dx + dy * dy) > v.look.eye_r + 0.5f) {
        ++outside;
        for (int c = 0; c < 3; ++c) EXPECT_EQ(f.at(c, y, x), 0);
      }
    }
  EXPECT_GT(outside, 100);
}

TEST(Render, RedReflexDimsDuringEvent) {
  ErrorRates rates;
  rates.out_of_red_reflex = 5.0;
  GenVideoOptions opt;
  opt.seed = 37;
  opt.duration_s = 60;
  opt.rates = rates;
  opt.resolution = 48;
  opt.render = false;
  GeneratedVideo v = generate_video(opt);
  const Event* e = nullptr;
  for (const Event& ev : v.scene.events)
    if (ev.cls == kOutOfRedReflex) e = &ev;
  ASSERT_NE(e, nullptr);

  auto center_brightness = [&](int t) {
    Rng rng = make_rng(1);
    Image img = render_frame(v.scene, t, v.style, v.look, rng);
    double acc = 0;
    int n = 0;
    const int c0 = static_cast<int>(v.look.eye_cx);
    for (int y = c0 - 4; y < c0 + 4; ++y)
      for (int x = c0 - 4; x < c0 + 4; ++x) {
        acc += img.at(0, y, x);
        ++n;
      }
    return acc / n;
  };
  const int mid = (e->start + e->end) / 2;
  const int quiet = e->onset - 4 * kFps;
  ASSERT_GT(quiet, 0);
  EXPECT_LT(center_brightness(mid), center_brightness(quiet) - 0.1);
}

TEST(Render, DomainStylesProduceLargeHistogramGap) {
  auto mean_histogram = [](data::Domain domain, std::uint64_t seed) {
    GenVideoOptions opt;
    opt.seed = seed;
    opt.domain = domain;
    opt.duration_s = 10;
    opt.resolution = 32;
    opt.rates = busy_rates();
    opt.recording_days = 5;
    opt.recording_day = static_cast<int>(seed % 5);
    GeneratedVideo v = generate_video(opt);
    std::vector<double> h(3 * 32, 0.0);
    int count = 0;
    for (size_t t = 0; t < v.frames.size(); t += 30) {
      const ImageU8& f = v.frames[t];
      for (int c = 0; c < 3; ++c)
        for (int y = 0; y < f.height; ++y)
          for (int x = 0; x < f.width; ++x) ++h[c * 32 + f.at(c, y, x) / 8];
      ++count;
    }
    for (double& x : h) x /= count * 32.0 * 32.0;
    return h;
  };
  std::vector<double> hs(3 * 32, 0.0), ht(3 * 32, 0.0);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto a = mean_histogram(data::Domain::kSource, 50 + seed);
    auto b = mean_histogram(data::Domain::kTarget, 60 + seed);
    for (size_t i = 0; i < hs.size(); ++i) {
      hs[i] += a[i] / 3;
      ht[i] += b[i] / 3;
    }
  }
  double l1 = 0;
  for (size_t i = 0; i < hs.size(); ++i) l1 += std::abs(hs[i] - ht[i]);
  EXPECT_GT(l1, 0.5);  // per-channel mass is 1, so 3 channels max 6
}

TEST(Corpus, LayoutAndLabeledFraction) {
  const fs::path root = fs::temp_directory_path() / "rhexis_gen_test";
  fs::remove_all(root);
  GeneratorConfig cfg;
  cfg.seed = 5;
  cfg.source.videos = 2;
  cfg.source.duration_min_s = 10;
  cfg.source.duration_max_s = 12;
  cfg.source.resolution = 16;
  cfg.source.rates = busy_rates();
  cfg.target.videos = 5;
  cfg.target.duration_min_s = 10;
  cfg.target.duration_max_s = 12;
  cfg.target.resolution = 16;
  cfg.target.rates = {1.0, 1.0, 1.0, 0.0};
  cfg.target.recording_days = 3;
  cfg.target.labeled_fraction = 0.4;
  auto metas = generate_corpus(cfg, root);

  ASSERT_EQ(metas.size(), 7u);
  EXPECT_TRUE(fs::exists(root / "manifest.json"));
  EXPECT_FALSE(fs::exists(root / "manifest.json.tmp"));
  int labeled_targets = 0;
  for (const auto& m : metas) {
    const fs::path dir = root / data::domain_name(m.domain) / m.id;
    EXPECT_TRUE(fs::exists(dir / "frames" / "000000.png"));
    char last[32];
    std::snprintf(last, sizeof(last), "%06d.png", m.num_frames - 1);
    EXPECT_TRUE(fs::exists(dir / "frames" / last));
    EXPECT_EQ(fs::exists(dir / "annotations.jsonl"), m.labeled);
    if (m.domain == data::Domain::kSource) {
      EXPECT_TRUE(m.labeled);
    } else {
      labeled_targets += m.labeled;
    }
  }
  EXPECT_EQ(labeled_targets, 2);  // lround(0.4 * 5)

  // Empty config still yields a valid manifest.
  const fs::path root2 = fs::temp_directory_path() / "rhexis_gen_empty";
  fs::remove_all(root2);
  auto none = generate_corpus(GeneratorConfig{}, root2);
  EXPECT_TRUE(none.empty());
  std::ifstream in(root2 / "manifest.json");
  nlohmann::json manifest = nlohmann::json::parse(in);
  EXPECT_EQ(manifest["videos"].size(), 0u);
  fs::remove_all(root);
  fs::remove_all(root2);
}
