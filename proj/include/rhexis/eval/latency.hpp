#pragma once

// ============================================================================
// Inference timing: run a fixed number of single-snippet forward passes
// over pre-generated random frames and report wall-clock statistics, for
// the full prediction path and for the spatial stage alone. Work grows
// with the observed window, so longer windows must cost at least as much.
// ============================================================================

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <vector>

#include <json.hpp>

#include "rhexis/model/network.hpp"

namespace rhexis::eval {

struct LatencyReport {
  int frames = 0;
  int stride = 0;
  int inferences = 0;
  double total_ms = 0;         // full forward passes, summed
  double mean_ms = 0;
  double std_ms = 0;           // sample standard deviation
  double p50_ms = 0;
  double p90_ms = 0;
  double max_ms = 0;
  double spatial_total_ms = 0; // spatial stage alone, summed

  nlohmann::json to_json() const {
    return {{"frames", frames},         {"stride", stride},
            {"inferences", inferences}, {"total_ms", total_ms},
            {"mean_ms", mean_ms},       {"std_ms", std_ms},
            {"p50_ms", p50_ms},         {"p90_ms", p90_ms},
            {"max_ms", max_ms},         {"spatial_total_ms", spatial_total_ms}};
  }
};

inline LatencyReport measure_latency(const model::ModelConfig& mc,
                                     int inferences, std::uint64_t seed,
                                     int warmup = 3) {
  if (inferences < 1) throw ConfigError("measure_latency: inferences < 1");
  using clock = std::chrono::steady_clock;
  model::AnticipationNet<float> net(mc, seed);

  // A small pool of random snippets so the cache cannot memoize one input.
  Rng rng = make_rng(derive_seed(seed, "latency"));
  std::vector<MatF> pool(8);
  for (auto& frames : pool) {
    frames.resize(mc.frames, 3 * mc.frame_size * mc.frame_size);
    for (int r = 0; r < frames.rows(); ++r)
      for (int c = 0; c < frames.cols(); ++c)
        frames(r, c) = static_cast<float>(uniform(rng, 0.0, 1.0));
  }

  for (int i = 0; i < warmup; ++i) net.forward(pool[i % pool.size()], 1);

  LatencyReport rep;
  rep.frames = mc.frames;
  rep.stride = mc.stride;
  rep.inferences = inferences;

  std::vector<double> times_ms(inferences);
  float sink = 0;  // keep the optimizer honest
  for (int i = 0; i < inferences; ++i) {
    const MatF& frames = pool[i % pool.size()];
    const int horizon = 1 + i % 5;
    const auto t0 = clock::now();
    const auto& out = net.forward(frames, horizon);
    const auto t1 = clock::now();
    sink += out.pred_probs(0, 0);
    times_ms[i] =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  if (!std::isfinite(sink)) throw DataError("latency: non-finite outputs");

  for (int i = 0; i < inferences; ++i) {
    const MatF& frames = pool[i % pool.size()];
    const auto t0 = clock::now();
    const MatF sr = net.spatial_forward(frames);
    const auto t1 = clock::now();
    sink += sr(0, 0);
    rep.spatial_total_ms +=
        std::chrono::duration<double, std::milli>(t1 - t0).count();
  }

  rep.total_ms = std::accumulate(times_ms.begin(), times_ms.end(), 0.0);
  rep.mean_ms = rep.total_ms / inferences;
  if (inferences > 1) {
    double ss = 0;
    for (double t : times_ms) ss += (t - rep.mean_ms) * (t - rep.mean_ms);
    rep.std_ms = std::sqrt(ss / (inferences - 1));
  }
  std::sort(times_ms.begin(), times_ms.end());
  rep.p50_ms = times_ms[inferences / 2];
  rep.p90_ms = times_ms[std::min(inferences - 1, inferences * 9 / 10)];
  rep.max_ms = times_ms.back();
  return rep;
}

}  // namespace rhexis::eval
