#pragma once

// ============================================================================
// Train/validation/test split assignment.
//
// Source domain: stratified by per-class error-seconds. Sizes follow the
// configured fractions by largest remainder; the assignment itself is found
// with seeded random restarts plus pairwise-swap hill climbing, minimizing
// the worst relative deviation of any split's per-class error-second
// proportion from the corpus proportion.
//
// Target domain: grouped by recording day. Unlabeled videos can only train
// (labels exist solely on validation/test videos), so when unlabeled videos
// are present they form the training split and the labeled ones are
// apportioned to validation/test per day by largest remainder. A fully
// labeled target corpus is split 60/28/12 within each day instead.
// ============================================================================

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "rhexis/data/corpus_io.hpp"
#include "rhexis/rng.hpp"

namespace rhexis::data {

enum class Split { kTrain = 0, kValidation = 1, kTest = 2 };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "?";
}

inline Split split_from_name(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "validation") return Split::kValidation;
  if (s == "test") return Split::kTest;
  throw ConfigError("unknown split name: " + s);
}

struct SplitOptions {
  std::array<double, 3> source_fractions{0.60, 0.20, 0.20};
  std::array<double, 3> target_fractions{0.60, 0.28, 0.12};
  double stratification_tolerance = 0.20;  // relative, per class
  int restarts = 40;
  int swaps_per_restart = 1200;
};

struct SplitAssignment {
  std::unordered_map<std::string, Split> by_id;
  double source_deviation = 0;  // achieved stratification quality

  Split of(const std::string& id) const {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("video not in split map: " + id);
    return it->second;
  }
  std::vector<int> members(const Corpus& corpus, Domain domain,
                           Split split) const {
    std::vector<int> out;
    for (size_t v = 0; v < corpus.videos.size(); ++v)
      if (corpus.videos[v].domain == domain &&
          of(corpus.videos[v].id) == split)
        out.push_back(static_cast<int>(v));
    return out;
  }
};

namespace detail {

// Split sizes by largest remainder; deterministic (ties to lower index).
inline std::array<int, 3> split_sizes(int n, const std::array<double, 3>& f) {
  std::array<int, 3> out{};
  std::array<double, 3> frac{};
  int given = 0;
  for (int s = 0; s < 3; ++s) {
    const double exact = n * f[s];
    out[s] = static_cast<int>(exact);
    frac[s] = exact - out[s];
    given += out[s];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return frac[a] > frac[b]; });
  for (int k = 0; given < n; ++given, ++k) ++out[order[k % 3]];
  // With n >= 3 every split must be non-empty; tiny n can leave a split at
  // zero under pure largest remainder (3 -> {2,1,0}), so rebalance from the
  // largest split.
  for (int s = 0; s < 3 && n >= 3; ++s)
    if (out[s] == 0) {
      const int donor = static_cast<int>(
          std::max_element(out.begin(), out.end()) - out.begin());
      --out[donor];
      ++out[s];
    }
  return out;
}

// Distribute `total` items over groups proportionally to their capacity,
// by largest remainder, never exceeding any group's capacity. Deterministic
// (ties resolve to the lower group index).
inline std::vector<int> apportion(const std::vector<int>& capacity,
                                  int total) {
  const int cap_sum = std::accumulate(capacity.begin(), capacity.end(), 0);
  total = std::min(total, cap_sum);
  std::vector<int> out(capacity.size(), 0);
  std::vector<std::pair<double, int>> rem;
  int given = 0;
  for (size_t i = 0; i < capacity.size(); ++i) {
    const double exact =
        cap_sum > 0 ? static_cast<double>(total) * capacity[i] / cap_sum : 0.0;
    out[i] = std::min(static_cast<int>(exact), capacity[i]);
    given += out[i];
    rem.push_back({exact - out[i], static_cast<int>(i)});
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (size_t k = 0; given < total; k = (k + 1) % rem.size()) {
    const int i = rem[k].second;
    if (out[i] < capacity[i]) {
      ++out[i];
      ++given;
    }
  }
  return out;
}

struct SourceStats {
  std::vector<double> duration;                 // per video, seconds
  std::vector<std::array<double, 4>> seconds;   // per video, per class
  std::array<double, 4> global_prop{};
  double total_duration = 0;
};

inline SourceStats source_stats(const Corpus& corpus,
                                const std::vector<int>& vids) {
  SourceStats st;
  std::array<double, 4> total{};
  for (int v : vids) {
    const VideoMeta& m = corpus.videos[v];
    if (!corpus.labels[v].labeled())
      throw DataError("source video lacks labels: " + m.id);
    std::array<double, 4> sec{};
    for (ErrorMask mask : corpus.labels[v].errors)
      for (int c = 0; c < 4; ++c)
        if (mask_has(mask, c)) sec[c] += 1.0 / kFps;
    st.duration.push_back(m.duration_s());
    st.seconds.push_back(sec);
    st.total_duration += m.duration_s();
    for (int c = 0; c < 4; ++c) total[c] += sec[c];
  }
  for (int c = 0; c < 4; ++c) st.global_prop[c] = total[c] / st.total_duration;
  return st;
}

// Worst relative deviation over splits and classes with nonzero corpus
// share.
inline double deviation(const SourceStats& st,
                        const std::array<std::array<double, 4>, 3>& sec,
                        const std::array<double, 3>& dur) {
  double worst = 0;
  for (int s = 0; s < 3; ++s)
    for (int c = 0; c < 4; ++c) {
      if (st.global_prop[c] <= 0) continue;
      const double prop = dur[s] > 0 ? sec[s][c] / dur[s] : 0.0;
      worst = std::max(worst,
                       std::abs(prop - st.global_prop[c]) / st.global_prop[c]);
    }
  return worst;
}

}  // namespace detail

inline SplitAssignment split_corpus(const Corpus& corpus, std::uint64_t seed,
                                    const SplitOptions& opt = {}) {
  if (corpus.videos.empty()) throw DataError("split_corpus: empty manifest");
  SplitAssignment assign;

  // ---- source: stratified by error-seconds -----------------------------
  std::vector<int> src;
  for (size_t v = 0; v < corpus.videos.size(); ++v)
    if (corpus.videos[v].domain == Domain::kSource)
      src.push_back(static_cast<int>(v));
  if (!src.empty()) {
    const int n = static_cast<int>(src.size());
    if (n < 3) throw DataError("source stratum smaller than the split count");
    const std::array<int, 3> sizes =
        detail::split_sizes(n, opt.source_fractions);
    detail::SourceStats st = detail::source_stats(corpus, src);

    std::vector<int> best;
    double best_dev = 1e18;
    for (int restart = 0; restart < opt.restarts && best_dev > opt.stratification_tolerance; ++restart) {
      Rng rng = make_rng(derive_seed(seed, "source_split", restart));
      std::vector<int> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      std::vector<int> split_of(n);
      std::array<std::array<double, 4>, 3> sec{};
      std::array<double, 3> dur{};
      int k = 0;
      for (int s = 0; s < 3; ++s)
        for (int j = 0; j < sizes[s]; ++j, ++k) {
          split_of[order[k]] = s;
          dur[s] += st.duration[order[k]];
          for (int c = 0; c < 4; ++c) sec[s][c] += st.seconds[order[k]][c];
        }
      double dev = detail::deviation(st, sec, dur);
      for (int it = 0; it < opt.swaps_per_restart && dev > opt.stratification_tolerance; ++it) {
        const int a = uniform_int(rng, 0, n - 1);
        const int b = uniform_int(rng, 0, n - 1);
        const int sa = split_of[a], sb = split_of[b];
        if (sa == sb) continue;
        dur[sa] += st.duration[b] - st.duration[a];
        dur[sb] += st.duration[a] - st.duration[b];
        for (int c = 0; c < 4; ++c) {
          sec[sa][c] += st.seconds[b][c] - st.seconds[a][c];
          sec[sb][c] += st.seconds[a][c] - st.seconds[b][c];
        }
        const double cand = detail::deviation(st, sec, dur);
        if (cand <= dev) {
          dev = cand;
          split_of[a] = sb;
          split_of[b] = sa;
        } else {  // revert
          dur[sa] += st.duration[a] - st.duration[b];
          dur[sb] += st.duration[b] - st.duration[a];
          for (int c = 0; c < 4; ++c) {
            sec[sa][c] += st.seconds[a][c] - st.seconds[b][c];
            sec[sb][c] += st.seconds[b][c] - st.seconds[a][c];
          }
        }
      }
      if (dev < best_dev) {
        best_dev = dev;
        best = split_of;
      }
    }
    for (int i = 0; i < n; ++i)
      assign.by_id[corpus.videos[src[i]].id] = static_cast<Split>(best[i]);
    assign.source_deviation = best_dev;
  }

  // ---- target: grouped by recording day --------------------------------
  std::vector<int> tgt;
  for (size_t v = 0; v < corpus.videos.size(); ++v)
    if (corpus.videos[v].domain == Domain::kTarget)
      tgt.push_back(static_cast<int>(v));
  if (!tgt.empty()) {
    std::vector<int> unlabeled, labeled;
    for (int v : tgt)
      (corpus.videos[v].labeled ? labeled : unlabeled).push_back(v);

    // Group labeled videos by day, shuffled within each day.
    std::unordered_map<int, std::vector<int>> by_day;
    std::vector<int> days;
    for (int v : labeled) {
      auto [it, fresh] = by_day.try_emplace(corpus.videos[v].recording_day);
      if (fresh) days.push_back(corpus.videos[v].recording_day);
      it->second.push_back(v);
    }
    std::sort(days.begin(), days.end());
    for (int d : days) {
      Rng rng = make_rng(derive_seed(seed, "target_day", d));
      std::shuffle(by_day[d].begin(), by_day[d].end(), rng);
    }

    if (!unlabeled.empty()) {
      // Unlabeled videos train; labeled ones hold out validation/test in
      // the configured ratio, day by day.
      if (labeled.size() < 2)
        throw DataError("need at least 2 labeled target videos");
      for (int v : unlabeled) assign.by_id[corpus.videos[v].id] = Split::kTrain;
      const double fv = opt.target_fractions[1];
      const double ft = opt.target_fractions[2];
      const int n_val = static_cast<int>(
          std::lround(labeled.size() * fv / (fv + ft)));
      std::vector<int> day_count;
      for (int d : days) day_count.push_back(static_cast<int>(by_day[d].size()));
      const std::vector<int> day_val = detail::apportion(day_count, n_val);
      for (size_t i = 0; i < days.size(); ++i) {
        const auto& vids = by_day[days[i]];
        for (size_t j = 0; j < vids.size(); ++j)
          assign.by_id[corpus.videos[vids[j]].id] =
              j < static_cast<size_t>(day_val[i]) ? Split::kValidation
                                                  : Split::kTest;
      }
    } else {
      // Fully labeled corpus: global split sizes first, then apportion each
      // split across days so no day concentrates in one split.
      if (tgt.size() < 3)
        throw DataError("target stratum smaller than the split count");
      const std::array<int, 3> sizes = detail::split_sizes(
          static_cast<int>(tgt.size()), opt.target_fractions);
      std::vector<int> remaining;
      for (int d : days) remaining.push_back(static_cast<int>(by_day[d].size()));
      const std::vector<int> day_train = detail::apportion(remaining, sizes[0]);
      for (size_t i = 0; i < days.size(); ++i) remaining[i] -= day_train[i];
      const std::vector<int> day_val = detail::apportion(remaining, sizes[1]);
      for (size_t i = 0; i < days.size(); ++i) {
        const auto& vids = by_day[days[i]];
        for (size_t j = 0; j < vids.size(); ++j) {
          Split s = Split::kTest;
          if (j < static_cast<size_t>(day_train[i]))
            s = Split::kTrain;
          else if (j < static_cast<size_t>(day_train[i] + day_val[i]))
            s = Split::kValidation;
          assign.by_id[corpus.videos[vids[j]].id] = s;
        }
      }
    }
  }
  return assign;
}

// ----------------------------------------------------------------------------
// splits.json: flat map video_id -> split name.
// ----------------------------------------------------------------------------
inline void save_splits(const std::filesystem::path& path,
                        const SplitAssignment& assign) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, split] : assign.by_id) j[id] = split_name(split);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

inline SplitAssignment load_splits(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  nlohmann::json j = nlohmann::json::parse(in);
  SplitAssignment assign;
  for (const auto& [id, name] : j.items())
    assign.by_id[id] = split_from_name(name.get<std::string>());
  return assign;
}

}  // namespace rhexis::data
