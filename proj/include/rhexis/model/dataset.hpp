#pragma once

// ============================================================================
// Snippet sample lists and preprocessed-frame access for training/eval.
//
// Labeled videos yield samples through the anchored snippet enumeration
// (with optional error-free balancing). Unlabeled videos (target-domain
// training split) yield label-free samples at every valid anchor — they
// feed feature-space adaptation and pretext tasks only.
//
// The FrameStore preprocesses each video once on first touch and keeps it
// resident as quantized bytes; snippets materialize as (L, 3*sz*sz) float
// rows in [0,1].
// ============================================================================

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "rhexis/data/corpus_io.hpp"
#include "rhexis/data/ingest.hpp"
#include "rhexis/data/snippets.hpp"
#include "rhexis/data/splits.hpp"
#include "rhexis/linalg.hpp"

namespace rhexis::model {

struct SplitSamples {
  std::vector<data::SampleRef> samples;  // SampleRef::video = corpus index
  bool labeled = true;
};

// Samples for all labeled videos of (domain, split).
inline SplitSamples labeled_samples(const data::Corpus& corpus,
                                    const data::SplitAssignment& assign,
                                    data::Domain domain, data::Split split,
                                    const data::SnippetSpec& spec,
                                    const data::DatasetOptions& opt) {
  std::vector<data::TrackView> tracks;
  for (int v : assign.members(corpus, domain, split)) {
    if (!corpus.labels[v].labeled())
      throw DataError("labeled_samples: unlabeled video " + corpus.videos[v].id);
    tracks.push_back({v, &corpus.labels[v].errors});
  }
  SplitSamples out;
  out.samples = data::build_dataset(tracks, spec, opt);
  return out;
}

// Label-free samples at every valid anchor (no balancing possible).
inline SplitSamples unlabeled_samples(const data::Corpus& corpus,
                                      const data::SplitAssignment& assign,
                                      data::Domain domain, data::Split split,
                                      const data::SnippetSpec& spec,
                                      const data::DatasetOptions& opt) {
  spec.validate();
  const int shift = static_cast<int>(std::lround(opt.shift_s * kFps));
  if (shift < 1) throw ConfigError("unlabeled_samples: shift below one frame");
  SplitSamples out;
  out.labeled = false;
  for (int v : assign.members(corpus, domain, split)) {
    int index = 0;
    for (int anchor = 0; anchor < corpus.videos[v].num_frames;
         anchor += shift) {
      if (!data::anchor_valid(corpus.videos[v].num_frames, anchor, spec))
        continue;
      data::SampleRef ref;
      ref.video = v;
      ref.anchor = anchor;
      ref.anchor_index = index++;
      out.samples.push_back(ref);
    }
  }
  return out;
}

// Per-frame current-error targets for one sample, (L, 6).
inline MatF current_target_matrix(const data::Corpus& corpus,
                                  const data::SampleRef& ref,
                                  const data::SnippetSpec& spec) {
  const data::SnippetLabels labels =
      data::snippet_labels(corpus.labels[ref.video].errors, ref.anchor, spec);
  MatF m(spec.frames, kNumClasses);
  for (int i = 0; i < spec.frames; ++i)
    for (int c = 0; c < kNumClasses; ++c) m(i, c) = labels.current[i][c];
  return m;
}

inline MatF prediction_target_matrix(const data::SampleRef& ref) {
  MatF m(1, kNumClasses);
  for (int c = 0; c < kNumClasses; ++c) m(0, c) = ref.prediction[c];
  return m;
}

class FrameStore {
 public:
  // Maps a raw decoded frame to its preprocessed form; overrides the default
  // per-domain preprocessing (used for homogenized target variants).
  using Preprocessor = std::function<Image(const Image&, const data::VideoMeta&)>;

  FrameStore(const data::Corpus* corpus, int out_size)
      : corpus_(corpus), out_size_(out_size) {}

  // Replaces preprocessing for target-domain videos; clears cached frames of
  // that domain so the change takes effect.
  void set_target_preprocessor(Preprocessor fn) {
    target_pre_ = std::move(fn);
    for (auto it = cache_.begin(); it != cache_.end();)
      it = corpus_->videos[it->first].domain == data::Domain::kTarget
               ? cache_.erase(it)
               : std::next(it);
  }

  int out_size() const { return out_size_; }
  long resident_bytes() const {
    long total = 0;
    for (const auto& [v, mat] : cache_) total += mat.size();
    return total;
  }

  // Quantized preprocessed video, rows = frames.
  const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic,
                      Eigen::RowMajor>&
  video(int v) {
    auto it = cache_.find(v);
    if (it != cache_.end()) return it->second;
    const data::VideoMeta& meta = corpus_->videos[v];
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
        mat(meta.num_frames, 3L * out_size_ * out_size_);
    for (int t = 0; t < meta.num_frames; ++t) {
      const Image raw = dequantize(data::load_frame(*corpus_, v, t));
      Image pre;
      if (meta.domain == data::Domain::kTarget && target_pre_)
        pre = target_pre_(raw, meta);
      else if (meta.domain == data::Domain::kSource)
        pre = data::preprocess_source(raw, data::eye_circle(meta), out_size_);
      else
        pre = data::preprocess_target(raw, out_size_);
      if (pre.width != out_size_ || pre.height != out_size_)
        throw DataError("preprocessor returned the wrong frame size");
      const ImageU8 q = quantize(pre);
      for (long i = 0; i < mat.cols(); ++i) mat(t, i) = q.data[i];
    }
    auto [ins, ok] = cache_.emplace(v, std::move(mat));
    return ins->second;
  }

  // (L, 3*sz*sz) float frames in [0,1] for one snippet.
  MatF snippet(const data::SampleRef& ref, const data::SnippetSpec& spec) {
    const auto& mat = video(ref.video);
    MatF out(spec.frames, mat.cols());
    for (int i = 0; i < spec.frames; ++i) {
      const int f = data::sampled_frame(ref.anchor, spec, i);
      if (f < 0 || f >= mat.rows())
        throw DataError("snippet frame out of range");
      out.row(i) = mat.row(f).cast<float>() / 255.0f;
    }
    return out;
  }

 private:
  const data::Corpus* corpus_;
  int out_size_;
  Preprocessor target_pre_;
  std::unordered_map<int,
                     Eigen::Matrix<std::uint8_t, Eigen::Dynamic,
                                   Eigen::Dynamic, Eigen::RowMajor>>
      cache_;
};

}  // namespace rhexis::model
