#pragma once

// ============================================================================
// Target-domain homogenization: image-space operations that move target
// frames toward the source appearance before the network sees them.
//
//   central_crop      — cut the wider target field of view down to the
//                       source framing (fraction of the short side).
//   ocular border mask— zero everything outside the inscribed circle, the
//                       way source frames are masked.
//   histogram_match   — exact histogram specification per channel by rank
//                       mapping against a reference frame; a ReferenceSet
//                       picks the reference with the nearest channel means.
//
// homogenize() composes them: crop -> resize -> mask -> match.
// ============================================================================

#include <algorithm>
#include <array>
#include <numeric>
#include <vector>

#include "rhexis/data/corpus_io.hpp"
#include "rhexis/data/ingest.hpp"
#include "rhexis/image.hpp"
#include "rhexis/rng.hpp"

namespace rhexis::adapt {

// Square crop of `fraction` of the short side, centered.
inline Image central_crop(const Image& img, double fraction) {
  if (fraction <= 0.0 || fraction > 1.0)
    throw ConfigError("central_crop: fraction must be in (0, 1]");
  const int side = std::max(
      1, static_cast<int>(std::lround(std::min(img.width, img.height) * fraction)));
  const int x0 = (img.width - side) / 2;
  const int y0 = (img.height - side) / 2;
  return crop(img, x0, y0, side, side);
}

// Exact histogram specification: the output of each channel is a permutation
// of the reference channel's values (when pixel counts match), assigned in
// rank order. Ties in the source break by pixel index, so the mapping is
// deterministic. A constant source channel has no usable ranks; it takes the
// reference channel's median instead.
inline Image histogram_match(const Image& src, const Image& ref) {
  if (ref.width < 1 || ref.height < 1)
    throw DataError("histogram_match: empty reference");
  Image out = src;
  const int n = src.width * src.height;
  const int m = ref.width * ref.height;
  std::vector<int> order(n);
  std::vector<float> ref_sorted(m);
  for (int c = 0; c < 3; ++c) {
    const float* s = src.data.data() + static_cast<size_t>(c) * n;
    const float* r = ref.data.data() + static_cast<size_t>(c) * m;
    std::copy(r, r + m, ref_sorted.begin());
    std::sort(ref_sorted.begin(), ref_sorted.end());

    const auto [mn, mx] = std::minmax_element(s, s + n);
    if (*mn == *mx) {  // constant channel: use the reference median
      const float med = ref_sorted[m / 2];
      std::fill(out.data.begin() + static_cast<size_t>(c) * n,
                out.data.begin() + static_cast<size_t>(c + 1) * n, med);
      continue;
    }

    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return s[a] < s[b]; });
    float* d = out.data.data() + static_cast<size_t>(c) * n;
    for (int rank = 0; rank < n; ++rank) {
      const long ri = n > 1 ? static_cast<long>(rank) * (m - 1) / (n - 1) : m / 2;
      d[order[rank]] = ref_sorted[ri];
    }
  }
  return out;
}

// References with their channel means, for nearest-mean selection.
class ReferenceSet {
 public:
  void add(Image img) {
    std::array<float, 3> mean{};
    const int n = img.width * img.height;
    for (int c = 0; c < 3; ++c)
      mean[c] = std::accumulate(img.data.begin() + static_cast<size_t>(c) * n,
                                img.data.begin() + static_cast<size_t>(c + 1) * n,
                                0.0f) /
                static_cast<float>(n);
    means_.push_back(mean);
    images_.push_back(std::move(img));
  }

  bool empty() const { return images_.empty(); }
  size_t size() const { return images_.size(); }
  const Image& image(size_t i) const { return images_[i]; }

  // Index of the reference whose channel means are closest (L2).
  size_t nearest_index(const Image& img) const {
    if (images_.empty()) throw DataError("empty reference set");
    std::array<float, 3> mean{};
    const int n = img.width * img.height;
    for (int c = 0; c < 3; ++c)
      mean[c] = std::accumulate(img.data.begin() + static_cast<size_t>(c) * n,
                                img.data.begin() + static_cast<size_t>(c + 1) * n,
                                0.0f) /
                static_cast<float>(n);
    size_t best = 0;
    float best_d = std::numeric_limits<float>::max();
    for (size_t i = 0; i < means_.size(); ++i) {
      float d = 0;
      for (int c = 0; c < 3; ++c) {
        const float diff = means_[i][c] - mean[c];
        d += diff * diff;
      }
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  }

  const Image& nearest(const Image& img) const { return image(nearest_index(img)); }

 private:
  std::vector<Image> images_;
  std::vector<std::array<float, 3>> means_;
};

// Sample preprocessed source frames into a reference set.
inline ReferenceSet build_reference_set(const data::Corpus& corpus,
                                        int out_size, int frames_per_video,
                                        std::uint64_t seed) {
  ReferenceSet refs;
  for (size_t v = 0; v < corpus.videos.size(); ++v) {
    if (corpus.videos[v].domain != data::Domain::kSource) continue;
    Rng rng = make_rng(derive_seed(seed, "reference", static_cast<int>(v)));
    for (int k = 0; k < frames_per_video; ++k) {
      const int t = uniform_int(rng, 0, corpus.videos[v].num_frames - 1);
      const Image raw = dequantize(data::load_frame(corpus, static_cast<int>(v), t));
      refs.add(data::preprocess_source(raw, data::eye_circle(corpus.videos[v]),
                                       out_size));
    }
  }
  if (refs.empty()) throw DataError("no source videos for the reference set");
  return refs;
}

struct HomogenizeOptions {
  double crop_fraction = 1.0;    // 1 = no crop
  bool border_mask = false;
  bool match_histogram = false;
  int out_size = 64;

  void validate() const {
    if (crop_fraction <= 0.0 || crop_fraction > 1.0)
      throw ConfigError("crop_fraction must be in (0, 1]");
    if (out_size < 8) throw ConfigError("out_size too small");
  }
};

inline Image homogenize(const Image& frame, const HomogenizeOptions& opt,
                        const ReferenceSet* refs = nullptr) {
  opt.validate();
  if (opt.match_histogram && (!refs || refs->empty()))
    throw ConfigError("histogram matching needs a reference set");
  Image out = opt.crop_fraction < 1.0 ? central_crop(frame, opt.crop_fraction)
                                      : frame;
  out = resize(out, opt.out_size, opt.out_size);
  out.clamp01();
  if (opt.border_mask) data::zero_outside_circle(out);
  if (opt.match_histogram) {
    out = histogram_match(out, refs->nearest(out));
    // Matching permutes values by rank and may lift border zeros when the
    // reference has fewer zero pixels; the mask must win.
    if (opt.border_mask) data::zero_outside_circle(out);
  }
  return out;
}

}  // namespace rhexis::adapt
