#pragma once

// ============================================================================
// Model hyperparameters. Defaults mirror the reference configuration:
// 64x64 frames, 4 conv blocks (16/32/64/128) into a 128-wide frame feature,
// a 256-wide temporal encoder, an 8-wide horizon embedding, and sigmoid
// heads over the 6 output classes.
// ============================================================================

#include <string>
#include <vector>

#include "rhexis/common.hpp"

namespace rhexis::model {

enum class TemporalKind { kLstm, kDilatedConv, kAttention };

inline const char* temporal_name(TemporalKind k) {
  switch (k) {
    case TemporalKind::kLstm: return "lstm";
    case TemporalKind::kDilatedConv: return "dilated_conv";
    case TemporalKind::kAttention: return "attention";
  }
  return "?";
}

inline TemporalKind temporal_from_name(const std::string& s) {
  if (s == "lstm") return TemporalKind::kLstm;
  if (s == "dilated_conv") return TemporalKind::kDilatedConv;
  if (s == "attention") return TemporalKind::kAttention;
  throw ConfigError("unknown temporal encoder: " + s);
}

struct ModelConfig {
  int frames = 10;      // L: sampled frames per snippet
  int stride = 3;       // S: sampling stride in raw frames
  int frame_size = 64;  // square input resolution
  std::vector<int> spatial_widths{16, 32, 64, 128};  // conv block channels
  TemporalKind temporal = TemporalKind::kLstm;
  int temporal_dim = 256;
  int lstm_layers = 2;
  int conv_layers = 4;   // dilations 1, 2, 4, 8
  int attn_layers = 3;
  int attn_heads = 8;
  int horizon_dim = 8;   // anticipation-horizon embedding width
  int head_hidden = 64;  // prediction head hidden width
  double lambda_current = 0.1;   // weight of the current-error loss term
  bool per_frame_current = false;  // per-frame current loss instead of pooled

  int spatial_dim() const { return spatial_widths.back(); }
  int fused_dim() const { return temporal_dim + kNumClasses + horizon_dim; }

  void validate() const {
    if (frames < 1 || stride < 1) throw ConfigError("frames/stride must be >= 1");
    if (frame_size < 8) throw ConfigError("frame_size too small");
    if (spatial_widths.empty()) throw ConfigError("no spatial widths");
    if (frame_size % (1 << spatial_widths.size()) != 0)
      throw ConfigError("frame_size must be divisible by 2^conv_blocks");
    if (temporal_dim < 1 || horizon_dim < 1 || head_hidden < 1)
      throw ConfigError("widths must be >= 1");
    if (temporal == TemporalKind::kAttention && temporal_dim % attn_heads != 0)
      throw ConfigError("temporal_dim must divide evenly into heads");
    if (lambda_current < 0) throw ConfigError("lambda_current must be >= 0");
  }
};

}  // namespace rhexis::model
