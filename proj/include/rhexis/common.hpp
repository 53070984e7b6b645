// ============================================================================
// common.hpp - shared constants and small utilities
// ============================================================================

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace rhexis {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kFps = 30;

// Class layout used everywhere: four error classes, then the two derived
// outputs. any_error = OR of the four, no_error = NOT any_error.
enum ClassId : int {
  kSmoothness = 0,
  kOutOfRedReflex = 1,
  kRadialExtension = 2,
  kTear = 3,
  kNoError = 4,
  kAnyError = 5,
};

inline constexpr int kNumErrorClasses = 4;
inline constexpr int kNumClasses = 6;

inline constexpr std::array<const char*, kNumClasses> kClassNames = {
    "smoothness", "out_of_red_reflex", "radial_extension",
    "tear",       "no_error",          "any_error"};

// Squared tilt threshold for the out-of-red-reflex rule.
inline constexpr double kRedReflexAngle = M_PI / 12.0;

inline double red_reflex_threshold_sq() {
  return kRedReflexAngle * kRedReflexAngle;
}

// Per-frame label bitmask over the four error classes.
using ErrorMask = std::uint8_t;

inline bool mask_has(ErrorMask m, int cls) { return (m >> cls) & 1; }
inline void mask_set(ErrorMask& m, int cls) {
  m = static_cast<ErrorMask>(m | (1u << cls));
}
inline bool mask_any(ErrorMask m) { return m != 0; }

// Expands a 4-class mask to the full 6-way binary label vector.
inline std::array<float, kNumClasses> expand_mask(ErrorMask m) {
  std::array<float, kNumClasses> out{};
  for (int c = 0; c < kNumErrorClasses; ++c) out[c] = mask_has(m, c) ? 1.f : 0.f;
  out[kAnyError] = mask_any(m) ? 1.f : 0.f;
  out[kNoError] = mask_any(m) ? 0.f : 1.f;
  return out;
}

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace rhexis
