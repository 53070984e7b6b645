#pragma once

// ============================================================================
// Trainable parameters and the Adam optimizer.
//
// A Param owns its value, accumulated gradient, and Adam moment state.
// Layers register their Params with an optimizer; each registration carries
// its own learning rate, so parameter groups (e.g. a lower rate for the
// spatial encoder) fall out naturally.
// ============================================================================

#include <cmath>
#include <cstdint>
#include <vector>

#include "rhexis/common.hpp"
#include "rhexis/linalg.hpp"
#include "rhexis/rng.hpp"

namespace rhexis::nn {

template <typename S>
struct Param {
  Mat<S> value;
  Mat<S> grad;
  Mat<S> m, v;  // Adam first/second moments

  void resize(int rows, int cols) {
    value = Mat<S>::Zero(rows, cols);
    grad = Mat<S>::Zero(rows, cols);
    m = Mat<S>::Zero(rows, cols);
    v = Mat<S>::Zero(rows, cols);
  }

  // He-uniform initialization: U(-limit, limit), limit = sqrt(6 / fan_in).
  void init_he(int rows, int cols, int fan_in, Rng& rng) {
    resize(rows, cols);
    const double limit = std::sqrt(6.0 / fan_in);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        value(r, c) = static_cast<S>(uniform(rng, -limit, limit));
  }

  // Glorot-uniform: limit = sqrt(6 / (fan_in + fan_out)).
  void init_glorot(int rows, int cols, int fan_in, int fan_out, Rng& rng) {
    resize(rows, cols);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        value(r, c) = static_cast<S>(uniform(rng, -limit, limit));
  }

  void zero_grad() { grad.setZero(); }
  long size() const { return value.size(); }
};

template <typename S>
struct AdamOptions {
  S beta1 = static_cast<S>(0.9);
  S beta2 = static_cast<S>(0.999);
  S eps = static_cast<S>(1e-8);
};

template <typename S>
class Adam {
 public:
  explicit Adam(AdamOptions<S> opt = {}) : opt_(opt) {}

  void add(Param<S>* p, S lr) { entries_.push_back({p, lr}); }
  void add(std::vector<Param<S>*> params, S lr) {
    for (Param<S>* p : params) add(p, lr);
  }

  int steps() const { return t_; }
  long parameter_count() const {
    long n = 0;
    for (const auto& e : entries_) n += e.param->size();
    return n;
  }

  void zero_grad() {
    for (auto& e : entries_) e.param->zero_grad();
  }

  void step() {
    ++t_;
    const S c1 = static_cast<S>(1) - std::pow(opt_.beta1, static_cast<S>(t_));
    const S c2 = static_cast<S>(1) - std::pow(opt_.beta2, static_cast<S>(t_));
    for (auto& e : entries_) {
      Param<S>& p = *e.param;
      p.m = opt_.beta1 * p.m + (static_cast<S>(1) - opt_.beta1) * p.grad;
      p.v.array() = opt_.beta2 * p.v.array() +
                    (static_cast<S>(1) - opt_.beta2) * p.grad.array().square();
      p.value.array() -= e.lr * (p.m.array() / c1) /
                         ((p.v.array() / c2).sqrt() + opt_.eps);
    }
  }

 private:
  struct Entry {
    Param<S>* param;
    S lr;
  };
  AdamOptions<S> opt_;
  std::vector<Entry> entries_;
  int t_ = 0;
};

}  // namespace rhexis::nn
