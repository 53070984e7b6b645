#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "rhexis/eval/auc.hpp"
#include "rhexis/rng.hpp"

using namespace rhexis;

namespace {

// O(n^2) pairwise estimator: P(s+ > s-) + 0.5 P(s+ == s-).
double auc_bruteforce(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0;
  long pairs = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      ++pairs;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// Random instance with heavy ties (scores on a small grid).
void random_instance(Rng& rng, int n, std::vector<double>& s,
                     std::vector<int>& y) {
  s.resize(n);
  y.resize(n);
  bool has_pos = false, has_neg = false;
  for (int i = 0; i < n; ++i) {
    s[i] = uniform_int(rng, 0, 9) / 3.0;
    y[i] = uniform(rng, 0, 1) < 0.4 ? 1 : 0;
    (y[i] ? has_pos : has_neg) = true;
  }
  if (!has_pos) y[0] = 1;
  if (!has_neg) y[n > 1 ? 1 : 0] = 0;
}

}  // namespace

TEST(Auc, PerfectSeparationIsOne) {
  EXPECT_DOUBLE_EQ(auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}), 1.0);
}

TEST(Auc, ConstantScoresAreChance) {
  EXPECT_DOUBLE_EQ(auc({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}), 0.5);
}

TEST(Auc, HandlesTies) {
  // pairwise count: 3.5 wins out of 4 pairs
  EXPECT_DOUBLE_EQ(auc({1, 2, 2, 3}, {0, 1, 0, 1}), 0.875);
}

TEST(Auc, MatchesBruteForceOnRandomInstances) {
  Rng rng = make_rng(101);
  std::vector<double> s;
  std::vector<int> y;
  for (int rep = 0; rep < 100; ++rep) {
    random_instance(rng, uniform_int(rng, 2, 200), s, y);
    EXPECT_NEAR(auc(s, y), auc_bruteforce(s, y), 1e-12);
  }
}

TEST(Auc, RejectsDegenerateLabels) {
  EXPECT_THROW(auc({1, 2}, {1, 1}), DataError);
  EXPECT_THROW(auc({1, 2}, {0, 0}), DataError);
}

TEST(Delong, ComponentsMatchDefinitionalForm) {
  Rng rng = make_rng(77);
  std::vector<double> s;
  std::vector<int> y;
  for (int rep = 0; rep < 20; ++rep) {
    random_instance(rng, uniform_int(rng, 4, 60), s, y);
    DelongComponents c = delong_components(s, y);
    // V10_i = mean_j psi(x_i, y_j), V01_j = mean_i psi(x_i, y_j)
    std::vector<double> pos, neg;
    for (size_t i = 0; i < s.size(); ++i) (y[i] ? pos : neg).push_back(s[i]);
    for (size_t i = 0; i < pos.size(); ++i) {
      double v = 0;
      for (double x : neg) v += pos[i] > x ? 1.0 : (pos[i] == x ? 0.5 : 0.0);
      EXPECT_NEAR(c.v_pos[i], v / neg.size(), 1e-12);
    }
    for (size_t j = 0; j < neg.size(); ++j) {
      double v = 0;
      for (double x : pos) v += x > neg[j] ? 1.0 : (x == neg[j] ? 0.5 : 0.0);
      EXPECT_NEAR(c.v_neg[j], v / pos.size(), 1e-12);
    }
  }
}

TEST(Delong, SelfComparisonPValueIsOne) {
  Rng rng = make_rng(5);
  std::vector<double> s;
  std::vector<int> y;
  random_instance(rng, 100, s, y);
  AucComparison cmp = delong_compare(s, s, y);
  EXPECT_DOUBLE_EQ(cmp.p_value, 1.0);
  EXPECT_DOUBLE_EQ(cmp.auc_a, cmp.auc_b);
}

TEST(Delong, VarianceCloseToBootstrap) {
  // Smaller version of the acceptance check: gaussian score mixture.
  Rng rng = make_rng(99);
  const int n = 1000;
  std::vector<double> s(n);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = i % 2;
    s[i] = gaussian(rng, y[i] ? 0.8 : 0.0, 1.0);
  }
  AucEstimate est = delong_auc(s, y);

  const int reps = 4000;
  std::vector<double> aucs(reps);
  std::vector<double> bs(n);
  std::vector<int> by(n);
  for (int r = 0; r < reps; ++r) {
    for (int i = 0; i < n; ++i) {
      int k = uniform_int(rng, 0, n - 1);
      bs[i] = s[k];
      by[i] = y[k];
    }
    aucs[r] = auc(bs, by);
  }
  double mean = 0;
  for (double a : aucs) mean += a;
  mean /= reps;
  double var = 0;
  for (double a : aucs) var += (a - mean) * (a - mean);
  var /= (reps - 1);
  EXPECT_NEAR(est.variance, var, 0.2 * var);
}

TEST(Delong, CiWidthShrinksWithSampleSize) {
  Rng rng = make_rng(12);
  double prev = 1e9;
  for (int n : {100, 400, 1600}) {
    double width = 0;
    const int reps = 10;
    for (int r = 0; r < reps; ++r) {
      std::vector<double> s(n);
      std::vector<int> y(n);
      for (int i = 0; i < n; ++i) {
        y[i] = i % 2;
        s[i] = gaussian(rng, y[i] ? 0.7 : 0.0, 1.0);
      }
      AucEstimate est = delong_auc(s, y);
      width += est.ci_high - est.ci_low;
    }
    width /= reps;
    EXPECT_LT(width, prev);
    prev = width;
  }
}

TEST(Delong, VarianceNonNegativeAndCiOrdered) {
  Rng rng = make_rng(3);
  std::vector<double> s;
  std::vector<int> y;
  for (int rep = 0; rep < 50; ++rep) {
    random_instance(rng, uniform_int(rng, 3, 80), s, y);
    AucEstimate est = delong_auc(s, y);
    EXPECT_GE(est.variance, 0.0);
    EXPECT_LE(est.ci_low, est.auc);
    EXPECT_GE(est.ci_high, est.auc);
  }
}
