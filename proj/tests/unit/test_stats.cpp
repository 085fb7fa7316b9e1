// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "vafx/error.hpp"
#include "vafx/stats.hpp"

namespace vafx {
namespace {

ScoreMatrix matrix(std::size_t rows, std::size_t cols, const std::vector<double>& v) {
  ScoreMatrix m(rows, cols);
  m.values = v;
  return m;
}

std::vector<oracle::Vec> to_rows(const ScoreMatrix& m) {
  std::vector<oracle::Vec> rows(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) rows[r].push_back(m.at(r, c));
  }
  return rows;
}

ScoreMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, bool ties) {
  ScoreMatrix m(rows, cols);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> small(0, 3);
  for (double& v : m.values) v = ties ? small(rng) : u(rng);
  return m;
}

// Hollander & Wolfe rounding-first-base times: 22 players x 3 methods.
const std::vector<double> kRoundingTimes = {
    5.40, 5.50, 5.55, 5.85, 5.70, 5.75, 5.20, 5.60, 5.50, 5.55, 5.50, 5.40, 5.90, 5.85, 5.70,
    5.45, 5.55, 5.60, 5.40, 5.40, 5.35, 5.45, 5.50, 5.35, 5.25, 5.15, 5.00, 5.85, 5.80, 5.70,
    5.25, 5.20, 5.10, 5.65, 5.55, 5.45, 5.60, 5.35, 5.45, 5.05, 5.00, 4.95, 5.50, 5.50, 5.40,
    5.45, 5.55, 5.50, 5.55, 5.55, 5.35, 5.45, 5.50, 5.55, 5.50, 5.45, 5.25, 5.65, 5.60, 5.40,
    5.70, 5.65, 5.55, 6.30, 6.30, 6.25};

TEST(Midranks, AveragesTies) {
  EXPECT_EQ(midranks(std::vector<double>{3.0, 1.0, 2.0}), (std::vector<double>{3.0, 1.0, 2.0}));
  EXPECT_EQ(midranks(std::vector<double>{5.0, 5.0, 1.0, 5.0}), (std::vector<double>{3.0, 3.0, 1.0, 3.0}));
}

TEST(Friedman, RoundingTimesTextbook) {
  const FriedmanResult r = friedman_test(matrix(22, 3, kRoundingTimes));
  EXPECT_EQ(r.method, "chi-square");
  EXPECT_NEAR(r.statistic, 11.142857, 1e-3);
  EXPECT_NEAR(r.p_value, 0.003805, 1e-3);
  EXPECT_NEAR(r.p_value, 0.003805040775511383, 1e-9);
}

TEST(Friedman, MatchesEnumerationOracle) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 2 + t % 4, k = 2 + (t / 4) % 3;
    const ScoreMatrix m = random_matrix(rng, n, k, t % 2 == 0);
    const FriedmanResult r = friedman_test(m);
    const oracle::Friedman o = oracle::friedman_bruteforce(to_rows(m));
    EXPECT_EQ(r.method, "exact");
    EXPECT_NEAR(r.statistic, o.statistic, 1e-9) << "trial " << t;
    EXPECT_NEAR(r.p_value, o.p_value, 1e-9) << "trial " << t;
  }
}

TEST(Friedman, IdenticalColumnsGiveZeroAndPOne) {
  ScoreMatrix m(5, 4);
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < 4; ++c) m.at(r, c) = static_cast<double>(r);
  }
  const FriedmanResult res = friedman_test(m);
  EXPECT_EQ(res.statistic, 0.0);
  EXPECT_EQ(res.p_value, 1.0);
  EXPECT_FALSE(res.warnings.empty());
}

TEST(Friedman, DominantModelIsSignificant) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    ScoreMatrix m(5, 5);
    const std::size_t best = static_cast<std::size_t>(t % 5);
    for (std::size_t r = 0; r < 5; ++r) {
      for (std::size_t c = 0; c < 5; ++c) m.at(r, c) = c == best ? 0.01 * u(rng) : 0.1 + u(rng);
    }
    const FriedmanResult res = friedman_test(m);
    EXPECT_EQ(res.method, "exact");
    EXPECT_LT(res.p_value, 0.05) << "trial " << t;
    EXPECT_DOUBLE_EQ(res.mean_ranks[best], 1.0);
  }
}

TEST(Friedman, PermutationInvariance) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 30; ++t) {
    const ScoreMatrix m = random_matrix(rng, 5, 4, t % 2 == 1);
    std::vector<std::size_t> perm(4);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    ScoreMatrix p(5, 4);
    for (std::size_t r = 0; r < 5; ++r) {
      for (std::size_t c = 0; c < 4; ++c) p.at(r, c) = m.at(r, perm[c]);
    }
    const FriedmanResult a = friedman_test(m), b = friedman_test(p);
    EXPECT_DOUBLE_EQ(a.p_value, b.p_value);
    EXPECT_NEAR(a.statistic, b.statistic, 1e-12);
    for (std::size_t c = 0; c < 4; ++c) EXPECT_DOUBLE_EQ(b.mean_ranks[c], a.mean_ranks[perm[c]]);
  }
}

TEST(Friedman, MonotoneTransformInvariance) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 30; ++t) {
    const ScoreMatrix m = random_matrix(rng, 6, 3, t % 2 == 1);
    ScoreMatrix e = m, l = m;
    for (double& v : e.values) v = std::exp(3.0 * v) - 7.0;
    for (double& v : l.values) v = std::log1p(v) * 1e-6;
    const FriedmanResult a = friedman_test(m);
    EXPECT_EQ(a.statistic, friedman_test(e).statistic);
    EXPECT_EQ(a.p_value, friedman_test(e).p_value);
    EXPECT_EQ(a.statistic, friedman_test(l).statistic);
  }
}

// The exact null is discrete with sizeable atoms at small Q (P(Q = 0) is about
// 0.17 for 10 blocks x 3 models), so the continuous chi-square can sit 0.1
// below the exact tail there. Agreement is checked where decisions are made.
TEST(Friedman, ChiSquareTracksExactTailAtTenBlocks) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t k : {3u, 4u}) {
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
      ScoreMatrix m(10, k);
      for (std::size_t r = 0; r < 10; ++r) {
        for (std::size_t c = 0; c < k; ++c) m.at(r, c) = u(rng) + (t % 2 ? 0.15 * static_cast<double>(c) : 0.0);
      }
      const double exact = friedman_test(m, PValueMethod::kExact).p_value;
      const double approx = friedman_test(m, PValueMethod::kAsymptotic).p_value;
      if (exact <= 0.2) worst = std::max(worst, std::abs(exact - approx));
    }
    EXPECT_LT(worst, k == 3 ? 0.04 : 0.02) << k << " models";
  }
}

TEST(Friedman, RejectsBadMatrices) {
  EXPECT_THROW(friedman_test(matrix(1, 3, {1, 2, 3})), InputError);
  EXPECT_THROW(friedman_test(matrix(3, 1, {1, 2, 3})), InputError);
  EXPECT_THROW(friedman_test(matrix(2, 2, {1, 2, std::nan(""), 3})), InputError);
  EXPECT_THROW(friedman_test(matrix(2, 2, {1, 2, 3})), InputError);
}

TEST(Friedman, AutoSwitchesToChiSquareAboveThresholds) {
  std::mt19937_64 rng(6);
  EXPECT_EQ(friedman_test(random_matrix(rng, 8, 5, false)).method, "exact");
  EXPECT_EQ(friedman_test(random_matrix(rng, 9, 5, false)).method, "chi-square");
  EXPECT_EQ(friedman_test(random_matrix(rng, 5, 6, false)).method, "chi-square");
}

// ---- Wilcoxon ----------------------------------------------------------------

TEST(Wilcoxon, DarwinZeaMaysTextbook) {
  const std::vector<double> d{6, 8, 14, 16, 23, 24, 28, 29, 41, -48, 49, 56, 60, -67, 75};
  const WilcoxonResult r = wilcoxon_signed_rank(d, std::vector<double>(d.size(), 0.0));
  EXPECT_EQ(r.method, "exact");
  EXPECT_EQ(r.n, 15u);
  EXPECT_NEAR(r.statistic, 24.0, 1e-3);
  EXPECT_NEAR(r.p_value, 0.041259765625, 1e-3);
  EXPECT_NEAR(r.p_value, 0.041259765625, 1e-12);
}

TEST(Wilcoxon, HollanderWolfeDepressionTextbook) {
  const std::vector<double> x{1.83, 0.50, 1.62, 2.48, 1.68, 1.88, 1.55, 3.06, 1.30};
  const std::vector<double> y{0.878, 0.647, 0.598, 2.05, 1.06, 1.29, 1.06, 3.14, 1.29};
  const WilcoxonResult r = wilcoxon_signed_rank(x, y);
  EXPECT_EQ(r.t_plus, 40.0);
  EXPECT_EQ(r.t_minus, 5.0);
  EXPECT_EQ(r.statistic, 5.0);
  EXPECT_NEAR(r.p_value, 0.0390625, 1e-12);
}

TEST(Wilcoxon, FiveSameSignDifferencesGiveTwoOverThirtyTwo) {
  const std::vector<double> a{1.0, 2.0, 3.0, 4.0, 5.0}, b{0.5, 1.0, 2.0, 3.5, 3.0};
  const WilcoxonResult r = wilcoxon_signed_rank(a, b);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 2.0 / 32.0);
}

TEST(Wilcoxon, EqualSamplesGivePOneWithWarning) {
  const std::vector<double> a{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  const WilcoxonResult r = wilcoxon_signed_rank(a, a);
  EXPECT_EQ(r.p_value, 1.0);
  EXPECT_EQ(r.n, 0u);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Wilcoxon, RejectsShortAndMismatchedInputs) {
  EXPECT_THROW(wilcoxon_signed_rank(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}), InputError);
  // Four non-zero differences after dropping the zeros.
  EXPECT_THROW(wilcoxon_signed_rank(std::vector<double>{1, 2, 3, 4, 5, 6}, std::vector<double>{0, 0, 0, 0, 5, 6}),
               InputError);
  EXPECT_THROW(wilcoxon_signed_rank(std::vector<double>{1, 2, 3, 4, std::nan("")}, std::vector<double>{0, 0, 0, 0, 0}),
               InputError);
}

TEST(Wilcoxon, MatchesEnumerationOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> small(-3, 3);
  for (int t = 0; t < 80; ++t) {
    const std::size_t n = 5 + static_cast<std::size_t>(t % 12);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (t % 2 == 0) {
        a[i] = u(rng) + 0.2;
        b[i] = u(rng);
      } else {
        a[i] = small(rng) + 10.0;  // integer differences with ties and zeros
        b[i] = 10.0;
      }
    }
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < n; ++i) nonzero += a[i] != b[i];
    if (nonzero < 5) continue;
    const WilcoxonResult r = wilcoxon_signed_rank(a, b);
    const oracle::Wilcoxon o = oracle::wilcoxon_bruteforce(a, b);
    EXPECT_NEAR(r.statistic, o.statistic, 1e-12) << "trial " << t;
    EXPECT_NEAR(r.p_value, o.p_value, 1e-12) << "trial " << t;
  }
}

TEST(Wilcoxon, MonotoneTransformOfDifferencesKeepsStatistic) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    std::vector<double> d(12), zero(12, 0.0), cubed(12);
    for (double& v : d) v = u(rng);
    for (std::size_t i = 0; i < d.size(); ++i) cubed[i] = d[i] * d[i] * d[i] * 5.0;
    const WilcoxonResult a = wilcoxon_signed_rank(d, zero), b = wilcoxon_signed_rank(cubed, zero);
    EXPECT_EQ(a.statistic, b.statistic);
    EXPECT_EQ(a.p_value, b.p_value);
  }
}

TEST(Wilcoxon, SwappingSamplesSwapsTails) {
  std::mt19937_64 rng(9);
  const oracle::Vec a = oracle::random_vector(rng, 9), b = oracle::random_vector(rng, 9);
  const WilcoxonResult x = wilcoxon_signed_rank(a, b), y = wilcoxon_signed_rank(b, a);
  EXPECT_EQ(x.t_plus, y.t_minus);
  EXPECT_EQ(x.p_value, y.p_value);
}

TEST(Wilcoxon, ExactAndNormalAgreeAtTenPairs) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> a(10), b(10, 0.0);
    for (double& v : a) v = u(rng) + 0.3;
    const double exact = wilcoxon_signed_rank(a, b, PValueMethod::kExact).p_value;
    const double approx = wilcoxon_signed_rank(a, b, PValueMethod::kAsymptotic).p_value;
    worst = std::max(worst, std::abs(exact - approx));
  }
  EXPECT_LT(worst, 0.02);
}

TEST(Wilcoxon, AutoSwitchesToNormalAboveTwentyFive) {
  std::mt19937_64 rng(11);
  EXPECT_EQ(wilcoxon_signed_rank(oracle::random_vector(rng, 25), std::vector<double>(25, 0.0)).method, "exact");
  const WilcoxonResult big = wilcoxon_signed_rank(oracle::random_vector(rng, 40), std::vector<double>(40, 0.0));
  EXPECT_EQ(big.method, "normal");
  EXPECT_GT(big.p_value, 0.0);
  EXPECT_LE(big.p_value, 1.0);
}

}  // namespace
}  // namespace vafx
