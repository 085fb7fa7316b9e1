// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace vafx {

// Blocks (e.g. split compositions) in rows, treatments (models) in columns.
struct ScoreMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;

  ScoreMatrix() = default;
  ScoreMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::vector<double> column(std::size_t c) const;

  // Throws InputError unless rows >= 2, cols >= 2 and every entry is finite.
  void validate() const;
};

enum class PValueMethod { kAuto, kExact, kAsymptotic };

// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> midranks(std::span<const double> values);

struct FriedmanResult {
  double statistic = 0.0;  // tie-corrected chi-square statistic
  double p_value = 1.0;
  std::string method;      // "exact" or "chi-square"
  std::vector<double> mean_ranks;
  std::vector<std::string> warnings;
};

// Auto uses the exact permutation distribution for rows <= 8 and cols <= 5
// and the chi-square approximation (cols - 1 degrees of freedom) otherwise.
FriedmanResult friedman_test(const ScoreMatrix& m, PValueMethod method = PValueMethod::kAuto);

struct WilcoxonResult {
  double statistic = 0.0;  // min(t_plus, t_minus)
  double t_plus = 0.0;
  double t_minus = 0.0;
  std::size_t n = 0;       // non-zero differences
  double p_value = 1.0;    // two-sided
  std::string method;      // "exact" or "normal"
  std::vector<std::string> warnings;
};

// Paired two-sided test on a - b. Zero differences are dropped and tied
// magnitudes share midranks. Auto is exact up to 25 non-zero differences,
// normal approximation with continuity correction above. Throws InputError
// on unequal lengths or when 1 to 4 non-zero differences remain.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    PValueMethod method = PValueMethod::kAuto);

}  // namespace vafx
