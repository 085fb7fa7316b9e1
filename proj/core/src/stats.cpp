// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "vafx/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "vafx/error.hpp"

namespace vafx {

std::vector<double> ScoreMatrix::column(std::size_t c) const {
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = at(r, c);
  return out;
}

void ScoreMatrix::validate() const {
  if (rows < 2 || cols < 2) throw InputError("score matrix needs at least 2 rows and 2 columns");
  if (values.size() != rows * cols) throw InputError("score matrix storage does not match its shape");
  for (double v : values) {
    if (!std::isfinite(v)) throw InputError("score matrix contains a non-finite entry");
  }
}

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace {

// Exact upper tail P(sum_j R_j^2 >= observed) under independent uniform
// permutations of each block's ranks. Ranks are doubled to stay integral;
// states are sorted rank-sum vectors, which suffices because every block's
// permutation distribution is invariant under relabeling columns.
double friedman_exact_tail(const std::vector<std::vector<int>>& doubled_rows, std::int64_t observed) {
  using State = std::vector<int>;
  const std::size_t k = doubled_rows.front().size();
  std::map<State, double> dist{{State(k, 0), 1.0}};
  for (const auto& row : doubled_rows) {
    std::vector<int> perm = row;
    std::sort(perm.begin(), perm.end());
    std::vector<std::vector<int>> perms;
    do {
      perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const double w = 1.0 / static_cast<double>(perms.size());
    std::map<State, double> next;
    for (const auto& [state, prob] : dist) {
      for (const auto& p : perms) {
        State s(k);
        for (std::size_t j = 0; j < k; ++j) s[j] = state[j] + p[j];
        std::sort(s.begin(), s.end());
        next[s] += prob * w;
      }
    }
    dist = std::move(next);
  }
  double tail = 0.0;
  for (const auto& [state, prob] : dist) {
    std::int64_t ss = 0;
    for (int v : state) ss += static_cast<std::int64_t>(v) * v;
    if (ss >= observed) tail += prob;
  }
  return std::min(1.0, tail);
}

double chi_square_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

}  // namespace

FriedmanResult friedman_test(const ScoreMatrix& m, PValueMethod method) {
  m.validate();
  const std::size_t n = m.rows;
  const std::size_t k = m.cols;
  const double dn = static_cast<double>(n);
  const double dk = static_cast<double>(k);

  std::vector<std::vector<int>> doubled(n, std::vector<int>(k));
  std::vector<double> rank_sum(k, 0.0);
  double sum_r2 = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<double> row(m.values.begin() + static_cast<std::ptrdiff_t>(r * k),
                            m.values.begin() + static_cast<std::ptrdiff_t>((r + 1) * k));
    const std::vector<double> ranks = midranks(row);
    for (std::size_t c = 0; c < k; ++c) {
      rank_sum[c] += ranks[c];
      sum_r2 += ranks[c] * ranks[c];
      doubled[r][c] = static_cast<int>(std::lround(2.0 * ranks[c]));
    }
  }

  FriedmanResult res;
  for (double s : rank_sum) res.mean_ranks.push_back(s / dn);
  const double denom = sum_r2 - dn * dk * (dk + 1.0) * (dk + 1.0) / 4.0;
  const bool exact = method == PValueMethod::kExact || (method == PValueMethod::kAuto && n <= 8 && k <= 5);
  res.method = exact ? "exact" : "chi-square";
  if (denom <= 1e-12 * sum_r2) {
    res.statistic = 0.0;
    res.p_value = 1.0;
    res.warnings.push_back("every block is fully tied; the test is degenerate");
    return res;
  }
  double dev = 0.0;
  for (double s : rank_sum) {
    const double d = s - dn * (dk + 1.0) / 2.0;
    dev += d * d;
  }
  res.statistic = (dk - 1.0) * dev / denom;

  if (exact) {
    std::int64_t observed = 0;
    for (std::size_t c = 0; c < k; ++c) {
      std::int64_t s = 0;
      for (std::size_t r = 0; r < n; ++r) s += doubled[r][c];
      observed += s * s;
    }
    res.p_value = friedman_exact_tail(doubled, observed);
  } else {
    res.p_value = chi_square_sf(res.statistic, dk - 1.0);
  }
  return res;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    PValueMethod method) {
  if (a.size() != b.size()) throw InputError("wilcoxon: samples have different lengths");
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double v = a[i] - b[i];
    if (!std::isfinite(v)) throw InputError("wilcoxon: non-finite difference");
    if (v != 0.0) d.push_back(v);
  }
  WilcoxonResult res;
  res.n = d.size();
  if (d.empty()) {
    res.method = "exact";
    res.p_value = 1.0;
    res.warnings.push_back("all differences are zero");
    return res;
  }
  if (d.size() < 5) {
    throw InputError("wilcoxon: need at least 5 non-zero differences, have " + std::to_string(d.size()));
  }
  std::vector<double> mag(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) mag[i] = std::abs(d[i]);
  const std::vector<double> ranks = midranks(mag);
  for (std::size_t i = 0; i < d.size(); ++i) (d[i] > 0.0 ? res.t_plus : res.t_minus) += ranks[i];
  res.statistic = std::min(res.t_plus, res.t_minus);

  const std::size_t n = d.size();
  const bool exact = method == PValueMethod::kExact || (method == PValueMethod::kAuto && n <= 25);
  res.method = exact ? "exact" : "normal";
  if (exact) {
    // Subset-sum counts over doubled ranks.
    std::vector<int> r2(n);
    int total = 0;
    for (std::size_t i = 0; i < n; ++i) total += r2[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
    std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
    count[0] = 1.0;
    int reach = 0;
    for (int r : r2) {
      for (int s = reach; s >= 0; --s) count[static_cast<std::size_t>(s + r)] += count[static_cast<std::size_t>(s)];
      reach += r;
    }
    const auto limit = static_cast<int>(std::lround(2.0 * res.statistic));
    double tail = 0.0;
    for (int s = 0; s <= limit; ++s) tail += count[static_cast<std::size_t>(s)];
    res.p_value = std::min(1.0, 2.0 * tail / std::ldexp(1.0, static_cast<int>(n)));
  } else {
    const double dn = static_cast<double>(n);
    double tie = 0.0;
    std::vector<double> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i + 1);
      tie += t * t * t - t;
      i = j + 1;
    }
    const double mean = dn * (dn + 1.0) / 4.0;
    const double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0 - tie / 48.0;
    if (var <= 0.0) {
      res.p_value = 1.0;
    } else {
      const double z = std::max(0.0, std::abs(res.statistic - mean) - 0.5) / std::sqrt(var);
      res.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    }
  }
  return res;
}

}  // namespace vafx
