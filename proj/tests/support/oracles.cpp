// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "oracles.hpp"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace oracle {

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double softplus(double x) { return x > 30.0 ? x : std::log(1.0 + std::exp(x)); }

}  // namespace

double relative_error(double a, double b, double floor) {
  const double d = std::abs(a - b);
  if (d == 0.0) return 0.0;
  return d / std::max({std::abs(a), std::abs(b), floor});
}

double max_relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, relative_error(a[i], b[i], floor));
  return worst;
}

Vec random_vector(std::mt19937_64& rng, std::size_t n, double scale) {
  std::uniform_real_distribution<double> d(-scale, scale);
  Vec v(n);
  for (double& x : v) x = d(rng);
  return v;
}

Vec dense(const vafx::Dense& d, std::span<const double> x) {
  Vec out(d.rows);
  for (std::size_t r = 0; r < d.rows; ++r) {
    double acc = d.bias[r];
    for (std::size_t c = 0; c < d.cols; ++c) acc += d.weight[r * d.cols + c] * x[c];
    out[r] = acc;
  }
  return out;
}

void lstm_step(const vafx::LstmCell& cell, Vec& h, Vec& c, std::span<const double> u) {
  const std::size_t H = cell.hidden;
  const std::size_t I = cell.inputs;
  auto pre = [&](std::size_t gate, std::size_t k) {
    const std::size_t row = gate * H + k;
    double a = cell.bias[row];
    for (std::size_t j = 0; j < I; ++j) a += cell.input[row * I + j] * u[j];
    for (std::size_t j = 0; j < H; ++j) a += cell.recurrent[row * H + j] * h[j];
    return a;
  };
  Vec h_new(H), c_new(H);
  for (std::size_t k = 0; k < H; ++k) {
    const double f = sig(pre(0, k));
    const double i = sig(pre(1, k));
    const double o = sig(pre(2, k));
    const double g = std::tanh(pre(3, k));
    c_new[k] = f * c[k] + i * g;
    h_new[k] = o * std::tanh(c_new[k]);
  }
  h = h_new;
  c = c_new;
}

void ed_encode(const vafx::EdEncoder& enc, std::span<const double> x_e, Vec& h, Vec& c) {
  const std::size_t K = enc.kernel;
  const std::size_t P = x_e.size() / K;
  h.assign(enc.channels * P, 0.0);
  c.assign(enc.channels * P, 0.0);
  for (std::size_t ch = 0; ch < enc.channels; ++ch) {
    for (std::size_t pos = 0; pos < P; ++pos) {
      double ah = enc.h_bias[ch];
      double ac = enc.c_bias[ch];
      for (std::size_t t = 0; t < K; ++t) {
        ah += enc.h_kernel[ch * K + t] * x_e[pos * K + t];
        ac += enc.c_kernel[ch * K + t] * x_e[pos * K + t];
      }
      h[ch * P + pos] = ah;
      c[ch * P + pos] = ac;
    }
  }
}

Vec lru_step(const vafx::LruCell& cell, CVec& h, std::span<const double> u) {
  const std::size_t N = cell.states;
  for (std::size_t k = 0; k < N; ++k) {
    std::complex<double> drive = 0.0;
    for (std::size_t j = 0; j < cell.inputs; ++j) drive += cell.input[k * cell.inputs + j] * u[j];
    h[k] = cell.lambda[k] * h[k] + cell.gamma[k] * drive + cell.bias[k];
  }
  Vec o(cell.outputs);
  for (std::size_t r = 0; r < cell.outputs; ++r) {
    std::complex<double> acc = 0.0;
    for (std::size_t k = 0; k < N; ++k) acc += cell.readout[r * N + k] * h[k];
    o[r] = acc.real() + cell.readout_bias[r];
  }
  return o;
}

Vec s4d_step(const vafx::S4dCell& cell, CVec& h, std::span<const double> u) {
  const std::size_t N = cell.states;
  for (std::size_t k = 0; k < N; ++k) {
    std::complex<double> drive = 0.0;
    for (std::size_t j = 0; j < cell.inputs; ++j) drive += cell.b_bar[k * cell.inputs + j] * u[j];
    h[k] = cell.a_bar[k] * h[k] + drive;
  }
  Vec o(cell.outputs);
  for (std::size_t r = 0; r < cell.outputs; ++r) {
    std::complex<double> acc = 0.0;
    for (std::size_t k = 0; k < N; ++k) acc += cell.c[r * N + k] * h[k];
    o[r] = acc.real() + cell.d[r] * u[r];
  }
  return o;
}

Vec s6_step(const vafx::S6Cell& cell, Vec& h, std::span<const double> u) {
  const std::size_t N = cell.states;
  const std::size_t I = cell.inputs;
  double z = cell.dt_bias;
  for (std::size_t j = 0; j < I; ++j) z += cell.dt_weight[j] * u[j];
  const double delta = softplus(z);
  Vec gated(N);
  for (std::size_t k = 0; k < N; ++k) {
    double bn = cell.b_bias[k], cn = cell.c_bias[k], v = 0.0;
    for (std::size_t j = 0; j < I; ++j) {
      bn += cell.b_weight[k * I + j] * u[j];
      cn += cell.c_weight[k * I + j] * u[j];
      v += cell.in_mix[k * I + j] * u[j];
    }
    const double abar = std::exp(delta * cell.a[k]);
    h[k] = abar * h[k] + (abar - 1.0) / cell.a[k] * bn * v;
    gated[k] = cn * h[k];
  }
  Vec o(cell.outputs);
  for (std::size_t r = 0; r < cell.outputs; ++r) {
    double acc = cell.d[r] * u[r];
    for (std::size_t k = 0; k < N; ++k) acc += cell.out_mix[r * N + k] * gated[k];
    o[r] = acc;
  }
  return o;
}

Vec s4d_kernel(const vafx::S4dCell& cell, std::size_t input, std::size_t output, std::size_t n) {
  Vec out(n);
  for (std::size_t t = 0; t < n; ++t) {
    std::complex<double> acc = 0.0;
    for (std::size_t k = 0; k < cell.states; ++k) {
      acc += cell.c[output * cell.states + k] * std::pow(cell.a_bar[k], static_cast<double>(t)) *
             cell.b_bar[k * cell.inputs + input];
    }
    out[t] = acc.real() + (t == 0 && input == output ? cell.d[output] : 0.0);
  }
  return out;
}

ModelState initial_state(const vafx::Model& m) {
  ModelState st;
  switch (m.architecture()) {
    case vafx::Architecture::kLstm:
    case vafx::Architecture::kEd:
      st.h.assign(m.lstm().hidden, 0.0);
      st.c.assign(m.lstm().hidden, 0.0);
      break;
    case vafx::Architecture::kLru:
      st.z.assign(m.lru().states, 0.0);
      break;
    case vafx::Architecture::kS4d:
      st.z.assign(m.s4d().states, 0.0);
      break;
    case vafx::Architecture::kS6:
      st.s.assign(m.s6().states, 0.0);
      break;
  }
  return st;
}

double forward(const vafx::Model& m, ModelState& st, std::span<const double> window,
               std::span<const double> p) {
  Vec cell_out;
  switch (m.architecture()) {
    case vafx::Architecture::kLstm:
      lstm_step(m.lstm(), st.h, st.c, dense(m.projection(), window));
      cell_out = st.h;
      break;
    case vafx::Architecture::kEd: {
      Vec ch, cc;
      ed_encode(m.ed_encoder(), window.subspan(32), ch, cc);
      for (std::size_t k = 0; k < st.h.size(); ++k) {
        st.h[k] = sig(st.h[k]) * ch[k];
        st.c[k] = sig(st.c[k]) * cc[k];
      }
      lstm_step(m.lstm(), st.h, st.c, dense(m.projection(), window.first(32)));
      cell_out = st.h;
      break;
    }
    case vafx::Architecture::kLru:
      cell_out = lru_step(m.lru(), st.z, dense(m.projection(), window));
      break;
    case vafx::Architecture::kS4d:
      cell_out = s4d_step(m.s4d(), st.z, dense(m.projection(), window));
      break;
    case vafx::Architecture::kS6:
      cell_out = s6_step(m.s6(), st.s, dense(m.projection(), window));
      break;
  }
  Vec o = dense(m.post(), cell_out);
  if (m.dims().post_tanh) {
    for (double& v : o) v = std::tanh(v);
  }
  const vafx::ConditioningBlock& cb = m.conditioning();
  Vec q = o;
  if (cb.cond_dim > 0) {
    const Vec film = dense(cb.film, p);
    for (std::size_t k = 0; k < 4; ++k) q[k] = film[k] * o[k] + film[4 + k];
  }
  const Vec g = dense(cb.glu, q);
  Vec oc(4);
  for (std::size_t k = 0; k < 4; ++k) oc[k] = g[k] * (g[4 + k] / (1.0 + std::abs(g[4 + k])));
  return dense(m.output_layer(), oc)[0];
}

Vec hann(std::size_t n) {
  Vec w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::sin(std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    w[i] = s * s;
  }
  return w;
}

namespace {

using LComplex = std::complex<long double>;
using LVec = std::vector<long double>;

constexpr long double kFloor = 1e-7L;

void fft_recursive_l(std::vector<LComplex>& a) {
  const std::size_t n = a.size();
  if (n == 1) return;
  std::vector<LComplex> even(n / 2), odd(n / 2);
  for (std::size_t i = 0; i < n / 2; ++i) {
    even[i] = a[2 * i];
    odd[i] = a[2 * i + 1];
  }
  fft_recursive_l(even);
  fft_recursive_l(odd);
  const long double pi = std::numbers::pi_v<long double>;
  for (std::size_t k = 0; k < n / 2; ++k) {
    const LComplex t = std::polar(1.0L, -2.0L * pi * static_cast<long double>(k) / static_cast<long double>(n)) * odd[k];
    a[k] = even[k] + t;
    a[k + n / 2] = even[k] - t;
  }
}

// Magnitudes stay in long double: spectral flux divides by near-cancelling
// frame differences, which double-precision magnitudes cannot resolve.
std::vector<LVec> stft_impl(std::span<const double> x, std::size_t win, std::size_t hop, Transform t) {
  const std::size_t bins = win / 2 + 1;
  const long double pi = std::numbers::pi_v<long double>;
  LVec w(win), cos_l(win), sin_l(win);
  for (std::size_t i = 0; i < win; ++i) {
    const long double s = std::sin(pi * static_cast<long double>(i) / static_cast<long double>(win));
    w[i] = s * s;
    cos_l[i] = std::cos(2.0L * pi * static_cast<long double>(i) / static_cast<long double>(win));
    sin_l[i] = std::sin(2.0L * pi * static_cast<long double>(i) / static_cast<long double>(win));
  }
  std::vector<LVec> out;
  for (std::size_t start = 0; start + win <= x.size(); start += hop) {
    LVec frame(win);
    for (std::size_t i = 0; i < win; ++i) frame[i] = static_cast<long double>(x[start + i]) * w[i];
    LVec mag(bins);
    if (t == Transform::kRecursive) {
      std::vector<LComplex> a(frame.begin(), frame.end());
      fft_recursive_l(a);
      for (std::size_t k = 0; k < bins; ++k) mag[k] = std::abs(a[k]);
    } else {
      // Twiddles by table index keep the direct transform exact in k * i mod win.
      for (std::size_t k = 0; k < bins; ++k) {
        long double re = 0.0L, im = 0.0L;
        for (std::size_t i = 0; i < win; ++i) {
          const std::size_t j = (k * i) % win;
          re += frame[i] * cos_l[j];
          im -= frame[i] * sin_l[j];
        }
        mag[k] = std::hypot(re, im);
      }
    }
    out.push_back(std::move(mag));
  }
  return out;
}

std::vector<Vec> to_double(const std::vector<LVec>& s) {
  std::vector<Vec> out;
  for (const LVec& f : s) out.emplace_back(f.begin(), f.end());
  return out;
}

}  // namespace

void fft_recursive(CVec& a) {
  std::vector<LComplex> l(a.begin(), a.end());
  fft_recursive_l(l);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::complex<double>(l[i]);
}

std::vector<Vec> stft_direct(std::span<const double> x, std::size_t win, std::size_t hop) {
  return to_double(stft_impl(x, win, hop, Transform::kDirect));
}

std::vector<Vec> stft_recursive(std::span<const double> x, std::size_t win, std::size_t hop) {
  return to_double(stft_impl(x, win, hop, Transform::kRecursive));
}

double mse(std::span<const double> y, std::span<const double> p) {
  long double acc = 0.0L;
  for (std::size_t n = 0; n < y.size(); ++n) acc += std::pow(static_cast<long double>(y[n]) - p[n], 2);
  return static_cast<double>(acc / static_cast<long double>(y.size()));
}

double esr(std::span<const double> y, std::span<const double> p) {
  long double num = 0.0L, den = 0.0L;
  for (std::size_t n = 0; n < y.size(); ++n) {
    num += std::pow(static_cast<long double>(y[n]) - p[n], 2);
    den += std::pow(static_cast<long double>(y[n]), 2);
  }
  return static_cast<double>(num / den);
}

double nrmse(std::span<const double> y, std::span<const double> p) {
  const long double n = static_cast<long double>(y.size());
  long double num = 0.0L, den = 0.0L;
  for (std::size_t i = 0; i < y.size(); ++i) {
    num += std::pow(static_cast<long double>(y[i]) - p[i], 2);
    den += std::pow(static_cast<long double>(y[i]), 2);
  }
  return static_cast<double>(std::sqrt(num / n) / std::sqrt(den / n));
}

double spectral_flux(std::span<const double> y, std::span<const double> p, Transform t) {
  const auto sy = stft_impl(y, 2048, 512, t);
  const auto sp = stft_impl(p, 2048, 512, t);
  long double total = 0.0L;
  std::size_t count = 0;
  for (std::size_t f = 1; f < sy.size(); ++f) {
    for (std::size_t k = 0; k < sy[f].size(); ++k) {
      const long double flux_y = std::abs(sy[f][k] - sy[f - 1][k]);
      const long double flux_p = std::abs(sp[f][k] - sp[f - 1][k]);
      total += std::abs((flux_y - flux_p) / std::max(flux_y, kFloor));
      ++count;
    }
  }
  return static_cast<double>(total / static_cast<long double>(count));
}

double multires_stft(std::span<const double> y, std::span<const double> p, Transform t) {
  long double total = 0.0L;
  for (std::size_t m : {256u, 512u, 1024u}) {
    const auto sy = stft_impl(y, m, m / 4, t);
    const auto sp = stft_impl(p, m, m / 4, t);
    for (std::size_t f = 0; f < sy.size(); ++f) {
      for (std::size_t k = 0; k < sy[f].size(); ++k) {
        const long double a = std::max(sy[f][k], kFloor);
        const long double b = std::max(sp[f][k], kFloor);
        total += std::abs(sy[f][k] - sp[f][k]) / a + std::abs(std::log(a / b));
      }
    }
  }
  return static_cast<double>(total / static_cast<long double>(y.size()));
}

namespace {

Vec average_ranks(const Vec& v) {
  Vec r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0.0, equal = 0.0;
    for (double w : v) {
      if (w < v[i]) less += 1.0;
      if (w == v[i]) equal += 1.0;
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

double friedman_q(const std::vector<Vec>& ranks) {
  const double n = static_cast<double>(ranks.size());
  const double k = static_cast<double>(ranks[0].size());
  double ss = 0.0, all = 0.0;
  for (std::size_t c = 0; c < ranks[0].size(); ++c) {
    double rc = 0.0;
    for (const Vec& r : ranks) rc += r[c];
    ss += (rc - n * (k + 1.0) / 2.0) * (rc - n * (k + 1.0) / 2.0);
  }
  for (const Vec& r : ranks) {
    for (double v : r) all += v * v;
  }
  return (k - 1.0) * ss / (all - n * k * (k + 1.0) * (k + 1.0) / 4.0);
}

}  // namespace

Friedman friedman_bruteforce(const std::vector<Vec>& rows) {
  std::vector<Vec> ranks;
  for (const Vec& r : rows) ranks.push_back(average_ranks(r));
  const double observed = friedman_q(ranks);
  std::vector<std::vector<Vec>> perms(rows.size());
  for (std::size_t b = 0; b < rows.size(); ++b) {
    Vec r = ranks[b];
    std::sort(r.begin(), r.end());
    do perms[b].push_back(r);
    while (std::next_permutation(r.begin(), r.end()));
  }
  // Odometer over one permutation choice per block, each equally likely.
  std::vector<std::size_t> idx(rows.size(), 0);
  double hit = 0.0, total = 0.0;
  while (true) {
    std::vector<Vec> trial(rows.size());
    double weight = 1.0;
    for (std::size_t b = 0; b < rows.size(); ++b) {
      trial[b] = perms[b][idx[b]];
      weight /= static_cast<double>(perms[b].size());
    }
    if (friedman_q(trial) >= observed - 1e-9) hit += weight;
    total += weight;
    std::size_t b = 0;
    while (b < rows.size() && ++idx[b] == perms[b].size()) idx[b++] = 0;
    if (b == rows.size()) break;
  }
  return {observed, hit / total};
}

Wilcoxon wilcoxon_bruteforce(std::span<const double> a, std::span<const double> b) {
  Vec d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  }
  Vec mag(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) mag[i] = std::abs(d[i]);
  const Vec r = average_ranks(mag);
  double tp = 0.0, tm = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) (d[i] > 0 ? tp : tm) += r[i];
  const double t = std::min(tp, tm);
  const std::size_t n = d.size();
  if (n > 25) throw std::invalid_argument("wilcoxon_bruteforce: n too large");
  double below = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1U) s += r[i];
    }
    if (s <= t + 1e-9) below += 1.0;
  }
  return {t, std::min(1.0, 2.0 * below / std::ldexp(1.0, static_cast<int>(n)))};
}

}  // namespace oracle
