// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Reverse-mode gradients for every architecture. Complex cotangents follow
// G = dL/d(re) + i dL/d(im), so for y = a * x: G_x += conj(a) G_y and
// G_a += conj(x) G_y.

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vafx/error.hpp"
#include "vafx/training.hpp"

namespace vafx {

namespace {

constexpr std::size_t kW = kConditionedWidth;

double* grad(GradientSet& g, const char* name) { return g.at(name).values.data(); }
const double* weight(const Model& m, const char* name) { return m.params().at(name).values.data(); }

void check_params(const Model& m, std::span<const double> p) {
  const std::size_t P = m.config().cond_dim;
  if (P == 0) return;
  if (p.size() != P) {
    throw DimensionError("expected " + std::to_string(P) + " conditioning values, got " +
                         std::to_string(p.size()));
  }
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("conditioning value outside [0, 1]");
  }
}

// Post-recurrent layer, conditioning block and output unit. The head has no
// memory, so each step's backward pass runs right after its forward pass.
class HeadPass {
 public:
  HeadPass(const Model& m, std::span<const double> p, GradientSet& g)
      : m_(m), O_(m.dims().cell_output), P_(m.config().cond_dim), tanh_(m.dims().post_tanh), p_(p) {
    if (P_ > 0) {
      affine(m.conditioning().film.weight, m.conditioning().film.bias, p, film_);
      g_film_w_ = grad(g, "film.W");
      g_film_b_ = grad(g, "film.b");
    }
    g_post_w_ = grad(g, "post.W");
    g_post_b_ = grad(g, "post.b");
    g_glu_w_ = grad(g, "glu.W");
    g_glu_b_ = grad(g, "glu.b");
    g_out_w_ = grad(g, "out.W");
    g_out_b_ = grad(g, "out.b");
  }

  double forward(const double* co) {
    co_ = co;
    const Dense& post = m_.post();
    for (std::size_t r = 0; r < kW; ++r) {
      double z = post.bias[r];
      for (std::size_t k = 0; k < O_; ++k) z += post.weight[r * O_ + k] * co[k];
      o_[r] = tanh_ ? std::tanh(z) : z;
    }
    for (std::size_t k = 0; k < kW; ++k) q_[k] = P_ > 0 ? film_[k] * o_[k] + film_[kW + k] : o_[k];
    const Dense& glu = m_.conditioning().glu;
    for (std::size_t r = 0; r < 2 * kW; ++r) {
      double acc = glu.bias[r];
      for (std::size_t c = 0; c < kW; ++c) acc += glu.weight[r * kW + c] * q_[c];
      gl_[r] = acc;
    }
    const Dense& out = m_.output_layer();
    double y = out.bias[0];
    for (std::size_t k = 0; k < kW; ++k) {
      s_[k] = softsign(gl_[kW + k]);
      oc_[k] = gl_[k] * s_[k];
      y += out.weight[k] * oc_[k];
    }
    return y;
  }

  void backward(double gy, double* g_co) {
    const Dense& out = m_.output_layer();
    g_out_b_[0] += gy;
    double g_gl[2 * kW];
    for (std::size_t k = 0; k < kW; ++k) {
      g_out_w_[k] += gy * oc_[k];
      const double g_oc = gy * out.weight[k];
      g_gl[k] = g_oc * s_[k];
      g_gl[kW + k] = g_oc * gl_[k] * softsign_derivative(gl_[kW + k]);
    }
    const Dense& glu = m_.conditioning().glu;
    double g_q[kW] = {};
    for (std::size_t r = 0; r < 2 * kW; ++r) {
      g_glu_b_[r] += g_gl[r];
      for (std::size_t c = 0; c < kW; ++c) {
        g_glu_w_[r * kW + c] += g_gl[r] * q_[c];
        g_q[c] += glu.weight[r * kW + c] * g_gl[r];
      }
    }
    double g_z[kW];
    for (std::size_t k = 0; k < kW; ++k) {
      double g_o = g_q[k];
      if (P_ > 0) {
        film_acc_[k] += g_q[k] * o_[k];
        film_acc_[kW + k] += g_q[k];
        g_o = g_q[k] * film_[k];
      }
      g_z[k] = tanh_ ? g_o * (1.0 - o_[k] * o_[k]) : g_o;
    }
    const Dense& post = m_.post();
    for (std::size_t k = 0; k < O_; ++k) g_co[k] = 0.0;
    for (std::size_t r = 0; r < kW; ++r) {
      g_post_b_[r] += g_z[r];
      for (std::size_t k = 0; k < O_; ++k) {
        g_post_w_[r * O_ + k] += g_z[r] * co_[k];
        g_co[k] += post.weight[r * O_ + k] * g_z[r];
      }
    }
  }

  void finish() {
    if (P_ == 0) return;
    for (std::size_t r = 0; r < 2 * kW; ++r) {
      g_film_b_[r] += film_acc_[r];
      for (std::size_t j = 0; j < P_; ++j) g_film_w_[r * P_ + j] += film_acc_[r] * p_[j];
    }
  }

 private:
  const Model& m_;
  std::size_t O_;
  std::size_t P_;
  bool tanh_;
  std::span<const double> p_;
  double film_[2 * kW] = {};
  double film_acc_[2 * kW] = {};
  const double* co_ = nullptr;
  double o_[kW] = {}, q_[kW] = {}, gl_[2 * kW] = {}, s_[kW] = {}, oc_[kW] = {};
  double *g_post_w_, *g_post_b_, *g_film_w_ = nullptr, *g_film_b_ = nullptr;
  double *g_glu_w_, *g_glu_b_, *g_out_w_, *g_out_b_;
};

// Sample history followed by the segment: window n, tap j is buf[63 + n - j].
struct Signal {
  Vector buf;
  double tap(std::size_t n, std::size_t j) const { return buf[kHistorySize + n - j]; }
};

// ---------------------------------------------------------------------------

class LstmPass {
 public:
  LstmPass(const Model& m, const RecurrentState& st, std::size_t L, bool ed)
      : m_(m), cell_(m.lstm()), H_(cell_.hidden), I_(cell_.inputs), ed_(ed), L_(L) {
    const auto& s = std::get<LstmState>(st.cell);
    h_ = s.h;
    c_ = s.c;
    stride_ = 12 * H_;
    tape_.resize(L * stride_);
  }

  // Slots: mh, mc, f, i, o, g, c, tanh(c), then for ED the candidates and
  // the previous state.
  const double* forward(std::size_t n, const double* u, const Signal& sig) {
    double* t = tape_.data() + n * stride_;
    double* mh = t;
    double* mc = t + H_;
    double* act = t + 2 * H_;  // f, i, o, g
    double* c = t + 6 * H_;
    double* tc = t + 7 * H_;
    if (ed_) {
      double* ch = t + 8 * H_;
      double* cc = t + 9 * H_;
      encode(n, sig, ch, cc);
      std::copy(h_.begin(), h_.end(), t + 10 * H_);
      std::copy(c_.begin(), c_.end(), t + 11 * H_);
      for (std::size_t k = 0; k < H_; ++k) {
        mh[k] = sigmoid(h_[k]) * ch[k];
        mc[k] = sigmoid(c_[k]) * cc[k];
      }
    } else {
      std::copy(h_.begin(), h_.end(), mh);
      std::copy(c_.begin(), c_.end(), mc);
    }
    for (std::size_t row = 0; row < 4 * H_; ++row) {
      double z = cell_.bias[row];
      const double* wr = cell_.recurrent.data() + row * H_;
      for (std::size_t j = 0; j < H_; ++j) z += wr[j] * mh[j];
      const double* ur = cell_.input.data() + row * I_;
      for (std::size_t j = 0; j < I_; ++j) z += ur[j] * u[j];
      act[row] = row < 3 * H_ ? sigmoid(z) : std::tanh(z);
    }
    for (std::size_t k = 0; k < H_; ++k) {
      c[k] = act[k] * mc[k] + act[H_ + k] * act[3 * H_ + k];
      tc[k] = std::tanh(c[k]);
      c_[k] = c[k];
      h_[k] = act[2 * H_ + k] * tc[k];
    }
    return h_.data();
  }

  void backward(const Vector& g_co, const Vector& U, Vector& g_u, const Signal& sig,
                GradientSet& g) {
    double* gW = grad(g, "lstm.W");
    double* gU = grad(g, "lstm.U");
    double* gb = grad(g, "lstm.b");
    Vector dh_rec(H_, 0.0), dc_rec(H_, 0.0), dz(4 * H_), dmh(H_), dmc(H_), dch(H_), dcc(H_);
    for (std::size_t n = L_; n-- > 0;) {
      const double* t = tape_.data() + n * stride_;
      const double* mh = t;
      const double* mc = t + H_;
      const double* f = t + 2 * H_;
      const double* i = t + 3 * H_;
      const double* o = t + 4 * H_;
      const double* gg = t + 5 * H_;
      const double* tc = t + 7 * H_;
      const double* u = U.data() + n * I_;
      for (std::size_t k = 0; k < H_; ++k) {
        const double dh = g_co[n * H_ + k] + dh_rec[k];
        const double dc = dc_rec[k] + dh * o[k] * (1.0 - tc[k] * tc[k]);
        dz[k] = dc * mc[k] * f[k] * (1.0 - f[k]);
        dz[H_ + k] = dc * gg[k] * i[k] * (1.0 - i[k]);
        dz[2 * H_ + k] = dh * tc[k] * o[k] * (1.0 - o[k]);
        dz[3 * H_ + k] = dc * i[k] * (1.0 - gg[k] * gg[k]);
        dmc[k] = dc * f[k];
        dmh[k] = 0.0;
      }
      double* gu = g_u.data() + n * I_;
      for (std::size_t row = 0; row < 4 * H_; ++row) {
        const double d = dz[row];
        gb[row] += d;
        const double* wr = cell_.recurrent.data() + row * H_;
        double* gwr = gW + row * H_;
        for (std::size_t j = 0; j < H_; ++j) {
          gwr[j] += d * mh[j];
          dmh[j] += wr[j] * d;
        }
        const double* ur = cell_.input.data() + row * I_;
        double* gur = gU + row * I_;
        for (std::size_t j = 0; j < I_; ++j) {
          gur[j] += d * u[j];
          gu[j] += ur[j] * d;
        }
      }
      if (ed_) {
        const double* ch = t + 8 * H_;
        const double* cc = t + 9 * H_;
        for (std::size_t k = 0; k < H_; ++k) {
          const double sh = sigmoid(t[10 * H_ + k]);
          const double sc = sigmoid(t[11 * H_ + k]);
          dch[k] = dmh[k] * sh;
          dcc[k] = dmc[k] * sc;
          dh_rec[k] = dmh[k] * ch[k] * sh * (1.0 - sh);
          dc_rec[k] = dmc[k] * cc[k] * sc * (1.0 - sc);
        }
        encode_backward(n, sig, dch, dcc, g);
      } else {
        dh_rec = dmh;
        dc_rec = dmc;
      }
    }
  }

  void store(RecurrentState& st) const { st.cell = LstmState{h_, c_}; }

 private:
  // Encoder input x_e[k] = window[32 + k].
  void encode(std::size_t n, const Signal& sig, double* ch, double* cc) const {
    const EdEncoder& e = m_.ed_encoder();
    const std::size_t half = kWindowSize / 2;
    const std::size_t pos = half / e.kernel;
    for (std::size_t c = 0; c < e.channels; ++c) {
      for (std::size_t j = 0; j < pos; ++j) {
        double ah = e.h_bias[c];
        double ac = e.c_bias[c];
        for (std::size_t t = 0; t < e.kernel; ++t) {
          const double x = sig.tap(n, half + j * e.kernel + t);
          ah += e.h_kernel[c * e.kernel + t] * x;
          ac += e.c_kernel[c * e.kernel + t] * x;
        }
        ch[c * pos + j] = ah;
        cc[c * pos + j] = ac;
      }
    }
  }

  void encode_backward(std::size_t n, const Signal& sig, const Vector& dch, const Vector& dcc,
                       GradientSet& g) const {
    const EdEncoder& e = m_.ed_encoder();
    double* ghw = grad(g, "enc_h.W");
    double* ghb = grad(g, "enc_h.b");
    double* gcw = grad(g, "enc_c.W");
    double* gcb = grad(g, "enc_c.b");
    const std::size_t half = kWindowSize / 2;
    const std::size_t pos = half / e.kernel;
    for (std::size_t c = 0; c < e.channels; ++c) {
      for (std::size_t j = 0; j < pos; ++j) {
        const double dh = dch[c * pos + j];
        const double dc = dcc[c * pos + j];
        ghb[c] += dh;
        gcb[c] += dc;
        for (std::size_t t = 0; t < e.kernel; ++t) {
          const double x = sig.tap(n, half + j * e.kernel + t);
          ghw[c * e.kernel + t] += dh * x;
          gcw[c * e.kernel + t] += dc * x;
        }
      }
    }
  }

  const Model& m_;
  const LstmCell& cell_;
  std::size_t H_, I_;
  bool ed_;
  std::size_t L_;
  std::size_t stride_;
  Vector tape_;
  Vector h_, c_;
};

// ---------------------------------------------------------------------------
// LRU and S4D share the complex diagonal recursion h = a * h_prev + B u.

class DiagonalPass {
 public:
  DiagonalPass(const Model& m, const RecurrentState& st, std::size_t L) : m_(m), L_(L) {
    if (m.architecture() == Architecture::kLru) {
      const LruCell& c = m.lru();
      N_ = c.states;
      I_ = c.inputs;
      O_ = c.outputs;
      a_ = c.lambda;
      B_.resize(N_ * I_);
      for (std::size_t k = 0; k < N_; ++k) {
        for (std::size_t j = 0; j < I_; ++j) B_[k * I_ + j] = c.gamma[k] * c.input[k * I_ + j];
      }
      bias_ = c.bias;
      C_ = c.readout;
      h0_ = std::get<LruState>(st.cell).h;
    } else {
      const S4dCell& c = m.s4d();
      N_ = c.states;
      I_ = c.inputs;
      O_ = c.outputs;
      a_ = c.a_bar;
      B_ = c.b_bar;
      bias_.assign(N_, Complex(0.0, 0.0));
      C_ = c.c;
      h0_ = std::get<SsmState>(st.cell).h;
    }
    h_.resize(L * N_);
    co_.resize(O_);
  }

  const double* forward(std::size_t n, const double* u, const Signal&) {
    const Complex* hp = n == 0 ? h0_.data() : h_.data() + (n - 1) * N_;
    Complex* h = h_.data() + n * N_;
    for (std::size_t k = 0; k < N_; ++k) {
      Complex acc = a_[k] * hp[k] + bias_[k];
      for (std::size_t j = 0; j < I_; ++j) acc += B_[k * I_ + j] * u[j];
      h[k] = acc;
    }
    const bool lru = m_.architecture() == Architecture::kLru;
    for (std::size_t r = 0; r < O_; ++r) {
      double acc = lru ? m_.lru().readout_bias[r] : m_.s4d().d[r] * u[r];
      for (std::size_t k = 0; k < N_; ++k) {
        const Complex c = C_[r * N_ + k];
        acc += c.real() * h[k].real() - c.imag() * h[k].imag();
      }
      co_[r] = acc;
    }
    return co_.data();
  }

  void backward(const Vector& g_co, const Vector& U, Vector& g_u, const Signal&, GradientSet& g) {
    const bool lru = m_.architecture() == Architecture::kLru;
    double* gCre = grad(g, lru ? "lru.W.re" : "s4d.C.re");
    double* gCim = grad(g, lru ? "lru.W.im" : "s4d.C.im");
    double* gD = grad(g, lru ? "lru.bo" : "s4d.D");
    ComplexVector G(N_), G_rec(N_), G_a(N_), G_B(N_ * I_), G_bias(N_);
    for (std::size_t n = L_; n-- > 0;) {
      const Complex* h = h_.data() + n * N_;
      const Complex* hp = n == 0 ? h0_.data() : h_.data() + (n - 1) * N_;
      const double* go = g_co.data() + n * O_;
      const double* u = U.data() + n * I_;
      double* gu = g_u.data() + n * I_;
      for (std::size_t k = 0; k < N_; ++k) G[k] = G_rec[k];
      for (std::size_t r = 0; r < O_; ++r) {
        if (lru) {
          gD[r] += go[r];
        } else {
          gD[r] += go[r] * u[r];
          gu[r] += m_.s4d().d[r] * go[r];
        }
        for (std::size_t k = 0; k < N_; ++k) {
          const Complex c = C_[r * N_ + k];
          gCre[r * N_ + k] += go[r] * h[k].real();
          gCim[r * N_ + k] -= go[r] * h[k].imag();
          G[k] += go[r] * std::conj(c);
        }
      }
      for (std::size_t k = 0; k < N_; ++k) {
        G_a[k] += std::conj(hp[k]) * G[k];
        G_bias[k] += G[k];
        for (std::size_t j = 0; j < I_; ++j) {
          G_B[k * I_ + j] += G[k] * u[j];
          const Complex b = B_[k * I_ + j];
          gu[j] += b.real() * G[k].real() + b.imag() * G[k].imag();
        }
        G_rec[k] = std::conj(a_[k]) * G[k];
      }
    }
    if (lru) {
      finish_lru(G_a, G_B, G_bias, g);
    } else {
      finish_s4d(G_a, G_B, g);
    }
  }

  void store(RecurrentState& st) const {
    ComplexVector last(h_.end() - static_cast<std::ptrdiff_t>(N_), h_.end());
    if (L_ == 0) last = h0_;
    if (m_.architecture() == Architecture::kLru) {
      st.cell = LruState{std::move(last)};
    } else {
      st.cell = SsmState{std::move(last)};
    }
  }

 private:
  void finish_lru(const ComplexVector& G_lambda, const ComplexVector& G_Bn,
                  const ComplexVector& G_bias, GradientSet& g) const {
    const LruCell& c = m_.lru();
    const double* nu = weight(m_, "lru.nu");
    double* gnu = grad(g, "lru.nu");
    double* gth = grad(g, "lru.theta");
    double* gUre = grad(g, "lru.U.re");
    double* gUim = grad(g, "lru.U.im");
    double* gbre = grad(g, "lru.b.re");
    double* gbim = grad(g, "lru.b.im");
    for (std::size_t k = 0; k < N_; ++k) {
      double g_gamma = 0.0;
      for (std::size_t j = 0; j < I_; ++j) {
        const Complex Gb = G_Bn[k * I_ + j];
        const Complex Gu = c.gamma[k] * Gb;
        gUre[k * I_ + j] += Gu.real();
        gUim[k * I_ + j] += Gu.imag();
        const Complex u = c.input[k * I_ + j];
        g_gamma += u.real() * Gb.real() + u.imag() * Gb.imag();
      }
      gbre[k] += G_bias[k].real();
      gbim[k] += G_bias[k].imag();
      // log(lambda) = -exp(nu) + i theta; gamma = sqrt(1 - exp(-2 exp(nu))).
      const Complex G_log = std::conj(c.lambda[k]) * G_lambda[k];
      const double en = std::exp(nu[k]);
      const double r2 = std::norm(c.lambda[k]);
      gnu[k] += -G_log.real() * en + g_gamma * en * r2 / c.gamma[k];
      gth[k] += G_log.imag();
    }
  }

  void finish_s4d(const ComplexVector& G_abar, const ComplexVector& G_Bbar, GradientSet& g) const {
    const double* are = weight(m_, "s4d.A_log_re");
    const double* aim = weight(m_, "s4d.A_im");
    const double* ldt = weight(m_, "s4d.log_dt");
    const double* Bre = weight(m_, "s4d.B.re");
    const double* Bim = weight(m_, "s4d.B.im");
    double* gare = grad(g, "s4d.A_log_re");
    double* gaim = grad(g, "s4d.A_im");
    double* gldt = grad(g, "s4d.log_dt");
    double* gBre = grad(g, "s4d.B.re");
    double* gBim = grad(g, "s4d.B.im");
    for (std::size_t k = 0; k < N_; ++k) {
      const Complex A(-std::exp(are[k]), aim[k]);
      const double dt = std::exp(ldt[k]);
      const Complex abar = a_[k];
      const Complex s = (abar - 1.0) / A;
      Complex G_s(0.0, 0.0);
      for (std::size_t j = 0; j < I_; ++j) {
        const Complex B(Bre[k * I_ + j], Bim[k * I_ + j]);
        const Complex Gbb = G_Bbar[k * I_ + j];
        G_s += std::conj(B) * Gbb;
        const Complex GB = std::conj(s) * Gbb;
        gBre[k * I_ + j] += GB.real();
        gBim[k * I_ + j] += GB.imag();
      }
      const Complex G_ab = G_abar[k] + std::conj(1.0 / A) * G_s;
      const Complex G_A = std::conj(-(abar - 1.0) / (A * A)) * G_s + std::conj(dt * abar) * G_ab;
      const double g_dt = (std::conj(A * abar) * G_ab).real();
      gldt[k] += dt * g_dt;
      gare[k] += G_A.real() * A.real();
      gaim[k] += G_A.imag();
    }
  }

  const Model& m_;
  std::size_t L_;
  std::size_t N_ = 0, I_ = 0, O_ = 0;
  ComplexVector a_, B_, bias_, C_, h0_, h_;
  Vector co_;
};

// ---------------------------------------------------------------------------

class S6Pass {
 public:
  S6Pass(const Model& m, const RecurrentState& st, std::size_t L)
      : c_(m.s6()), N_(c_.states), I_(c_.inputs), O_(c_.outputs), L_(L) {
    h0_ = std::get<S6State>(st.cell).h;
    stride_ = 6 * N_ + 2;
    tape_.resize(L * stride_);
    co_.resize(O_);
    z_.resize(N_);
  }

  // Slots: b, c, v, a_bar, beta, h, then delta and the softplus argument.
  const double* forward(std::size_t n, const double* u, const Signal&) {
    double* t = tape_.data() + n * stride_;
    const double* hp = n == 0 ? h0_.data() : tape_.data() + (n - 1) * stride_ + 5 * N_;
    double pre = c_.dt_bias;
    for (std::size_t j = 0; j < I_; ++j) pre += c_.dt_weight[j] * u[j];
    const double delta = softplus(pre);
    t[6 * N_] = delta;
    t[6 * N_ + 1] = pre;
    double* z = z_.data();
    for (std::size_t k = 0; k < N_; ++k) {
      double b = c_.b_bias[k], cc = c_.c_bias[k], v = 0.0;
      for (std::size_t j = 0; j < I_; ++j) {
        b += c_.b_weight[k * I_ + j] * u[j];
        cc += c_.c_weight[k * I_ + j] * u[j];
        v += c_.in_mix[k * I_ + j] * u[j];
      }
      const double ab = std::exp(delta * c_.a[k]);
      const double beta = (ab - 1.0) / c_.a[k];
      const double h = ab * hp[k] + beta * b * v;
      t[k] = b;
      t[N_ + k] = cc;
      t[2 * N_ + k] = v;
      t[3 * N_ + k] = ab;
      t[4 * N_ + k] = beta;
      t[5 * N_ + k] = h;
      z[k] = cc * h;
    }
    for (std::size_t r = 0; r < O_; ++r) {
      double acc = c_.d[r] * u[r];
      for (std::size_t k = 0; k < N_; ++k) acc += c_.out_mix[r * N_ + k] * z[k];
      co_[r] = acc;
    }
    return co_.data();
  }

  void backward(const Vector& g_co, const Vector& U, Vector& g_u, const Signal&, GradientSet& g) {
    double* gAlog = grad(g, "s6.A_log");
    double* gdtw = grad(g, "s6.dt.w");
    double* gdtb = grad(g, "s6.dt.b");
    double* gBW = grad(g, "s6.Bmap.W");
    double* gBb = grad(g, "s6.Bmap.b");
    double* gCW = grad(g, "s6.Cmap.W");
    double* gCb = grad(g, "s6.Cmap.b");
    double* gMin = grad(g, "s6.Min");
    double* gMout = grad(g, "s6.Mout");
    double* gD = grad(g, "s6.D");
    Vector G_rec(N_, 0.0), g_a(N_, 0.0), g_z(N_);
    for (std::size_t n = L_; n-- > 0;) {
      const double* t = tape_.data() + n * stride_;
      const double* hp = n == 0 ? h0_.data() : tape_.data() + (n - 1) * stride_ + 5 * N_;
      const double* go = g_co.data() + n * O_;
      const double* u = U.data() + n * I_;
      double* gu = g_u.data() + n * I_;
      const double delta = t[6 * N_];
      const double pre = t[6 * N_ + 1];
      std::fill(g_z.begin(), g_z.end(), 0.0);
      for (std::size_t r = 0; r < O_; ++r) {
        gD[r] += go[r] * u[r];
        gu[r] += c_.d[r] * go[r];
        for (std::size_t k = 0; k < N_; ++k) {
          gMout[r * N_ + k] += go[r] * t[N_ + k] * t[5 * N_ + k];
          g_z[k] += c_.out_mix[r * N_ + k] * go[r];
        }
      }
      double g_delta = 0.0;
      for (std::size_t k = 0; k < N_; ++k) {
        const double b = t[k], cc = t[N_ + k], v = t[2 * N_ + k];
        const double ab = t[3 * N_ + k], beta = t[4 * N_ + k], h = t[5 * N_ + k];
        const double a = c_.a[k];
        const double Gh = g_z[k] * cc + G_rec[k];
        const double g_c = g_z[k] * h;
        const double g_ab = Gh * (hp[k] + b * v / a);
        g_a[k] += Gh * b * v * (-(ab - 1.0) / (a * a)) + g_ab * ab * delta;
        g_delta += g_ab * ab * a;
        const double g_b = Gh * beta * v;
        const double g_v = Gh * beta * b;
        G_rec[k] = Gh * ab;
        gBb[k] += g_b;
        gCb[k] += g_c;
        for (std::size_t j = 0; j < I_; ++j) {
          const std::size_t idx = k * I_ + j;
          gBW[idx] += g_b * u[j];
          gCW[idx] += g_c * u[j];
          gMin[idx] += g_v * u[j];
          gu[j] += c_.b_weight[idx] * g_b + c_.c_weight[idx] * g_c + c_.in_mix[idx] * g_v;
        }
      }
      const double g_pre = g_delta * sigmoid(pre);
      gdtb[0] += g_pre;
      for (std::size_t j = 0; j < I_; ++j) {
        gdtw[j] += g_pre * u[j];
        gu[j] += g_pre * c_.dt_weight[j];
      }
    }
    for (std::size_t k = 0; k < N_; ++k) gAlog[k] += g_a[k] * c_.a[k];
  }

  void store(RecurrentState& st) const {
    Vector last = h0_;
    if (L_ > 0) {
      const double* h = tape_.data() + (L_ - 1) * stride_ + 5 * N_;
      last.assign(h, h + N_);
    }
    st.cell = S6State{std::move(last)};
  }

 private:
  const S6Cell& c_;
  std::size_t N_, I_, O_, L_;
  std::size_t stride_;
  Vector tape_, h0_, co_, z_;
};

template <typename Pass>
double run_segment(const Model& m, Pass& pass, RecurrentState& state, std::span<const double> input,
                   std::span<const double> target, std::span<const double> p, double w,
                   GradientSet& g) {
  const std::size_t L = input.size();
  const Dense& proj = m.projection();
  const std::size_t I = proj.rows;
  const std::size_t cols = proj.cols;
  const std::size_t O = m.dims().cell_output;

  Signal sig;
  sig.buf.reserve(kHistorySize + L);
  sig.buf.assign(state.history.begin(), state.history.end());
  sig.buf.insert(sig.buf.end(), input.begin(), input.end());

  Vector U(L * I);
  for (std::size_t n = 0; n < L; ++n) {
    for (std::size_t i = 0; i < I; ++i) {
      double acc = proj.bias[i];
      const double* wr = proj.weight.data() + i * cols;
      for (std::size_t j = 0; j < cols; ++j) acc += wr[j] * sig.tap(n, j);
      U[n * I + i] = acc;
    }
  }

  HeadPass head(m, p, g);
  Vector g_co(L * O);
  double sse = 0.0;
  const double scale = 2.0 * w / static_cast<double>(L);
  for (std::size_t n = 0; n < L; ++n) {
    const double* co = pass.forward(n, U.data() + n * I, sig);
    const double y = head.forward(co);
    const double e = y - target[n];
    sse += e * e;
    head.backward(scale * e, g_co.data() + n * O);
  }
  head.finish();
  const double loss = sse / static_cast<double>(L);
  if (!std::isfinite(loss)) throw NumericError("segment loss is not finite");

  Vector g_u(L * I, 0.0);
  pass.backward(g_co, U, g_u, sig, g);

  const bool ed = m.architecture() == Architecture::kEd;
  double* gW = grad(g, ed ? "dec.W" : "proj.W");
  double* gb = grad(g, ed ? "dec.b" : "proj.b");
  for (std::size_t n = 0; n < L; ++n) {
    for (std::size_t i = 0; i < I; ++i) {
      const double d = g_u[n * I + i];
      gb[i] += d;
      double* gwr = gW + i * cols;
      for (std::size_t j = 0; j < cols; ++j) gwr[j] += d * sig.tap(n, j);
    }
  }

  for (const Tensor& t : g) {
    for (double v : t.values) {
      if (!std::isfinite(v)) throw NumericError("gradient of " + t.name + " is not finite");
    }
  }

  pass.store(state);
  if (L > 0) {
    std::copy(sig.buf.end() - static_cast<std::ptrdiff_t>(kHistorySize), sig.buf.end(),
              state.history.begin());
  }
  return loss;
}

}  // namespace

double accumulate_segment_gradient(const Model& model, RecurrentState& state,
                                   std::span<const double> input, std::span<const double> target,
                                   std::span<const double> p, double w, GradientSet& grads) {
  if (!state.initialized) throw StateError("recurrent state is not initialized");
  if (state.architecture != model.architecture()) throw StateError("state/model architecture mismatch");
  if (input.size() != target.size()) throw DimensionError("input and target lengths differ");
  if (input.empty()) throw InputError("empty training segment");
  if (!grads.same_layout(model.params())) throw DimensionError("gradient layout mismatch");
  check_params(model, p);

  const std::size_t L = input.size();
  switch (model.architecture()) {
    case Architecture::kLstm:
    case Architecture::kEd: {
      LstmPass pass(model, state, L, model.architecture() == Architecture::kEd);
      return run_segment(model, pass, state, input, target, p, w, grads);
    }
    case Architecture::kLru:
    case Architecture::kS4d: {
      DiagonalPass pass(model, state, L);
      return run_segment(model, pass, state, input, target, p, w, grads);
    }
    case Architecture::kS6: {
      S6Pass pass(model, state, L);
      return run_segment(model, pass, state, input, target, p, w, grads);
    }
  }
  return 0.0;
}

SegmentGradient backward_segment(const Model& model, const RecurrentState& state_in,
                                 std::span<const double> input, std::span<const double> target,
                                 std::span<const double> p) {
  SegmentGradient out;
  out.grads = model.params().zeros_like();
  out.state = state_in;
  out.loss = accumulate_segment_gradient(model, out.state, input, target, p, 1.0, out.grads);
  return out;
}

AuditResult finite_difference_audit(const Model& model, const RecurrentState& state_in,
                                    std::span<const double> input, std::span<const double> target,
                                    std::span<const double> p, double eps, double floor) {
  const SegmentGradient analytic = backward_segment(model, state_in, input, target, p);
  Model probe = model;
  auto loss_at = [&]() {
    probe.refresh();
    RecurrentState s = state_in;
    const Vector y = probe.forward_segment(s, input, p);
    return loss_mse(target, y);
  };

  AuditResult res;
  for (std::size_t ti = 0; ti < probe.params().size(); ++ti) {
    auto& values = probe.mutable_params()[ti].values;
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double w0 = values[k];
      values[k] = w0 + eps;
      const double lp = loss_at();
      values[k] = w0 - eps;
      const double lm = loss_at();
      values[k] = w0;
      const double num = (lp - lm) / (2.0 * eps);
      const double ana = analytic.grads[ti].values[k];
      const double denom = std::max({std::abs(ana), std::abs(num), floor});
      const double rel = std::abs(ana - num) / denom;
      ++res.checked;
      if (rel > res.max_rel_error || res.worst_tensor.empty()) {
        if (rel >= res.max_rel_error) {
          res.max_rel_error = rel;
          res.worst_tensor = probe.params()[ti].name;
          res.worst_index = k;
          res.analytic = ana;
          res.numeric = num;
        }
      }
    }
  }
  probe.refresh();
  return res;
}

}  // namespace vafx
