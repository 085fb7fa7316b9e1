// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "vafx/cells.hpp"

#include <cmath>
#include <sstream>

#include "vafx/error.hpp"

namespace vafx {

namespace {

void require_size(std::span<const double> v, std::size_t n, const char* what) {
  if (v.size() != n) {
    std::ostringstream os;
    os << what << ": expected " << n << " values, got " << v.size();
    throw DimensionError(os.str());
  }
}

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

Vector Dense::apply(std::span<const double> x) const {
  Vector out(rows, 0.0);
  apply_into(x, out);
  return out;
}

void Dense::apply_into(std::span<const double> x, std::span<double> out) const {
  require_size(x, cols, "dense input");
  require_size(out, rows, "dense output");
  affine(weight, bias, x, out);
}

Vector project_input(const Projection& p, std::span<const double> window) {
  return p.apply(window);
}

LstmState lstm_step(const LstmCell& cell, const LstmState& prev, std::span<const double> u) {
  const std::size_t H = cell.hidden;
  const std::size_t I = cell.inputs;
  require_size(u, I, "lstm input");
  require_size(prev.h, H, "lstm h");
  require_size(prev.c, H, "lstm c");

  LstmState next{Vector(H), Vector(H)};
  for (std::size_t k = 0; k < H; ++k) {
    double z[4];
    for (std::size_t g = 0; g < 4; ++g) {
      const std::size_t row = g * H + k;
      double acc = cell.bias[row];
      const double* wr = cell.recurrent.data() + row * H;
      for (std::size_t j = 0; j < H; ++j) acc += wr[j] * prev.h[j];
      const double* ur = cell.input.data() + row * I;
      for (std::size_t j = 0; j < I; ++j) acc += ur[j] * u[j];
      z[g] = acc;
    }
    const double f = sigmoid(z[0]);
    const double i = sigmoid(z[1]);
    const double o = sigmoid(z[2]);
    const double g = std::tanh(z[3]);
    next.c[k] = f * prev.c[k] + i * g;
    next.h[k] = o * std::tanh(next.c[k]);
  }
  if (!all_finite(next.c) || !all_finite(next.h)) {
    throw NumericError("lstm_step: non-finite state (check weights and previous state)");
  }
  return next;
}

EdCandidates ed_encode(const EdEncoder& enc, std::span<const double> x_e) {
  if (enc.kernel == 0 || x_e.size() % enc.kernel != 0) {
    throw DimensionError("ed_encode: encoder input length must be a multiple of the kernel");
  }
  const std::size_t positions = enc.positions(x_e.size());
  EdCandidates out{Vector(enc.channels * positions), Vector(enc.channels * positions)};
  for (std::size_t ch = 0; ch < enc.channels; ++ch) {
    const double* kh = enc.h_kernel.data() + ch * enc.kernel;
    const double* kc = enc.c_kernel.data() + ch * enc.kernel;
    for (std::size_t p = 0; p < positions; ++p) {
      const double* x = x_e.data() + p * enc.kernel;
      double ah = enc.h_bias[ch];
      double ac = enc.c_bias[ch];
      for (std::size_t t = 0; t < enc.kernel; ++t) {
        ah += kh[t] * x[t];
        ac += kc[t] * x[t];
      }
      out.h[ch * positions + p] = ah;
      out.c[ch * positions + p] = ac;
    }
  }
  return out;
}

LstmState ed_state_merge(const LstmState& prev, std::span<const double> cand_h,
                         std::span<const double> cand_c) {
  const std::size_t H = prev.h.size();
  require_size(cand_h, H, "ed candidate h");
  require_size(cand_c, H, "ed candidate c");
  require_size(prev.c, H, "ed previous c");
  LstmState out{Vector(H), Vector(H)};
  for (std::size_t k = 0; k < H; ++k) {
    out.h[k] = sigmoid(prev.h[k]) * cand_h[k];
    out.c[k] = sigmoid(prev.c[k]) * cand_c[k];
  }
  return out;
}

ComplexVector lru_eigenvalues(std::span<const double> nu, std::span<const double> theta) {
  require_size(theta, nu.size(), "lru theta");
  ComplexVector lambda(nu.size());
  for (std::size_t k = 0; k < nu.size(); ++k) {
    lambda[k] = std::exp(Complex(-std::exp(nu[k]), theta[k]));
  }
  return lambda;
}

Vector lru_normalization(const ComplexVector& lambda) {
  Vector gamma(lambda.size());
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    gamma[k] = std::sqrt(std::max(0.0, 1.0 - std::norm(lambda[k])));
  }
  return gamma;
}

LruCell LruCell::from_eigenvalues(ComplexVector lambda, ComplexVector input, ComplexVector bias,
                                  ComplexVector readout, Vector readout_bias,
                                  std::size_t inputs, std::size_t outputs) {
  const std::size_t n = lambda.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (!(std::abs(lambda[k]) < 1.0)) {
      std::ostringstream os;
      os << "lru: |lambda_" << k << "| = " << std::abs(lambda[k]) << " is not inside the unit circle";
      throw StabilityError(os.str());
    }
  }
  if (input.size() != n * inputs || bias.size() != n || readout.size() != outputs * n ||
      readout_bias.size() != outputs) {
    throw DimensionError("lru: parameter shapes do not match the state size");
  }
  LruCell cell;
  cell.states = n;
  cell.inputs = inputs;
  cell.outputs = outputs;
  cell.gamma = lru_normalization(lambda);
  cell.lambda = std::move(lambda);
  cell.input = std::move(input);
  cell.bias = std::move(bias);
  cell.readout = std::move(readout);
  cell.readout_bias = std::move(readout_bias);
  return cell;
}

LruStep lru_step(const LruCell& cell, const LruState& prev, std::span<const double> u) {
  const std::size_t N = cell.states;
  require_size(u, cell.inputs, "lru input");
  if (prev.h.size() != N) throw DimensionError("lru: state size mismatch");

  LruStep out{LruState{ComplexVector(N)}, Vector(cell.outputs)};
  for (std::size_t k = 0; k < N; ++k) {
    Complex drive(0.0, 0.0);
    const Complex* ur = cell.input.data() + k * cell.inputs;
    for (std::size_t j = 0; j < cell.inputs; ++j) drive += ur[j] * u[j];
    out.state.h[k] = cell.lambda[k] * prev.h[k] + cell.gamma[k] * drive + cell.bias[k];
  }
  for (std::size_t r = 0; r < cell.outputs; ++r) {
    double acc = cell.readout_bias[r];
    const Complex* wr = cell.readout.data() + r * N;
    for (std::size_t k = 0; k < N; ++k) {
      acc += wr[k].real() * out.state.h[k].real() - wr[k].imag() * out.state.h[k].imag();
    }
    out.output[r] = acc;
  }
  return out;
}

S4dDiscrete s4d_discretize(const ComplexVector& a, const ComplexVector& b,
                           std::span<const double> delta, std::size_t inputs) {
  const std::size_t N = a.size();
  require_size(delta, N, "s4d delta");
  if (b.size() != N * inputs) throw DimensionError("s4d: B must be N x inputs");
  S4dDiscrete out{ComplexVector(N), ComplexVector(N * inputs)};
  for (std::size_t k = 0; k < N; ++k) {
    if (!(a[k].real() < 0.0)) {
      std::ostringstream os;
      os << "s4d: Re(A_" << k << ") = " << a[k].real() << " must be negative";
      throw StabilityError(os.str());
    }
    if (!(delta[k] > 0.0)) throw InputError("s4d: step size must be positive");
    out.a_bar[k] = std::exp(delta[k] * a[k]);
    const Complex scale = (out.a_bar[k] - 1.0) / a[k];
    for (std::size_t j = 0; j < inputs; ++j) out.b_bar[k * inputs + j] = scale * b[k * inputs + j];
  }
  return out;
}

SsmStep s4d_step(const S4dCell& cell, const SsmState& prev, std::span<const double> u) {
  const std::size_t N = cell.states;
  require_size(u, cell.inputs, "s4d input");
  if (prev.h.size() != N) throw DimensionError("s4d: state size mismatch");

  SsmStep out{SsmState{ComplexVector(N)}, Vector(cell.outputs)};
  for (std::size_t k = 0; k < N; ++k) {
    Complex drive(0.0, 0.0);
    const Complex* br = cell.b_bar.data() + k * cell.inputs;
    for (std::size_t j = 0; j < cell.inputs; ++j) drive += br[j] * u[j];
    out.state.h[k] = cell.a_bar[k] * prev.h[k] + drive;
  }
  for (std::size_t r = 0; r < cell.outputs; ++r) {
    double acc = 0.0;
    const Complex* cr = cell.c.data() + r * N;
    for (std::size_t k = 0; k < N; ++k) {
      acc += cr[k].real() * out.state.h[k].real() - cr[k].imag() * out.state.h[k].imag();
    }
    out.output[r] = acc + cell.d[r] * u[r];
  }
  return out;
}

S6Step s6_step(const S6Cell& cell, const S6State& prev, std::span<const double> u) {
  const std::size_t N = cell.states;
  const std::size_t I = cell.inputs;
  require_size(u, I, "s6 input");
  require_size(prev.h, N, "s6 state");

  double dt_pre = cell.dt_bias;
  for (std::size_t j = 0; j < I; ++j) dt_pre += cell.dt_weight[j] * u[j];
  const double delta = softplus(dt_pre);

  S6Step out{S6State{Vector(N)}, Vector(cell.outputs)};
  Vector z(N);
  for (std::size_t k = 0; k < N; ++k) {
    double bk = cell.b_bias[k];
    double ck = cell.c_bias[k];
    double vk = 0.0;
    const std::size_t row = k * I;
    for (std::size_t j = 0; j < I; ++j) {
      bk += cell.b_weight[row + j] * u[j];
      ck += cell.c_weight[row + j] * u[j];
      vk += cell.in_mix[row + j] * u[j];
    }
    const double a_bar = std::exp(delta * cell.a[k]);
    const double beta = (a_bar - 1.0) / cell.a[k];
    out.state.h[k] = a_bar * prev.h[k] + beta * bk * vk;
    z[k] = ck * out.state.h[k];
  }
  for (std::size_t r = 0; r < cell.outputs; ++r) {
    double acc = 0.0;
    const double* mr = cell.out_mix.data() + r * N;
    for (std::size_t k = 0; k < N; ++k) acc += mr[k] * z[k];
    out.output[r] = acc + cell.d[r] * u[r];
  }
  return out;
}

}  // namespace vafx
