// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <span>
#include <utility>

#include "vafx/numerics.hpp"

namespace vafx {

// Every architecture sees the 64 most recent input samples, newest first:
// window[0] = x[n], window[63] = x[n-63].
inline constexpr std::size_t kWindowSize = 64;
inline constexpr std::size_t kHistorySize = kWindowSize - 1;

// Fully connected map: out = weight * x + bias, weight is rows x cols.
struct Dense {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vector weight;
  Vector bias;

  Dense() = default;
  Dense(std::size_t r, std::size_t c) : rows(r), cols(c), weight(r * c, 0.0), bias(r, 0.0) {}

  Vector apply(std::span<const double> x) const;
  void apply_into(std::span<const double> x, std::span<double> out) const;
};

using Projection = Dense;

// u = W_l x + b_l.
Vector project_input(const Projection& p, std::span<const double> window);

// ---------------------------------------------------------------------------
// LSTM. Gate rows are stacked [forget, input, output, candidate].

struct LstmCell {
  std::size_t hidden = 0;
  std::size_t inputs = 0;
  Vector recurrent;  // 4H x H
  Vector input;      // 4H x I
  Vector bias;       // 4H

  LstmCell() = default;
  LstmCell(std::size_t h, std::size_t i)
      : hidden(h), inputs(i), recurrent(4 * h * h, 0.0), input(4 * h * i, 0.0), bias(4 * h, 0.0) {}
};

struct LstmState {
  Vector h;
  Vector c;
};

// One LSTM update. The layer output is the returned state's h.
// Throws NumericError when the new state is not finite.
LstmState lstm_step(const LstmCell& cell, const LstmState& prev, std::span<const double> u);

// ---------------------------------------------------------------------------
// Encoder-decoder state sharing. The older half of the window feeds two
// non-overlapping strided 1-D convolutions (stride == kernel) whose flattened
// outputs (channel-major) are candidate h and c vectors.

struct EdEncoder {
  std::size_t channels = 0;
  std::size_t kernel = 0;
  Vector h_kernel;  // channels x kernel
  Vector h_bias;    // channels
  Vector c_kernel;
  Vector c_bias;

  EdEncoder() = default;
  EdEncoder(std::size_t ch, std::size_t k)
      : channels(ch), kernel(k), h_kernel(ch * k, 0.0), h_bias(ch, 0.0),
        c_kernel(ch * k, 0.0), c_bias(ch, 0.0) {}

  std::size_t positions(std::size_t input_len) const { return input_len / kernel; }
};

struct EdCandidates {
  Vector h;
  Vector c;
};

// x_e holds x[n-32] .. x[n-63].
EdCandidates ed_encode(const EdEncoder& enc, std::span<const double> x_e);

// New [h, c] = sigmoid([h_prev, c_prev]) * [cand_h, cand_c].
LstmState ed_state_merge(const LstmState& prev, std::span<const double> cand_h,
                         std::span<const double> cand_c);

// ---------------------------------------------------------------------------
// Linear recurrent unit with exponentially parameterized complex diagonal
// recurrence: lambda_k = exp(-exp(nu_k) + i theta_k).

ComplexVector lru_eigenvalues(std::span<const double> nu, std::span<const double> theta);

// gamma_k = sqrt(1 - |lambda_k|^2).
Vector lru_normalization(const ComplexVector& lambda);

struct LruCell {
  std::size_t states = 0;
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  ComplexVector lambda;          // N
  Vector gamma;                  // N
  ComplexVector input;           // N x I
  ComplexVector bias;            // N
  ComplexVector readout;         // O x N
  Vector readout_bias;           // O

  // Throws StabilityError unless every |lambda_k| < 1.
  static LruCell from_eigenvalues(ComplexVector lambda, ComplexVector input, ComplexVector bias,
                                  ComplexVector readout, Vector readout_bias,
                                  std::size_t inputs, std::size_t outputs);
};

struct LruState {
  ComplexVector h;
};

struct LruStep {
  LruState state;
  Vector output;
};

// h = lambda * h_prev + gamma * (U u) + b;  o = Re(W h) + b_o.
LruStep lru_step(const LruCell& cell, const LruState& prev, std::span<const double> u);

// ---------------------------------------------------------------------------
// Diagonal state-space layer (S4D).

struct S4dDiscrete {
  ComplexVector a_bar;  // N
  ComplexVector b_bar;  // N x I
};

// Zero-order hold: a_bar = exp(delta a), b_bar = (a_bar - 1) / a * b.
// Throws StabilityError when Re(a_k) >= 0 and InputError when delta_k <= 0.
S4dDiscrete s4d_discretize(const ComplexVector& a, const ComplexVector& b,
                           std::span<const double> delta, std::size_t inputs);

struct S4dCell {
  std::size_t states = 0;
  std::size_t inputs = 0;
  std::size_t outputs = 0;  // equals inputs (feedthrough D is elementwise)
  ComplexVector a_bar;      // N
  ComplexVector b_bar;      // N x I
  ComplexVector c;          // O x N
  Vector d;                 // O
};

struct SsmState {
  ComplexVector h;
};

struct SsmStep {
  SsmState state;
  Vector output;
};

// h = a_bar * h_prev + b_bar u;  o = Re(C h) + D * u.
SsmStep s4d_step(const S4dCell& cell, const SsmState& prev, std::span<const double> u);

// ---------------------------------------------------------------------------
// Selective state-space layer (S6). The state is real; the step size, the
// per-state input gains b_n and readout gains c_n are computed from u:
//   delta = softplus(w_dt . u + b_dt)
//   a_bar = exp(delta a),  beta = (a_bar - 1) / a
//   b_n = W_B u + b_B,  c_n = W_C u + b_C,  v = M_in u
//   h = a_bar * h_prev + beta * b_n * v
//   o = M_out (c_n * h) + D * u
// With a frozen input this is an S4D layer with B = diag(b_n) M_in and
// C = M_out diag(c_n).

struct S6Cell {
  std::size_t states = 0;
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  Vector a;          // N, strictly negative
  Vector dt_weight;  // I
  double dt_bias = 0.0;
  Vector b_weight;   // N x I
  Vector b_bias;     // N
  Vector c_weight;   // N x I
  Vector c_bias;     // N
  Vector in_mix;     // N x I
  Vector out_mix;    // O x N
  Vector d;          // O
};

struct S6State {
  Vector h;
};

struct S6Step {
  S6State state;
  Vector output;
};

S6Step s6_step(const S6Cell& cell, const S6State& prev, std::span<const double> u);

}  // namespace vafx
