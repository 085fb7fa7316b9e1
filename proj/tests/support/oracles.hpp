// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Slow, independently written reference implementations used as test oracles.
// Nothing here calls into the library's numeric kernels.

#pragma once

#include <complex>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "vafx/cells.hpp"
#include "vafx/model.hpp"

namespace oracle {

using Vec = std::vector<double>;
using CVec = std::vector<std::complex<double>>;

double relative_error(double a, double b, double floor = 1e-300);
double max_relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-300);

Vec random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0);

// --- cells ---
Vec dense(const vafx::Dense& d, std::span<const double> x);
void lstm_step(const vafx::LstmCell& cell, Vec& h, Vec& c, std::span<const double> u);
void ed_encode(const vafx::EdEncoder& enc, std::span<const double> x_e, Vec& h, Vec& c);
Vec lru_step(const vafx::LruCell& cell, CVec& h, std::span<const double> u);
Vec s4d_step(const vafx::S4dCell& cell, CVec& h, std::span<const double> u);
Vec s6_step(const vafx::S6Cell& cell, Vec& h, std::span<const double> u);

// Impulse response of an S4D layer from the kernel form sum_k C Abar^n Bbar.
Vec s4d_kernel(const vafx::S4dCell& cell, std::size_t input, std::size_t output, std::size_t n);

// Model output for successive windows, composed from the oracles above.
struct ModelState {
  Vec h, c;  // LSTM / ED
  CVec z;    // LRU / S4D
  Vec s;     // S6
};
ModelState initial_state(const vafx::Model& m);
double forward(const vafx::Model& m, ModelState& st, std::span<const double> window,
               std::span<const double> p);

// --- spectra and metrics ---
Vec hann(std::size_t n);
// Magnitudes of one frame, frames x bins row-major.
std::vector<Vec> stft_direct(std::span<const double> x, std::size_t win, std::size_t hop);
std::vector<Vec> stft_recursive(std::span<const double> x, std::size_t win, std::size_t hop);
void fft_recursive(CVec& a);

double mse(std::span<const double> y, std::span<const double> p);
double esr(std::span<const double> y, std::span<const double> p);
double nrmse(std::span<const double> y, std::span<const double> p);

enum class Transform { kDirect, kRecursive };
double spectral_flux(std::span<const double> y, std::span<const double> p, Transform t);
double multires_stft(std::span<const double> y, std::span<const double> p, Transform t);

// --- statistics ---
// Friedman statistic and exact p by enumerating every within-block permutation.
struct Friedman {
  double statistic;
  double p_value;
};
Friedman friedman_bruteforce(const std::vector<Vec>& rows);
// Wilcoxon min(T+, T-) and exact two-sided p by enumerating all sign vectors.
struct Wilcoxon {
  double statistic;
  double p_value;
};
Wilcoxon wilcoxon_bruteforce(std::span<const double> a, std::span<const double> b);

}  // namespace oracle
