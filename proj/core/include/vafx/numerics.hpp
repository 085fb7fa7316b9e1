// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace vafx {

using Vector = std::vector<double>;
using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

// Dense row-major matrix. Dimensions are fixed at construction.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// y = m * v. Throws DimensionError when m.cols() != v.size().
Vector matvec(const Matrix& m, std::span<const double> v);

// Raw row-major kernel used on hot paths: out[r] = bias[r] + sum_c w[r*cols+c]*x[c].
// Pass an empty bias for none.
void affine(std::span<const double> w, std::span<const double> bias,
            std::span<const double> x, std::span<double> out);

enum class Activation { kSigmoid, kTanh, kSoftsign };

// Throws NumericError on non-finite input.
double activation(Activation kind, double x);

inline double sigmoid(double x) {
  if (x >= 0.0) {
    const double z = std::exp(-x);
    return 1.0 / (1.0 + z);
  }
  const double z = std::exp(x);
  return z / (1.0 + z);
}

inline double softsign(double x) { return x / (1.0 + std::abs(x)); }
inline double softsign_derivative(double x) {
  const double d = 1.0 + std::abs(x);
  return 1.0 / (d * d);
}
inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

enum class WindowKind { kHann, kRectangular };

const char* to_string(WindowKind kind);

// Periodic Hann (0.5 - 0.5 cos(2 pi n / N)) or all-ones.
Vector make_window(WindowKind kind, std::size_t size);

struct Spectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;  // window_size / 2 + 1
  std::size_t window_size = 0;
  std::size_t hop = 0;
  WindowKind window = WindowKind::kHann;
  std::vector<double> magnitudes;  // frames x bins, row-major

  double at(std::size_t frame, std::size_t bin) const {
    return magnitudes[frame * bins + bin];
  }
  std::span<const double> frame(std::size_t f) const {
    return {magnitudes.data() + f * bins, bins};
  }
};

// Number of full frames: floor((len - window) / hop) + 1, or 0 if too short.
std::size_t frame_count(std::size_t length, std::size_t window_size, std::size_t hop);

// Magnitude STFT without padding or centering. Throws InputError when the
// signal is shorter than one window or hop == 0.
Spectrogram stft_mag(std::span<const double> signal, std::size_t window_size,
                     std::size_t hop, WindowKind window = WindowKind::kHann);

// In-place iterative radix-2 FFT; size must be a power of two.
void fft_radix2(std::span<Complex> data);
void fft_radix2(std::span<std::complex<long double>> data);

// |DFT| bins 0..N/2 of a real frame. Uses the radix-2 FFT for powers of two
// and a direct transform otherwise.
void real_dft_magnitude(std::span<const double> frame, std::span<double> out);

bool is_power_of_two(std::size_t n);

}  // namespace vafx
