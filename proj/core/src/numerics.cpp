// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "vafx/numerics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "vafx/error.hpp"

namespace vafx {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimension: return "dimension error";
    case ErrorKind::kNumeric: return "numeric error";
    case ErrorKind::kInput: return "input error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kState: return "state error";
    case ErrorKind::kStability: return "stability error";
    case ErrorKind::kCompatibility: return "compatibility error";
    case ErrorKind::kUsage: return "usage error";
  }
  return "error";
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    std::ostringstream os;
    os << "matrix data has " << data_.size() << " values, expected " << rows << "x" << cols;
    throw DimensionError(os.str());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector matvec(const Matrix& m, std::span<const double> v) {
  if (m.cols() != v.size()) {
    std::ostringstream os;
    os << "matvec: matrix is " << m.rows() << "x" << m.cols() << " but vector has "
       << v.size() << " entries";
    throw DimensionError(os.str());
  }
  Vector out(m.rows(), 0.0);
  affine(m.data(), {}, v, out);
  return out;
}

void affine(std::span<const double> w, std::span<const double> bias,
            std::span<const double> x, std::span<double> out) {
  const std::size_t cols = x.size();
  for (std::size_t r = 0; r < out.size(); ++r) {
    const double* wr = w.data() + r * cols;
    double acc = bias.empty() ? 0.0 : bias[r];
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    out[r] = acc;
  }
}

double activation(Activation kind, double x) {
  if (!std::isfinite(x)) throw NumericError("activation: non-finite input");
  switch (kind) {
    case Activation::kSigmoid: return sigmoid(x);
    case Activation::kTanh: return std::tanh(x);
    case Activation::kSoftsign: return softsign(x);
  }
  return x;
}

const char* to_string(WindowKind kind) {
  return kind == WindowKind::kHann ? "hann" : "rectangular";
}

Vector make_window(WindowKind kind, std::size_t size) {
  Vector w(size, 1.0);
  if (kind == WindowKind::kHann) {
    for (std::size_t n = 0; n < size; ++n) {
      w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                  static_cast<double>(size));
    }
  }
  return w;
}

std::size_t frame_count(std::size_t length, std::size_t window_size, std::size_t hop) {
  if (hop == 0 || window_size == 0 || length < window_size) return 0;
  return (length - window_size) / hop + 1;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace {

template <typename T>
void fft_radix2_impl(std::span<std::complex<T>> data) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) throw InputError("fft_radix2: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const T ang = T(-2) * std::numbers::pi_v<T> / static_cast<T>(len);
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      // Twiddles from the angle directly, avoiding drift of a running product.
      const std::complex<T> w(std::cos(ang * static_cast<T>(k)), std::sin(ang * static_cast<T>(k)));
      for (std::size_t i = k; i < n; i += len) {
        const std::complex<T> u = data[i];
        const std::complex<T> v = data[i + half] * w;
        data[i] = u + v;
        data[i + half] = u - v;
      }
    }
  }
}

}  // namespace

void fft_radix2(std::span<Complex> data) { fft_radix2_impl(data); }

void fft_radix2(std::span<std::complex<long double>> data) { fft_radix2_impl(data); }

void real_dft_magnitude(std::span<const double> frame, std::span<double> out) {
  const std::size_t n = frame.size();
  const std::size_t bins = n / 2 + 1;
  if (out.size() != bins) throw DimensionError("real_dft_magnitude: output size mismatch");
  if (is_power_of_two(n)) {
    std::vector<Complex> buf(frame.begin(), frame.end());
    fft_radix2(buf);
    for (std::size_t k = 0; k < bins; ++k) out[k] = std::abs(buf[k]);
    return;
  }
  for (std::size_t k = 0; k < bins; ++k) {
    Complex acc(0.0, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) /
                         static_cast<double>(n);
      acc += frame[t] * Complex(std::cos(ang), std::sin(ang));
    }
    out[k] = std::abs(acc);
  }
}

Spectrogram stft_mag(std::span<const double> signal, std::size_t window_size,
                     std::size_t hop, WindowKind window) {
  if (window_size == 0 || hop == 0) throw InputError("stft_mag: window and hop must be > 0");
  if (signal.size() < window_size) {
    std::ostringstream os;
    os << "stft_mag: signal of " << signal.size() << " samples is shorter than one window ("
       << window_size << ")";
    throw InputError(os.str());
  }
  Spectrogram spec;
  spec.window_size = window_size;
  spec.hop = hop;
  spec.window = window;
  spec.bins = window_size / 2 + 1;
  spec.frames = frame_count(signal.size(), window_size, hop);
  spec.magnitudes.assign(spec.frames * spec.bins, 0.0);

  const Vector w = make_window(window, window_size);
  const bool pow2 = is_power_of_two(window_size);
  std::vector<Complex> buf(window_size);
  Vector frame(window_size);
  for (std::size_t f = 0; f < spec.frames; ++f) {
    const double* src = signal.data() + f * hop;
    std::span<double> dst(spec.magnitudes.data() + f * spec.bins, spec.bins);
    if (pow2) {
      for (std::size_t t = 0; t < window_size; ++t) buf[t] = Complex(src[t] * w[t], 0.0);
      fft_radix2(buf);
      for (std::size_t k = 0; k < spec.bins; ++k) dst[k] = std::abs(buf[k]);
    } else {
      for (std::size_t t = 0; t < window_size; ++t) frame[t] = src[t] * w[t];
      real_dft_magnitude(frame, dst);
    }
  }
  return spec;
}

}  // namespace vafx
