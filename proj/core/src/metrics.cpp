// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "vafx/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "vafx/error.hpp"

namespace vafx {

namespace {

void check_pair(std::span<const double> y, std::span<const double> y_hat, const char* what) {
  if (y.size() != y_hat.size()) {
    throw InputError(std::string(what) + ": target and prediction lengths differ");
  }
  if (y.empty()) throw InputError(std::string(what) + ": empty signal");
}

double energy(std::span<const double> y) {
  double acc = 0.0;
  for (double v : y) acc += v * v;
  return acc;
}

double error_energy(std::span<const double> y, std::span<const double> y_hat) {
  double acc = 0.0;
  for (std::size_t n = 0; n < y.size(); ++n) {
    const double e = y[n] - y_hat[n];
    acc += e * e;
  }
  return acc;
}

std::size_t hop_for_overlap(std::size_t window, double overlap) {
  if (!(overlap >= 0.0 && overlap < 1.0)) throw InputError("overlap must lie in [0, 1)");
  const auto hop = static_cast<std::size_t>(std::llround(static_cast<double>(window) * (1.0 - overlap)));
  return std::max<std::size_t>(hop, 1);
}

std::vector<long double> stft_mag_extended(std::span<const double> x, std::size_t win,
                                           std::size_t hop) {
  const std::size_t bins = win / 2 + 1;
  const std::size_t frames = frame_count(x.size(), win, hop);
  std::vector<long double> w(win);
  for (std::size_t n = 0; n < win; ++n) {
    w[n] = 0.5L - 0.5L * std::cos(2.0L * std::numbers::pi_v<long double> * static_cast<long double>(n) /
                                  static_cast<long double>(win));
  }
  std::vector<long double> out(frames * bins);
  std::vector<std::complex<long double>> buf(win);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t t = 0; t < win; ++t) buf[t] = static_cast<long double>(x[f * hop + t]) * w[t];
    fft_radix2(buf);
    for (std::size_t k = 0; k < bins; ++k) out[f * bins + k] = std::abs(buf[k]);
  }
  return out;
}

}  // namespace

double mse(std::span<const double> y, std::span<const double> y_hat) {
  check_pair(y, y_hat, "mse");
  return error_energy(y, y_hat) / static_cast<double>(y.size());
}

double esr(std::span<const double> y, std::span<const double> y_hat) {
  check_pair(y, y_hat, "esr");
  const double e = energy(y);
  if (!(e > 0.0)) throw InputError("esr: target has zero energy, ratio undefined");
  return error_energy(y, y_hat) / e;
}

double nrmse(std::span<const double> y, std::span<const double> y_hat) {
  check_pair(y, y_hat, "nrmse");
  const double e = energy(y);
  if (!(e > 0.0)) throw InputError("nrmse: target has zero energy, ratio undefined");
  const double n = static_cast<double>(y.size());
  return std::sqrt(error_energy(y, y_hat) / n) / std::sqrt(e / n);
}

double spectral_flux_metric(std::span<const double> y, std::span<const double> y_hat) {
  check_pair(y, y_hat, "spectral flux");
  if (y.size() < 2 * kFluxWindow) {
    throw InputError("spectral flux: signals need at least " + std::to_string(2 * kFluxWindow) +
                     " samples");
  }
  // Flux divides by frame-to-frame magnitude changes that can nearly cancel, so
  // magnitudes stay in extended precision until the ratio is formed.
  const auto sy = stft_mag_extended(y, kFluxWindow, kFluxHop);
  const auto sp = stft_mag_extended(y_hat, kFluxWindow, kFluxHop);
  const std::size_t bins = kFluxWindow / 2 + 1;
  const std::size_t frames = sy.size() / bins;
  long double acc = 0.0L;
  for (std::size_t f = 1; f < frames; ++f) {
    for (std::size_t k = 0; k < bins; ++k) {
      const long double ft = std::abs(sy[f * bins + k] - sy[(f - 1) * bins + k]);
      const long double fp = std::abs(sp[f * bins + k] - sp[(f - 1) * bins + k]);
      acc += std::abs(ft - fp) / std::max(ft, static_cast<long double>(kMagnitudeFloor));
    }
  }
  return static_cast<double>(acc / static_cast<long double>((frames - 1) * bins));
}

double multires_stft_metric(std::span<const double> y, std::span<const double> y_hat,
                            std::span<const std::size_t> resolutions) {
  check_pair(y, y_hat, "multi-resolution STFT");
  std::size_t longest = 0;
  for (std::size_t m : resolutions) longest = std::max(longest, m);
  if (y.size() < longest) {
    throw InputError("multi-resolution STFT: signals need at least " + std::to_string(longest) +
                     " samples");
  }
  // Near-empty target bins scale the linear term by 1/|Y|, so the FFT's
  // absolute rounding error would be amplified there in double precision.
  const long double floor = kMagnitudeFloor;
  long double lin = 0.0L;
  long double log_term = 0.0L;
  for (std::size_t m : resolutions) {
    const auto sy = stft_mag_extended(y, m, m / 4);
    const auto sp = stft_mag_extended(y_hat, m, m / 4);
    for (std::size_t i = 0; i < sy.size(); ++i) {
      const long double a = std::max(sy[i], floor);
      const long double b = std::max(sp[i], floor);
      lin += std::abs(sy[i] - sp[i]) / a;
      log_term += std::abs(std::log(a) - std::log(b));
    }
  }
  return static_cast<double>((lin + log_term) / static_cast<long double>(y.size()));
}

Vector rms_energy_track(std::span<const double> y, std::size_t window, double overlap) {
  if (window == 0 || y.size() < window) {
    throw InputError("rms track: signal shorter than one " + std::to_string(window) + "-sample window");
  }
  const std::size_t hop = hop_for_overlap(window, overlap);
  const std::size_t frames = frame_count(y.size(), window, hop);
  Vector out(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t n = 0; n < window; ++n) {
      const double v = y[f * hop + n];
      acc += v * v;
    }
    out[f] = std::sqrt(acc / static_cast<double>(window));
  }
  return out;
}

Spectrogram spectrogram_report(std::span<const double> y, std::size_t window, double overlap) {
  return stft_mag(y, window, hop_for_overlap(window, overlap));
}

MetricReport evaluate_metrics(std::span<const double> y, std::span<const double> y_hat) {
  MetricReport r;
  r.mse = mse(y, y_hat);
  r.esr = esr(y, y_hat);
  r.nrmse = nrmse(y, y_hat);
  r.m_sf = spectral_flux_metric(y, y_hat);
  r.m_stft = multires_stft_metric(y, y_hat);
  return r;
}

}  // namespace vafx
