// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vafx/numerics.hpp"

namespace vafx {

// Floor applied wherever a target magnitude divides or is logged.
inline constexpr double kMagnitudeFloor = 1e-7;

inline constexpr std::size_t kFluxWindow = 2048;
inline constexpr std::size_t kFluxHop = 512;
inline constexpr std::size_t kStftResolutions[] = {256, 512, 1024};

// All pairwise metrics take (target, prediction) of equal length and throw
// InputError otherwise.
double mse(std::span<const double> y, std::span<const double> y_hat);

// sum (y - y_hat)^2 / sum y^2. Throws InputError for a zero-energy target.
double esr(std::span<const double> y, std::span<const double> y_hat);

// RMS(y - y_hat) / RMS(y).
double nrmse(std::span<const double> y, std::span<const double> y_hat);

// Flux F_n = | |S_n| - |S_{n-1}| | per bin (Hann, 2048 / 512). The metric is
// sum over n >= 1 and bins of |F(y) - F(y_hat)| / max(F(y), 1e-7), divided by
// (frames - 1) * bins. Needs at least 4096 samples.
double spectral_flux_metric(std::span<const double> y, std::span<const double> y_hat);

// Sum over resolutions m (Hann, hop m/4) of
//   sum |Y - Yh| / max(|Y|, 1e-7) + sum |log max(|Y|, 1e-7) - log max(|Yh|, 1e-7)|
// divided by the signal length. Needs at least 1024 samples.
double multires_stft_metric(std::span<const double> y, std::span<const double> y_hat,
                            std::span<const std::size_t> resolutions = kStftResolutions);

// Framewise RMS. Throws InputError when the signal is shorter than a window.
Vector rms_energy_track(std::span<const double> y, std::size_t window = 4096,
                        double overlap = 0.75);

Spectrogram spectrogram_report(std::span<const double> y, std::size_t window = 2048,
                               double overlap = 0.25);

struct MetricReport {
  double mse = 0.0;
  double esr = 0.0;
  double nrmse = 0.0;
  double m_sf = 0.0;
  double m_stft = 0.0;
  std::string window = "hann";
  std::size_t flux_window = kFluxWindow;
  std::size_t flux_hop = kFluxHop;
  std::vector<std::size_t> resolutions{std::begin(kStftResolutions), std::end(kStftResolutions)};
  std::string stft_hop = "m/4";
};

MetricReport evaluate_metrics(std::span<const double> y, std::span<const double> y_hat);

}  // namespace vafx
