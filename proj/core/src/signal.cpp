// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "vafx/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vafx/error.hpp"
#include "vafx/rng.hpp"

namespace vafx {

namespace {

std::size_t total_length(const InputSignalConfig& cfg) {
  if (!(cfg.duration_s > 0.0) || !(cfg.sample_rate > 0.0)) {
    throw InputError("input signal: duration and sample rate must be positive");
  }
  return static_cast<std::size_t>(std::llround(cfg.duration_s * cfg.sample_rate));
}

std::size_t section_count(const InputSignalConfig& cfg) {
  return cfg.instrument_clips.empty() ? 3 : 4;
}

}  // namespace

std::vector<std::size_t> input_section_starts(const InputSignalConfig& cfg) {
  const std::size_t L = total_length(cfg);
  const std::size_t S = section_count(cfg);
  std::vector<std::size_t> starts(S);
  for (std::size_t i = 0; i < S; ++i) starts[i] = L * i / S;
  return starts;
}

Vector generate_input_signal(const InputSignalConfig& cfg) {
  const std::size_t L = total_length(cfg);
  const std::size_t S = section_count(cfg);
  const double fs = cfg.sample_rate;
  if (!(cfg.sweep_low_hz > 0.0 && cfg.sweep_high_hz > cfg.sweep_low_hz &&
        cfg.sweep_high_hz < fs / 2.0)) {
    throw InputError("input signal: sweep range must satisfy 0 < low < high < fs/2");
  }
  Vector x(L, 0.0);
  Rng rng(cfg.seed);
  std::vector<std::size_t> starts = input_section_starts(cfg);
  starts.push_back(L);

  // Exponential sweep.
  {
    const std::size_t n0 = starts[0], n1 = starts[1];
    const double T = static_cast<double>(n1 - n0) / fs;
    const double k = std::log(cfg.sweep_high_hz / cfg.sweep_low_hz);
    for (std::size_t n = n0; n < n1; ++n) {
      const double t = static_cast<double>(n - n0) / fs;
      const double phase = 2.0 * std::numbers::pi * cfg.sweep_low_hz * T / k * std::expm1(t / T * k);
      x[n] = cfg.sweep_amplitude * std::sin(phase);
    }
  }
  // Noise under a linear ramp, then under a logarithmic (dB-linear) ramp.
  {
    const std::size_t n0 = starts[1], n1 = starts[2];
    const double len = static_cast<double>(n1 - n0);
    for (std::size_t n = n0; n < n1; ++n) {
      x[n] = rng.uniform(-1.0, 1.0) * static_cast<double>(n - n0 + 1) / len;
    }
  }
  {
    const std::size_t n0 = starts[2], n1 = starts[3];
    const double len = static_cast<double>(n1 - n0);
    for (std::size_t n = n0; n < n1; ++n) {
      const double db = cfg.noise_floor_db * (1.0 - static_cast<double>(n - n0 + 1) / len);
      x[n] = rng.uniform(-1.0, 1.0) * std::pow(10.0, db / 20.0);
    }
  }
  if (S == 4) {
    const std::size_t n0 = starts[3], n1 = starts[4];
    std::size_t clip = 0, offset = 0;
    double peak = 0.0;
    for (const Vector& c : cfg.instrument_clips) {
      for (double v : c) peak = std::max(peak, std::abs(v));
    }
    const double gain = peak > 1.0 ? 1.0 / peak : 1.0;
    for (std::size_t n = n0; n < n1; ++n) {
      while (cfg.instrument_clips[clip].size() <= offset) {
        clip = (clip + 1) % cfg.instrument_clips.size();
        offset = 0;
        bool any = false;
        for (const Vector& c : cfg.instrument_clips) any = any || !c.empty();
        if (!any) throw InputError("input signal: instrument clips are empty");
      }
      x[n] = gain * cfg.instrument_clips[clip][offset++];
    }
  }

  // Silence around every 10% boundary, with raised-cosine fades.
  const auto gap = static_cast<std::ptrdiff_t>(std::llround(cfg.gap_s * fs / 2.0));
  const auto fade = static_cast<std::ptrdiff_t>(std::llround(cfg.fade_s * fs));
  const auto iL = static_cast<std::ptrdiff_t>(L);
  for (int b = 1; b < 10; ++b) {
    const auto c = static_cast<std::ptrdiff_t>(L * static_cast<std::size_t>(b) / 10);
    for (std::ptrdiff_t n = std::max<std::ptrdiff_t>(0, c - gap - fade);
         n < std::min(iL, c + gap + fade); ++n) {
      const std::ptrdiff_t d = std::abs(n - c);
      double g = 0.0;
      if (d >= gap && fade > 0) {
        const double r = static_cast<double>(d - gap) / static_cast<double>(fade);
        g = 0.5 - 0.5 * std::cos(std::numbers::pi * r);
      }
      x[static_cast<std::size_t>(n)] *= g;
    }
  }

  const double floor_amp = std::pow(10.0, cfg.background_db / 20.0) * std::sqrt(3.0);
  if (floor_amp > 0.0) {
    for (double& v : x) v += rng.uniform(-floor_amp, floor_amp);
  }

  for (double& v : x) v = static_cast<double>(static_cast<float>(std::clamp(v, -1.0, 1.0)));
  return x;
}

}  // namespace vafx
