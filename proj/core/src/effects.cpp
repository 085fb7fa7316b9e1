// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "vafx/effects.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "vafx/error.hpp"

namespace vafx {

namespace {

constexpr double kPi = std::numbers::pi;

struct EffectName {
  EffectKind kind;
  const char* name;
};

constexpr EffectName kNames[] = {
    {EffectKind::kIdentity, "identity"},
    {EffectKind::kWaveshaper, "waveshaper"},
    {EffectKind::kTapeSaturator, "tape_saturator"},
    {EffectKind::kResonantLowpass, "resonant_lowpass"},
    {EffectKind::kCompressor, "feedforward_compressor"},
    {EffectKind::kPeakingEq, "peaking_eq"},
};

Vector waveshaper(double drive, double tone_hz, std::span<const double> x, double fs) {
  // One-pole lowpass, y = y + a (v - y), with a matched to the -3 dB point.
  const double a = 1.0 - std::exp(-2.0 * kPi * tone_hz / fs);
  Vector y(x.size());
  double s = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    s += a * (std::tanh(drive * x[n]) - s);
    y[n] = s;
  }
  return y;
}

Vector tape_saturator(double saturation, std::span<const double> x) {
  constexpr double kEmphasis = 0.5;
  const double g = 1.0 + 9.0 * saturation;
  Vector y(x.size());
  double x_prev = 0.0, y_prev = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double e = (1.0 + kEmphasis) * x[n] - kEmphasis * x_prev;
    const double c = std::tanh(g * e) / g;
    y[n] = (c + kEmphasis * y_prev) / (1.0 + kEmphasis);
    x_prev = x[n];
    y_prev = y[n];
  }
  return y;
}

Vector svf_lowpass(double cutoff_hz, double q, std::span<const double> x, double fs) {
  const double g = std::tan(kPi * cutoff_hz / fs);
  const double k = 1.0 / q;
  const double a1 = 1.0 / (1.0 + g * (g + k));
  const double a2 = g * a1;
  const double a3 = g * a2;
  double ic1 = 0.0, ic2 = 0.0;
  Vector y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double v3 = x[n] - ic2;
    const double v1 = a1 * ic1 + a2 * v3;
    const double v2 = ic2 + a2 * ic1 + a3 * v3;
    ic1 = 2.0 * v1 - ic1;
    ic2 = 2.0 * v2 - ic2;
    y[n] = v2;
  }
  return y;
}

Vector compressor(double threshold_db, double ratio, double attack_ms, double release_ms,
                  std::span<const double> x, double fs) {
  const double aa = std::exp(-1.0 / (attack_ms * 1e-3 * fs));
  const double ar = std::exp(-1.0 / (release_ms * 1e-3 * fs));
  const double slope = 1.0 - 1.0 / ratio;
  double gain_db = 0.0;
  Vector y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double level_db = 20.0 * std::log10(std::max(std::abs(x[n]), 1e-9));
    const double over = level_db - threshold_db;
    const double target = over > 0.0 ? -slope * over : 0.0;
    const double a = target < gain_db ? aa : ar;
    gain_db = a * gain_db + (1.0 - a) * target;
    y[n] = x[n] * std::pow(10.0, gain_db / 20.0);
  }
  return y;
}

Vector peaking_eq(double freq_hz, double gain_db, double q, std::span<const double> x, double fs) {
  const double A = std::pow(10.0, gain_db / 40.0);
  const double w0 = 2.0 * kPi * freq_hz / fs;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double cw = std::cos(w0);
  const double a0 = 1.0 + alpha / A;
  const double b0 = (1.0 + alpha * A) / a0;
  const double b1 = (-2.0 * cw) / a0;
  const double b2 = (1.0 - alpha * A) / a0;
  const double a1 = (-2.0 * cw) / a0;
  const double a2 = (1.0 - alpha / A) / a0;
  double z1 = 0.0, z2 = 0.0;
  Vector y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double out = b0 * x[n] + z1;
    z1 = b1 * x[n] - a1 * out + z2;
    z2 = b2 * x[n] - a2 * out;
    y[n] = out;
  }
  return y;
}

}  // namespace

std::string_view to_string(EffectKind kind) {
  for (const auto& e : kNames) {
    if (e.kind == kind) return e.name;
  }
  return "?";
}

EffectKind parse_effect(std::string_view name) {
  for (const auto& e : kNames) {
    if (name == e.name) return e.kind;
  }
  std::string known;
  for (const auto& e : kNames) known += std::string(known.empty() ? "" : ", ") + e.name;
  throw InputError("unknown effect '" + std::string(name) + "' (known: " + known + ")");
}

std::vector<ParamSpec> effect_parameters(EffectKind kind, double fs) {
  const double top = 0.4995 * fs;
  switch (kind) {
    case EffectKind::kIdentity:
      return {};
    case EffectKind::kWaveshaper:
      return {{"drive", 0.01, 100.0, 1.0, true, "x"},
              {"tone_hz", 200.0, top, 12000.0, true, "Hz"}};
    case EffectKind::kTapeSaturator:
      return {{"saturation", 0.0, 1.0, 0.5, false, ""}};
    case EffectKind::kResonantLowpass:
      return {{"cutoff_hz", 20.0, top, 1000.0, true, "Hz"},
              {"resonance", 0.5, 8.0, 0.7071067811865476, true, "Q"}};
    case EffectKind::kCompressor:
      return {{"threshold_db", -40.0, 0.0, -20.0, false, "dB"},
              {"ratio", 1.0, 10.0, 4.0, true, ":1"},
              {"attack_ms", 5.0, 300.0, 10.0, true, "ms"},
              {"release_ms", 5.0, 10000.0, 100.0, true, "ms"}};
    case EffectKind::kPeakingEq:
      return {{"freq_hz", 20.0, 20000.0, 1000.0, true, "Hz"},
              {"gain_db", -18.0, 18.0, 6.0, false, "dB"},
              {"q", 0.3, 10.0, 1.0, true, ""}};
  }
  return {};
}

Vector apply_oracle(EffectKind kind, std::span<const double> params, std::span<const double> input,
                    double fs) {
  const std::vector<ParamSpec> specs = effect_parameters(kind, fs);
  if (params.size() != specs.size()) {
    throw InputError(std::string(to_string(kind)) + " takes " + std::to_string(specs.size()) +
                     " parameters, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (!(params[i] >= specs[i].min && params[i] <= specs[i].max)) {
      std::ostringstream os;
      os << to_string(kind) << ": " << specs[i].name << " = " << params[i] << " is outside ["
         << specs[i].min << ", " << specs[i].max << "]";
      throw InputError(os.str());
    }
  }
  switch (kind) {
    case EffectKind::kIdentity:
      return Vector(input.begin(), input.end());
    case EffectKind::kWaveshaper:
      return waveshaper(params[0], params[1], input, fs);
    case EffectKind::kTapeSaturator:
      return tape_saturator(params[0], input);
    case EffectKind::kResonantLowpass:
      return svf_lowpass(params[0], params[1], input, fs);
    case EffectKind::kCompressor:
      return compressor(params[0], params[1], params[2], params[3], input, fs);
    case EffectKind::kPeakingEq:
      return peaking_eq(params[0], params[1], params[2], input, fs);
  }
  return {};
}

double NormRange::normalize(double v) const {
  if (max == min) return 0.0;
  if (log_scale) return (std::log(v) - std::log(min)) / (std::log(max) - std::log(min));
  return (v - min) / (max - min);
}

double NormRange::denormalize(double u) const {
  if (max == min) return min;
  if (log_scale) return std::exp(std::log(min) + u * (std::log(max) - std::log(min)));
  return min + u * (max - min);
}

}  // namespace vafx
