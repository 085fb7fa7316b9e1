// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vafx/numerics.hpp"

namespace vafx {

// Synthetic reference effects with exactly known behaviour. All are causal
// and deterministic.
enum class EffectKind {
  kIdentity,
  kWaveshaper,      // pre-gain, tanh, one-pole tone filter
  kTapeSaturator,   // pre-emphasis, soft clip, de-emphasis
  kResonantLowpass, // trapezoidal state-variable filter
  kCompressor,      // feed-forward, attack/release smoothed gain computer
  kPeakingEq,       // boost/cut biquad
};

inline constexpr std::array<EffectKind, 6> kAllEffects = {
    EffectKind::kIdentity,        EffectKind::kWaveshaper, EffectKind::kTapeSaturator,
    EffectKind::kResonantLowpass, EffectKind::kCompressor, EffectKind::kPeakingEq};

std::string_view to_string(EffectKind kind);
// Throws InputError for an unknown name.
EffectKind parse_effect(std::string_view name);

struct ParamSpec {
  std::string name;
  double min = 0.0;
  double max = 1.0;
  double default_value = 0.0;
  bool log_scale = false;
  std::string unit;
};

// Physical parameters in the order apply_oracle expects them. Frequency
// limits depend on the sample rate.
std::vector<ParamSpec> effect_parameters(EffectKind kind, double sample_rate = 48000.0);

// Throws InputError when the parameter count is wrong or a value lies outside
// its declared range.
Vector apply_oracle(EffectKind kind, std::span<const double> params, std::span<const double> input,
                    double sample_rate = 48000.0);

// Maps a physical value onto [0, 1] over [min, max] (in the log domain for
// log-scale parameters) and back.
struct NormRange {
  std::string name;
  double min = 0.0;
  double max = 1.0;
  bool log_scale = false;

  double normalize(double v) const;
  double denormalize(double u) const;
};

}  // namespace vafx
