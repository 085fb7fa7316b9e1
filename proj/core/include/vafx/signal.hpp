// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vafx/numerics.hpp"

namespace vafx {

struct InputSignalConfig {
  double duration_s = 45.0;
  double sample_rate = 48000.0;
  std::uint64_t seed = 1;
  double sweep_amplitude = 0.8;
  double sweep_low_hz = 20.0;
  double sweep_high_hz = 20000.0;
  double noise_floor_db = -60.0;  // start of the logarithmic noise ramp
  double gap_s = 0.2;             // silence centred on every 10% boundary
  double fade_s = 0.005;
  // White noise added over the whole signal, gaps included, like the floor of
  // a recording chain. -infinity gives digital silence in the gaps.
  double background_db = -80.0;
  // Optional instrument material (already at sample_rate). When present it
  // fills a fourth section, looped or truncated to length.
  std::vector<Vector> instrument_clips;
};

// Concatenation of an exponential sine sweep, white noise under a linear
// amplitude ramp, white noise under a logarithmic ramp and, if supplied,
// instrument clips; each section has equal length. Samples are rounded to
// float precision so the signal survives a 32-bit float WAV round trip, and
// the peak never exceeds 1.
Vector generate_input_signal(const InputSignalConfig& cfg);

// Sample index where section i of the recipe begins.
std::vector<std::size_t> input_section_starts(const InputSignalConfig& cfg);

}  // namespace vafx
