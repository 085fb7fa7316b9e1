// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "vafx/numerics.hpp"

namespace vafx {

enum class WavEncoding { kPcm16, kPcm24, kFloat32 };

// RIFF/WAVE bytes for a mono signal. Integer encodings clip to [-1, 1].
std::string encode_wav(std::span<const double> samples, double sample_rate,
                       WavEncoding encoding = WavEncoding::kFloat32);

// Accepts mono 16/24-bit integer or 32-bit float PCM (plain or extensible
// format) at exactly expected_rate. Throws FormatError describing the
// offending field otherwise.
Vector decode_wav(const std::string& bytes, double expected_rate = 48000.0);

Vector load_wav(const std::filesystem::path& path, double expected_rate = 48000.0);
void save_wav(const std::filesystem::path& path, std::span<const double> samples,
              double sample_rate = 48000.0, WavEncoding encoding = WavEncoding::kFloat32);

}  // namespace vafx
