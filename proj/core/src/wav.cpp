// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "vafx/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>

#include "vafx/error.hpp"

namespace vafx {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u(const std::string& s, std::size_t pos, int bytes) {
  std::uint32_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[pos + i]);
  return v;
}

std::int32_t quantize(double x, double scale, std::int32_t lo, std::int32_t hi) {
  const double q = std::nearbyint(std::clamp(x, -1.0, 1.0) * scale);
  return static_cast<std::int32_t>(std::clamp(q, static_cast<double>(lo), static_cast<double>(hi)));
}

}  // namespace

std::string encode_wav(std::span<const double> samples, double sample_rate, WavEncoding encoding) {
  const std::uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : encoding == WavEncoding::kPcm24 ? 24 : 32;
  const std::uint16_t format = encoding == WavEncoding::kFloat32 ? kFormatFloat : kFormatPcm;
  const std::uint32_t block = bits / 8;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * block);
  const auto rate = static_cast<std::uint32_t>(std::lround(sample_rate));

  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, format);
  put_u16(out, 1);
  put_u32(out, rate);
  put_u32(out, rate * block);
  put_u16(out, static_cast<std::uint16_t>(block));
  put_u16(out, bits);
  out += "data";
  put_u32(out, data_bytes);
  for (double x : samples) {
    switch (encoding) {
      case WavEncoding::kPcm16:
        put_u16(out, static_cast<std::uint16_t>(quantize(x, 32768.0, -32768, 32767)));
        break;
      case WavEncoding::kPcm24: {
        const auto v = static_cast<std::uint32_t>(quantize(x, 8388608.0, -8388608, 8388607));
        for (int i = 0; i < 3; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
        break;
      }
      case WavEncoding::kFloat32:
        put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
        break;
    }
  }
  return out;
}

Vector decode_wav(const std::string& bytes, double expected_rate) {
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 || bytes.compare(8, 4, "WAVE") != 0) {
    throw FormatError("wav: not a RIFF/WAVE file");
  }
  std::size_t pos = 12;
  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const std::uint32_t size = get_u(bytes, pos + 4, 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > bytes.size()) throw FormatError("wav: truncated fmt chunk");
      format = static_cast<std::uint16_t>(get_u(bytes, body, 2));
      channels = static_cast<std::uint16_t>(get_u(bytes, body + 2, 2));
      rate = get_u(bytes, body + 4, 4);
      bits = static_cast<std::uint16_t>(get_u(bytes, body + 14, 2));
      if (format == kFormatExtensible) {
        if (size < 40) throw FormatError("wav: truncated extensible fmt chunk");
        format = static_cast<std::uint16_t>(get_u(bytes, body + 24, 2));
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError("wav: data chunk precedes fmt chunk");
      if (channels != 1) {
        throw FormatError("wav: expected 1 channel, file has " + std::to_string(channels));
      }
      if (static_cast<double>(rate) != expected_rate) {
        throw FormatError("wav: expected " + std::to_string(static_cast<long>(expected_rate)) +
                          " Hz, file is " + std::to_string(rate) + " Hz (no resampling)");
      }
      const bool ok = (format == kFormatPcm && (bits == 16 || bits == 24)) ||
                      (format == kFormatFloat && bits == 32);
      if (!ok) {
        throw FormatError("wav: unsupported encoding (format tag " + std::to_string(format) + ", " +
                          std::to_string(bits) + " bits); need 16/24-bit PCM or 32-bit float");
      }
      const std::size_t width = bits / 8;
      const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
      if (avail < size) throw FormatError("wav: truncated data chunk");
      const std::size_t n = size / width;
      Vector out(n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t p = body + i * width;
        if (format == kFormatFloat) {
          out[i] = std::bit_cast<float>(get_u(bytes, p, 4));
        } else if (bits == 16) {
          out[i] = static_cast<std::int16_t>(get_u(bytes, p, 2)) / 32768.0;
        } else {
          std::int32_t v = static_cast<std::int32_t>(get_u(bytes, p, 3) << 8) >> 8;
          out[i] = v / 8388608.0;
        }
      }
      return out;
    }
    pos = body + size + (size & 1u);
  }
  throw FormatError(have_fmt ? "wav: missing data chunk" : "wav: missing fmt chunk");
}

Vector load_wav(const std::filesystem::path& path, double expected_rate) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes, expected_rate);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_wav(const std::filesystem::path& path, std::span<const double> samples,
              double sample_rate, WavEncoding encoding) {
  const std::string bytes = encode_wav(samples, sample_rate, encoding);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw FormatError("failed writing " + path.string());
}

}  // namespace vafx
