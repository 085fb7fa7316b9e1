// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <benchmark/benchmark.h>

#include <random>

#include "vafx/metrics.hpp"
#include "vafx/numerics.hpp"

namespace {

using namespace vafx;

Vector noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  Vector x(n);
  for (double& v : x) v = d(rng);
  return x;
}

void BM_Fft(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Vector x = noise(n, 1);
  ComplexVector buf(n);
  for (auto _ : state) {
    for (std::size_t i = 0; i < n; ++i) buf[i] = x[i];
    fft_radix2(buf);
    benchmark::DoNotOptimize(buf.data());
  }
}

void BM_Esr(benchmark::State& state) {
  const Vector y = noise(48000, 1), p = noise(48000, 2);
  for (auto _ : state) benchmark::DoNotOptimize(esr(y, p));
}

void BM_SpectralFlux(benchmark::State& state) {
  const Vector y = noise(48000, 1), p = noise(48000, 2);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_flux_metric(y, p));
}

void BM_MultiresStft(benchmark::State& state) {
  const Vector y = noise(48000, 1), p = noise(48000, 2);
  for (auto _ : state) benchmark::DoNotOptimize(multires_stft_metric(y, p));
}

}  // namespace

BENCHMARK(BM_Fft)->RangeMultiplier(4)->Range(256, 4096);
BENCHMARK(BM_Esr);
BENCHMARK(BM_SpectralFlux)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MultiresStft)->Unit(benchmark::kMillisecond);
