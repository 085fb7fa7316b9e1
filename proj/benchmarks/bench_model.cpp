// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <benchmark/benchmark.h>

#include <random>

#include "vafx/model.hpp"
#include "vafx/training.hpp"

namespace {

using namespace vafx;

Model make_model(Architecture arch) {
  ModelConfig mc;
  mc.architecture = arch;
  mc.cond_dim = 2;
  return Model::initialized(mc, {});
}

Vector noise(std::size_t n) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  Vector x(n);
  for (double& v : x) v = d(rng);
  return x;
}

void BM_ProcessSample(benchmark::State& state) {
  const Model m = make_model(static_cast<Architecture>(state.range(0)));
  const Vector x = noise(4800);
  const Vector p{0.3, 0.7};
  RecurrentState st = m.initial_state();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.process_sample(st, x[i], p));
    i = i + 1 == x.size() ? 0 : i + 1;
  }
  state.SetItemsProcessed(state.iterations());
  state.SetLabel(std::string(to_string(m.architecture())));
}

void BM_ForwardSegment(benchmark::State& state) {
  const Model m = make_model(static_cast<Architecture>(state.range(0)));
  const Vector x = noise(static_cast<std::size_t>(state.range(1)));
  const Vector p{0.3, 0.7};
  for (auto _ : state) {
    RecurrentState st = m.initial_state();
    benchmark::DoNotOptimize(m.forward_segment(st, x, p));
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
  state.SetLabel(std::string(to_string(m.architecture())));
}

void BM_BackwardSegment(benchmark::State& state) {
  const Model m = make_model(static_cast<Architecture>(state.range(0)));
  const Vector x = noise(2400), y = noise(2400);
  const Vector p{0.3, 0.7};
  const RecurrentState st = m.initial_state();
  for (auto _ : state) {
    benchmark::DoNotOptimize(backward_segment(m, st, x, y, p));
  }
  state.SetItemsProcessed(state.iterations() * 2400);
  state.SetLabel(std::string(to_string(m.architecture())));
}

void Archs(benchmark::internal::Benchmark* b) {
  for (int a = 0; a < 5; ++a) b->Arg(a);
}

void ArchsBySegment(benchmark::internal::Benchmark* b) {
  for (int a = 0; a < 5; ++a) b->Args({a, 48000});
}

}  // namespace

BENCHMARK(BM_ProcessSample)->Apply(Archs);
BENCHMARK(BM_ForwardSegment)->Apply(ArchsBySegment)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BackwardSegment)->Apply(Archs)->Unit(benchmark::kMillisecond);
