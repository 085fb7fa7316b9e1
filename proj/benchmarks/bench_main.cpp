// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <benchmark/benchmark.h>

BENCHMARK_MAIN();
