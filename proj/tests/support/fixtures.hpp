// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <random>

#include "vafx/model.hpp"

namespace fixtures {

// Initialized model with every tensor shifted by uniform noise, so biases and
// other constant initial values are exercised too. All recurrences stay
// stable under any perturbation because of their parameterizations.
inline vafx::Model random_model(vafx::Architecture arch, std::size_t cond_dim, std::uint64_t seed,
                                double noise = 0.2) {
  vafx::ModelConfig cfg;
  cfg.architecture = arch;
  cfg.cond_dim = cond_dim;
  vafx::InitConfig init;
  init.seed = seed;
  vafx::Model m = vafx::Model::initialized(cfg, init);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> d(-noise, noise);
  for (vafx::Tensor& t : m.mutable_params()) {
    for (double& v : t.values) v += d(rng);
  }
  m.refresh();
  return m;
}

inline std::vector<double> random_params(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::vector<double> p(n);
  for (double& v : p) v = d(rng);
  return p;
}

}  // namespace fixtures
