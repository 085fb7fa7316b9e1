// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vafx/dataset.hpp"
#include "vafx/training.hpp"

namespace vafx {

// Half-open sample range [begin, end).
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct RecordingSplit {
  std::vector<Span> train;  // at most two contiguous spans
  Span validation;
  Span test;
};

// Composition c (1-based) validates on tenth 2(c-1) and tests on tenth
// 2(c-1)+1 of every recording; the rest trains.
struct SplitComposition {
  std::size_t index = 1;
  std::vector<RecordingSplit> recordings;
  std::vector<std::string> warnings;
};

struct SplitOptions {
  double sample_rate = 48000.0;
  double snap_radius_s = 0.5;
  std::size_t rms_window = 1024;
  double silence_ratio = 0.01;  // of the recording's overall RMS
};

// The nine interior tenth boundaries of a signal, each moved to the nearest
// sample within the snap radius whose centred RMS is below silence_ratio
// times the signal RMS. Boundaries with no such sample keep their nominal
// position and add a message to warnings.
std::vector<std::size_t> snap_boundaries(std::span<const double> signal, const SplitOptions& opt,
                                         std::vector<std::string>* warnings = nullptr);

// Boundaries are computed on each recording's input signal.
std::vector<SplitComposition> make_split_compositions(const std::vector<Recording>& recordings,
                                                      std::size_t n = 5,
                                                      const SplitOptions& opt = {});

// Streams for training/validation and for testing. The views point into ds.
TrainingData make_training_data(const Dataset& ds, const SplitComposition& comp);
std::vector<StreamView> make_test_streams(const Dataset& ds, const SplitComposition& comp);

}  // namespace vafx
