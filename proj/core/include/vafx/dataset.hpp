// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vafx/effects.hpp"
#include "vafx/signal.hpp"

namespace vafx {

// One parameter combination: paired audio plus its conditioning vector.
struct Recording {
  std::string id;                       // "combo_000", ...
  std::shared_ptr<const Vector> input;  // shared between combinations
  Vector output;
  Vector physical;                      // every effect parameter, physical units
  Vector params;                        // varying parameters, normalized to [0, 1]

  std::span<const double> in() const { return *input; }
  std::span<const double> out() const { return output; }
};

// Values taken by one effect parameter. Parameters without an axis use
// their default.
struct GridAxis {
  std::string name;
  std::vector<double> values;
};

// count values from min to max inclusive, geometric for log-scale
// parameters.
GridAxis make_axis(const ParamSpec& spec, double min, double max, std::size_t count);

struct DatasetSpec {
  EffectKind effect = EffectKind::kIdentity;
  std::vector<GridAxis> axes;
  InputSignalConfig signal;
};

struct Dataset {
  EffectKind effect = EffectKind::kIdentity;
  double sample_rate = 48000.0;
  std::uint64_t seed = 1;
  double duration_s = 0.0;
  std::vector<std::string> param_labels;  // the varying parameters
  std::vector<NormRange> ranges;          // one per label
  std::vector<Recording> recordings;

  std::size_t cond_dim() const { return param_labels.size(); }
};

// Cartesian product of the axes (last axis fastest), one recording per
// combination, all sharing the same generated input. Throws InputError for
// unknown or duplicate parameter names and out-of-range values.
Dataset build_dataset(const DatasetSpec& spec);

// Layout: dataset.json, then per combination combo_XXX_input.wav,
// combo_XXX_output.wav (32-bit float) and a combo_XXX.json sidecar.
void write_dataset(const Dataset& ds, const std::filesystem::path& dir);
// Throws FormatError for a missing or malformed directory.
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace vafx
