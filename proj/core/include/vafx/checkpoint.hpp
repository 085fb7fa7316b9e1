// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "vafx/model.hpp"
#include "vafx/params.hpp"

namespace vafx {

inline constexpr int kCheckpointVersion = 1;

// Per-epoch curves stored alongside the weights.
struct CheckpointHistory {
  Vector train_loss;
  Vector val_loss;
  Vector lr;
};

struct Checkpoint {
  ModelConfig config;
  ParamSet params;
  CheckpointHistory history;
  std::int64_t best_epoch = -1;

  static Checkpoint from_model(const Model& model);
  Model to_model() const;
};

// Text header followed by little-endian float64 payloads; see
// docs/checkpoint-format.md.
std::string serialize_checkpoint(const Checkpoint& ckpt);
// Throws FormatError on a malformed, truncated or wrong-version input.
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
void save_checkpoint(const Model& model, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace vafx
