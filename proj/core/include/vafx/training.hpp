// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vafx/model.hpp"
#include "vafx/params.hpp"

namespace vafx {

// Mean of squared differences. Throws InputError on empty or unequal input.
double loss_mse(std::span<const double> y, std::span<const double> y_hat);

// ---------------------------------------------------------------------------
// Truncated backpropagation through time.

struct SegmentGradient {
  double loss = 0.0;
  GradientSet grads;
  RecurrentState state;  // carried forward, detached
};

// Exact gradients of the segment MSE. Gradients never cross the segment
// start: state_in is treated as a constant. Throws NumericError when the
// loss or a gradient is not finite.
SegmentGradient backward_segment(const Model& model, const RecurrentState& state_in,
                                 std::span<const double> input, std::span<const double> target,
                                 std::span<const double> p);

// As backward_segment, but adds weight * gradient into grads (which must
// share the model's layout) and advances state in place. Returns the
// segment MSE.
double accumulate_segment_gradient(const Model& model, RecurrentState& state,
                                   std::span<const double> input, std::span<const double> target,
                                   std::span<const double> p, double weight, GradientSet& grads);

struct AuditResult {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

// Compares backward_segment against central differences of the inference
// path for every weight. Relative error is |a - n| / max(|a|, |n|, floor).
AuditResult finite_difference_audit(const Model& model, const RecurrentState& state_in,
                                    std::span<const double> input, std::span<const double> target,
                                    std::span<const double> p, double eps = 1e-6,
                                    double floor = 1e-5);

// ---------------------------------------------------------------------------
// Optimization.

double global_norm(const GradientSet& g);

// Rescales g so its global L2 norm is at most max_norm. Returns the norm
// before clipping.
double clip_grad_norm(GradientSet& g, double max_norm);

struct AdamState {
  GradientSet m;
  GradientSet v;
  std::uint64_t t = 0;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState make_adam_state(const ParamSet& params);

// One bias-corrected Adam step; increments state.t first.
void adam_update(ParamSet& weights, const GradientSet& g, AdamState& state, double lr,
                 const AdamConfig& cfg = {});

enum class LrSchedule {
  kStaged,   // lr * base^floor(epoch / decay_every)
  kLiteral,  // lr * base^epoch
};

struct TrainConfig {
  double initial_lr = 3e-4;
  double decay_base = 0.25;
  LrSchedule schedule = LrSchedule::kStaged;
  std::size_t decay_every = 50;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;
  std::size_t segment_len = 2400;
  std::size_t batch_size = 32;
  double clip_norm = 1.0;
  AdamConfig adam;
  std::uint64_t seed = 1;

  // Throws InputError on a non-positive setting.
  void validate() const;
};

std::string_view to_string(LrSchedule s);
LrSchedule parse_lr_schedule(std::string_view name);

// Epochs are counted from 0.
double lr_at_epoch(const TrainConfig& cfg, std::size_t epoch);

// One continuous signal with a fixed conditioning vector.
struct StreamView {
  std::span<const double> input;
  std::span<const double> target;
  std::vector<double> params;
  std::string label;
};

struct TrainingData {
  std::vector<StreamView> train;
  std::vector<StreamView> validation;
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> lr;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  bool early_stopped = false;
  bool diverged = false;
  std::string message;
};

struct EpochReport {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
  bool improved = false;
};

struct TrainResult {
  Model model;  // weights of the best validation epoch
  TrainHistory history;
};

// Streaming validation loss: sample-weighted MSE with fresh state per stream.
double evaluate_loss(const Model& model, std::span<const StreamView> streams);

// Trains from model's current weights. Each epoch shuffles the training
// streams, groups them into batches of up to batch_size, and steps each batch
// through its streams segment by segment with carried states, one optimizer
// update per segment step. A non-finite loss stops training and sets
// history.diverged.
TrainResult train(Model model, const TrainingData& data, const TrainConfig& cfg,
                  const std::function<void(const EpochReport&)>& on_epoch = {});

}  // namespace vafx
