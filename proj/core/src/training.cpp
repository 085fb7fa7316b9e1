// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "vafx/training.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

#include "vafx/error.hpp"
#include "vafx/rng.hpp"

namespace vafx {

double loss_mse(std::span<const double> y, std::span<const double> y_hat) {
  if (y.empty()) throw InputError("loss_mse: empty input");
  if (y.size() != y_hat.size()) throw InputError("loss_mse: length mismatch");
  double acc = 0.0;
  for (std::size_t n = 0; n < y.size(); ++n) {
    const double e = y[n] - y_hat[n];
    acc += e * e;
  }
  return acc / static_cast<double>(y.size());
}

double global_norm(const GradientSet& g) {
  double acc = 0.0;
  for (const Tensor& t : g) {
    for (double v : t.values) acc += v * v;
  }
  return std::sqrt(acc);
}

double clip_grad_norm(GradientSet& g, double max_norm) {
  const double norm = global_norm(g);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (Tensor& t : g) {
      for (double& v : t.values) v *= s;
    }
  }
  return norm;
}

AdamState make_adam_state(const ParamSet& params) {
  AdamState s;
  s.m = params.zeros_like();
  s.v = params.zeros_like();
  return s;
}

void adam_update(ParamSet& weights, const GradientSet& g, AdamState& state, double lr,
                 const AdamConfig& cfg) {
  if (!weights.same_layout(g) || !weights.same_layout(state.m)) {
    throw DimensionError("adam_update: layout mismatch");
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    auto& w = weights[i].values;
    const auto& gi = g[i].values;
    auto& m = state.m[i].values;
    auto& v = state.v[i].values;
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * gi[k];
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * gi[k] * gi[k];
      const double mh = m[k] / c1;
      const double vh = v[k] / c2;
      w[k] -= lr * mh / (std::sqrt(vh) + cfg.epsilon);
    }
  }
}

void TrainConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw InputError(std::string("train config: ") + what + " must be positive");
  };
  positive(initial_lr, "initial_lr");
  positive(decay_base, "decay_base");
  positive(clip_norm, "clip_norm");
  positive(static_cast<double>(max_epochs), "max_epochs");
  positive(static_cast<double>(segment_len), "segment_len");
  positive(static_cast<double>(batch_size), "batch_size");
  positive(static_cast<double>(decay_every), "decay_every");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw InputError("train config: Adam betas must lie in [0, 1)");
  }
  positive(adam.epsilon, "adam epsilon");
}

std::string_view to_string(LrSchedule s) {
  return s == LrSchedule::kStaged ? "staged" : "literal";
}

LrSchedule parse_lr_schedule(std::string_view name) {
  if (name == "staged") return LrSchedule::kStaged;
  if (name == "literal") return LrSchedule::kLiteral;
  throw InputError("unknown lr schedule '" + std::string(name) + "' (expected staged or literal)");
}

double lr_at_epoch(const TrainConfig& cfg, std::size_t epoch) {
  const std::size_t e = cfg.schedule == LrSchedule::kStaged ? epoch / cfg.decay_every : epoch;
  return cfg.initial_lr * std::pow(cfg.decay_base, static_cast<double>(e));
}

double evaluate_loss(const Model& model, std::span<const StreamView> streams) {
  double sse = 0.0;
  std::size_t count = 0;
  for (const StreamView& s : streams) {
    if (s.input.size() != s.target.size()) throw DimensionError("stream input/target length mismatch");
    RecurrentState st = model.initial_state();
    for (std::size_t n = 0; n < s.input.size(); ++n) {
      const double e = model.process_sample(st, s.input[n], s.params) - s.target[n];
      sse += e * e;
    }
    count += s.input.size();
  }
  if (count == 0) throw InputError("evaluate_loss: no samples");
  return sse / static_cast<double>(count);
}

namespace {

// Returns the sample-weighted training loss of one epoch.
double run_epoch(Model& model, const TrainingData& data, const TrainConfig& cfg, double lr,
                 Rng& rng, AdamState& adam, GradientSet& grads) {
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.begin(), order.end());

  double sse = 0.0;
  std::size_t count = 0;
  for (std::size_t b0 = 0; b0 < order.size(); b0 += cfg.batch_size) {
    const std::size_t b1 = std::min(order.size(), b0 + cfg.batch_size);
    std::vector<const StreamView*> batch;
    std::vector<RecurrentState> states;
    std::size_t longest = 0;
    for (std::size_t i = b0; i < b1; ++i) {
      batch.push_back(&data.train[order[i]]);
      states.push_back(model.initial_state());
      longest = std::max(longest, batch.back()->input.size());
    }
    for (std::size_t off = 0; off < longest; off += cfg.segment_len) {
      std::size_t step_samples = 0;
      for (const StreamView* s : batch) {
        if (s->input.size() > off) step_samples += std::min(cfg.segment_len, s->input.size() - off);
      }
      grads.fill(0.0);
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const StreamView& s = *batch[i];
        if (s.input.size() <= off) continue;
        const std::size_t len = std::min(cfg.segment_len, s.input.size() - off);
        const double w = static_cast<double>(len) / static_cast<double>(step_samples);
        const double loss = accumulate_segment_gradient(model, states[i], s.input.subspan(off, len),
                                                        s.target.subspan(off, len), s.params, w,
                                                        grads);
        sse += loss * static_cast<double>(len);
        count += len;
      }
      clip_grad_norm(grads, cfg.clip_norm);
      adam_update(model.mutable_params(), grads, adam, lr, cfg.adam);
      model.refresh();
    }
  }
  return sse / static_cast<double>(count);
}

}  // namespace

TrainResult train(Model model, const TrainingData& data, const TrainConfig& cfg,
                  const std::function<void(const EpochReport&)>& on_epoch) {
  cfg.validate();
  if (data.train.empty()) throw InputError("train: no training streams");
  if (data.validation.empty()) throw InputError("train: no validation streams");
  for (const auto* group : {&data.train, &data.validation}) {
    for (const StreamView& s : *group) {
      if (s.input.size() != s.target.size() || s.input.empty()) {
        throw InputError("train: stream '" + s.label + "' has mismatched or empty audio");
      }
      if (s.params.size() != model.config().cond_dim) {
        throw CompatibilityError("train: stream '" + s.label + "' has " +
                                 std::to_string(s.params.size()) +
                                 " conditioning values, model expects " +
                                 std::to_string(model.config().cond_dim));
      }
    }
  }

  Rng rng(cfg.seed);
  AdamState adam = make_adam_state(model.params());
  GradientSet grads = model.params().zeros_like();
  TrainHistory hist;
  ParamSet best = model.params();
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t wait = 0;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double lr = lr_at_epoch(cfg, epoch);
    double train_loss = 0.0;
    double val_loss = 0.0;
    try {
      train_loss = run_epoch(model, data, cfg, lr, rng, adam, grads);
      val_loss = evaluate_loss(model, data.validation);
      if (!std::isfinite(val_loss)) throw NumericError("validation loss is not finite");
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kNumeric && e.kind() != ErrorKind::kStability) throw;
      hist.diverged = true;
      hist.message = "epoch " + std::to_string(epoch) + ": " + e.what();
      break;
    }
    hist.train_loss.push_back(train_loss);
    hist.val_loss.push_back(val_loss);
    hist.lr.push_back(lr);
    hist.epochs_run = epoch + 1;

    const bool improved = val_loss < best_val;
    if (improved) {
      best_val = val_loss;
      best = model.params();
      hist.best_epoch = epoch;
      wait = 0;
    } else {
      ++wait;
    }
    if (on_epoch) on_epoch(EpochReport{epoch, train_loss, val_loss, lr, improved});
    if (!improved && wait >= cfg.patience) {
      hist.early_stopped = true;
      break;
    }
  }

  model.set_params(std::move(best));
  return TrainResult{std::move(model), std::move(hist)};
}

}  // namespace vafx
