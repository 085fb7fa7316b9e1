// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vafx/cells.hpp"
#include "vafx/numerics.hpp"
#include "vafx/params.hpp"

namespace vafx {

enum class Architecture { kLstm, kEd, kLru, kS4d, kS6 };

inline constexpr std::array<Architecture, 5> kAllArchitectures = {
    Architecture::kLstm, Architecture::kEd, Architecture::kLru, Architecture::kS4d,
    Architecture::kS6};

std::string_view to_string(Architecture arch);
// Case-insensitive ("lstm", "ED", "s4d", ...). Throws InputError.
Architecture parse_architecture(std::string_view name);

// Fixed layer widths of one architecture.
struct ModelDims {
  std::size_t projection = 0;         // width of u
  std::size_t projection_inputs = 0;  // 64, or 32 for the ED decoder half
  std::size_t states = 0;             // recurrent units / state channels
  std::size_t cell_output = 0;        // width fed to the post-recurrent layer
  std::size_t post = 4;
  bool post_tanh = false;
  std::size_t ed_channels = 0;
  std::size_t ed_kernel = 0;
};

ModelDims dims_for(Architecture arch);

inline constexpr std::size_t kConditionedWidth = 4;

struct ModelConfig {
  Architecture architecture = Architecture::kLstm;
  std::size_t cond_dim = 0;
  double sample_rate = 48000.0;
  std::vector<std::string> param_labels;  // empty or cond_dim entries

  // Throws InputError on an inconsistent configuration.
  void validate() const;
};

struct InitConfig {
  std::uint64_t seed = 1;
  double lru_r_min = 0.5;
  double lru_r_max = 0.99;
  double lru_max_phase = std::numbers::pi / 10.0;
  double dt_min = 1e-3;
  double dt_max = 1e-1;
  double gate_bias = 1.0;  // initial bias of the softsign gate branch
};

// Zero-filled weights with the architecture's names and shapes, in
// serialization order.
ParamSet make_param_layout(const ModelConfig& config);
void initialize_params(ParamSet& params, const ModelConfig& config, const InitConfig& init);

// FiLM (P -> 8, split into scale theta and shift eta) followed by a GLU
// (4 -> 8, split into q1 and q2) with a softsign gate. With P = 0 the FiLM
// stage is absent and the GLU acts on o directly.
struct ConditioningBlock {
  std::size_t cond_dim = 0;
  Dense film;  // 8 x P
  Dense glu;   // 8 x 4
};

// Throws InputError when a component of p lies outside [0, 1] and
// DimensionError when p has the wrong length (p is ignored when P = 0).
Vector conditioning_apply(const ConditioningBlock& cb, std::span<const double> o,
                          std::span<const double> p);

// Per-stream state: the previous 63 input samples (oldest first) and the
// recurrent layer's state.
struct RecurrentState {
  Architecture architecture = Architecture::kLstm;
  bool initialized = false;
  Vector history;
  std::variant<LstmState, LruState, SsmState, S6State> cell;
};

struct FlopsBreakdown {
  std::size_t input_projection = 0;
  std::size_t recurrent_layer = 0;
  std::size_t post_fc = 0;
  std::size_t conditioning_block = 0;
  std::size_t output_layer = 0;
  std::size_t total = 0;
  std::string convention;
};

// Counting convention: a multiply-accumulate, a bias add and any other
// elementwise arithmetic op cost 1; sigmoid 4, tanh 5, softsign 3,
// softplus 3, exp 1; complex multiply 6, complex add 2, complex-by-real
// multiply-accumulate 2, real part of a complex product accumulated 2.
inline constexpr std::string_view kFlopsConvention = "fma1-act-ops";

FlopsBreakdown count_flops(const ModelConfig& config);

// Published per-sample reference figures used for calibration.
std::size_t reference_total_flops(Architecture arch);
inline constexpr std::size_t kReferenceConditioningFlops = 120;
inline constexpr std::size_t kFlopsBudget = 1500;

class Model {
 public:
  // All weights zero.
  explicit Model(ModelConfig config);
  // Takes ownership of weights; the layout must match the configuration.
  Model(ModelConfig config, ParamSet params);

  static Model initialized(ModelConfig config, const InitConfig& init);

  const ModelConfig& config() const noexcept { return config_; }
  Architecture architecture() const noexcept { return config_.architecture; }
  const ModelDims& dims() const noexcept { return dims_; }
  const ParamSet& params() const noexcept { return params_; }

  // After editing weights through mutable_params(), call refresh() before
  // running the model. refresh() rebuilds the compiled layers and throws
  // StabilityError if a recurrence has left the stable region.
  ParamSet& mutable_params() noexcept { return params_; }
  void refresh();
  void set_params(ParamSet params);

  RecurrentState initial_state() const;

  // One output sample from a 64-sample window (newest first). The window's
  // older 63 samples replace the state's history.
  double forward_sample(RecurrentState& state, std::span<const double> window,
                        std::span<const double> p) const;
  // Appends x to the stream held by state and returns the output sample.
  double process_sample(RecurrentState& state, double x, std::span<const double> p) const;
  Vector forward_segment(RecurrentState& state, std::span<const double> input,
                         std::span<const double> p) const;

  std::size_t count_params() const { return params_.scalar_count(); }
  FlopsBreakdown count_flops() const { return vafx::count_flops(config_); }

  const Dense& projection() const noexcept { return projection_; }
  const Dense& post() const noexcept { return post_; }
  const ConditioningBlock& conditioning() const noexcept { return conditioning_; }
  const Dense& output_layer() const noexcept { return output_; }
  const LstmCell& lstm() const noexcept { return lstm_; }
  const EdEncoder& ed_encoder() const noexcept { return encoder_; }
  const LruCell& lru() const noexcept { return lru_; }
  const S4dCell& s4d() const noexcept { return s4d_; }
  const S6Cell& s6() const noexcept { return s6_; }

 private:
  void check_state(const RecurrentState& state) const;
  double head(std::span<const double> cell_out, std::span<const double> p) const;

  ModelConfig config_;
  ModelDims dims_;
  ParamSet params_;

  Dense projection_;
  Dense post_;
  ConditioningBlock conditioning_;
  Dense output_;
  LstmCell lstm_;
  EdEncoder encoder_;
  LruCell lru_;
  S4dCell s4d_;
  S6Cell s6_;
};

inline std::size_t count_params(const Model& m) { return m.count_params(); }
inline FlopsBreakdown count_flops(const Model& m) { return m.count_flops(); }

}  // namespace vafx
