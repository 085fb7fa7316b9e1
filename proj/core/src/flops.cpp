// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "vafx/model.hpp"

namespace vafx {

namespace {

constexpr std::size_t kSigmoid = 4;
constexpr std::size_t kTanh = 5;
constexpr std::size_t kSoftsign = 3;
constexpr std::size_t kSoftplus = 3;
constexpr std::size_t kExp = 1;
constexpr std::size_t kComplexMul = 6;
constexpr std::size_t kComplexAdd = 2;
constexpr std::size_t kComplexRealMac = 2;
constexpr std::size_t kComplexReMac = 2;

// rows x cols weights plus bias.
constexpr std::size_t dense(std::size_t rows, std::size_t cols) { return rows * cols + rows; }

std::size_t lstm_flops(std::size_t H, std::size_t I) {
  const std::size_t gates = dense(4 * H, H + I) + 3 * H * kSigmoid + H * kTanh;
  const std::size_t update = 3 * H + H * kTanh + H;  // f*c + i*g, tanh(c), o*tanh(c)
  return gates + update;
}

}  // namespace

FlopsBreakdown count_flops(const ModelConfig& config) {
  const ModelDims d = dims_for(config.architecture);
  const std::size_t N = d.states;
  const std::size_t I = d.projection;
  const std::size_t O = d.cell_output;
  constexpr std::size_t W = kConditionedWidth;

  FlopsBreakdown f;
  f.convention = std::string(kFlopsConvention);
  f.input_projection = dense(I, d.projection_inputs);

  switch (config.architecture) {
    case Architecture::kLstm:
      f.recurrent_layer = lstm_flops(N, I);
      break;
    case Architecture::kEd: {
      const std::size_t half = kWindowSize / 2;
      const std::size_t positions = half / d.ed_kernel;
      const std::size_t encoder = 2 * (d.ed_channels * positions * d.ed_kernel + d.ed_channels * positions);
      const std::size_t merge = 2 * N * (kSigmoid + 1);
      f.recurrent_layer = encoder + merge + lstm_flops(N, I);
      break;
    }
    case Architecture::kLru:
      // Normalization gamma is folded into U when weights change.
      f.recurrent_layer = N * I * kComplexRealMac + N * kComplexMul + 2 * N * kComplexAdd +
                          O * N * kComplexReMac + O;
      break;
    case Architecture::kS4d:
      f.recurrent_layer = N * I * kComplexRealMac + N * kComplexMul + N * kComplexAdd +
                          O * N * kComplexReMac + 2 * O;
      break;
    case Architecture::kS6: {
      const std::size_t step = (I + 1) + kSoftplus;
      const std::size_t maps = 2 * dense(N, I) + N * I;
      const std::size_t discretize = N * (1 + kExp) + 2 * N;
      const std::size_t update = 4 * N + N;  // a*h + beta*b*v, then c*h
      const std::size_t readout = O * N + 2 * O;
      f.recurrent_layer = step + maps + discretize + update + readout;
      break;
    }
  }

  f.post_fc = dense(d.post, O) + (d.post_tanh ? d.post * kTanh : 0);
  const std::size_t film = config.cond_dim > 0 ? dense(2 * W, config.cond_dim) + 2 * W : 0;
  f.conditioning_block = film + dense(2 * W, W) + W * kSoftsign + W;
  f.output_layer = dense(1, W);
  f.total = f.input_projection + f.recurrent_layer + f.post_fc + f.conditioning_block + f.output_layer;
  return f;
}

std::size_t reference_total_flops(Architecture arch) {
  switch (arch) {
    case Architecture::kLstm: return 1160;
    case Architecture::kEd: return 1048;
    case Architecture::kLru: return 812;
    case Architecture::kS4d: return 912;
    case Architecture::kS6: return 984;
  }
  return 0;
}

}  // namespace vafx
