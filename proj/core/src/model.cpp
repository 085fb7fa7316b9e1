// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "vafx/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "vafx/error.hpp"
#include "vafx/rng.hpp"

namespace vafx {

std::string_view to_string(Architecture arch) {
  switch (arch) {
    case Architecture::kLstm: return "LSTM";
    case Architecture::kEd: return "ED";
    case Architecture::kLru: return "LRU";
    case Architecture::kS4d: return "S4D";
    case Architecture::kS6: return "S6";
  }
  return "?";
}

Architecture parse_architecture(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (Architecture a : kAllArchitectures) {
    if (upper == to_string(a)) return a;
  }
  throw InputError("unknown architecture '" + std::string(name) +
                   "' (expected LSTM, ED, LRU, S4D or S6)");
}

ModelDims dims_for(Architecture arch) {
  ModelDims d;
  switch (arch) {
    case Architecture::kLstm:
      d.projection = 4;
      d.projection_inputs = kWindowSize;
      d.states = 8;
      d.cell_output = 8;
      break;
    case Architecture::kEd:
      d.projection = 4;
      d.projection_inputs = kWindowSize / 2;
      d.states = 8;
      d.cell_output = 8;
      d.ed_channels = 2;
      d.ed_kernel = 8;
      break;
    case Architecture::kLru:
    case Architecture::kS4d:
    case Architecture::kS6:
      d.projection = 6;
      d.projection_inputs = kWindowSize;
      d.states = 12;
      d.cell_output = 6;
      d.post_tanh = true;
      break;
  }
  return d;
}

void ModelConfig::validate() const {
  if (!param_labels.empty() && param_labels.size() != cond_dim) {
    throw InputError("model config: " + std::to_string(param_labels.size()) +
                     " parameter labels for cond_dim " + std::to_string(cond_dim));
  }
  if (!(sample_rate > 0.0)) throw InputError("model config: sample rate must be positive");
}

ParamSet make_param_layout(const ModelConfig& config) {
  config.validate();
  const ModelDims d = dims_for(config.architecture);
  const std::size_t P = d.projection;
  const std::size_t N = d.states;
  ParamSet ps;
  if (config.architecture == Architecture::kEd) {
    ps.add("dec.W", {P, d.projection_inputs});
    ps.add("dec.b", {P});
    ps.add("enc_h.W", {d.ed_channels, d.ed_kernel});
    ps.add("enc_h.b", {d.ed_channels});
    ps.add("enc_c.W", {d.ed_channels, d.ed_kernel});
    ps.add("enc_c.b", {d.ed_channels});
  } else {
    ps.add("proj.W", {P, d.projection_inputs});
    ps.add("proj.b", {P});
  }
  switch (config.architecture) {
    case Architecture::kLstm:
    case Architecture::kEd:
      ps.add("lstm.W", {4 * N, N});
      ps.add("lstm.U", {4 * N, P});
      ps.add("lstm.b", {4 * N});
      break;
    case Architecture::kLru:
      ps.add("lru.nu", {N});
      ps.add("lru.theta", {N});
      ps.add("lru.U.re", {N, P});
      ps.add("lru.U.im", {N, P});
      ps.add("lru.b.re", {N});
      ps.add("lru.b.im", {N});
      ps.add("lru.W.re", {d.cell_output, N});
      ps.add("lru.W.im", {d.cell_output, N});
      ps.add("lru.bo", {d.cell_output});
      break;
    case Architecture::kS4d:
      ps.add("s4d.A_log_re", {N});
      ps.add("s4d.A_im", {N});
      ps.add("s4d.log_dt", {N});
      ps.add("s4d.B.re", {N, P});
      ps.add("s4d.B.im", {N, P});
      ps.add("s4d.C.re", {d.cell_output, N});
      ps.add("s4d.C.im", {d.cell_output, N});
      ps.add("s4d.D", {d.cell_output});
      break;
    case Architecture::kS6:
      ps.add("s6.A_log", {N});
      ps.add("s6.dt.w", {P});
      ps.add("s6.dt.b", {1});
      ps.add("s6.Bmap.W", {N, P});
      ps.add("s6.Bmap.b", {N});
      ps.add("s6.Cmap.W", {N, P});
      ps.add("s6.Cmap.b", {N});
      ps.add("s6.Min", {N, P});
      ps.add("s6.Mout", {d.cell_output, N});
      ps.add("s6.D", {d.cell_output});
      break;
  }
  ps.add("post.W", {d.post, d.cell_output});
  ps.add("post.b", {d.post});
  if (config.cond_dim > 0) {
    ps.add("film.W", {2 * kConditionedWidth, config.cond_dim});
    ps.add("film.b", {2 * kConditionedWidth});
  }
  ps.add("glu.W", {2 * kConditionedWidth, kConditionedWidth});
  ps.add("glu.b", {2 * kConditionedWidth});
  ps.add("out.W", {1, kConditionedWidth});
  ps.add("out.b", {1});
  return ps;
}

namespace {

void fill_uniform(Rng& rng, std::vector<double>& v, double bound) {
  for (double& x : v) x = rng.uniform(-bound, bound);
}

void fill_normal(Rng& rng, std::vector<double>& v, double stddev) {
  for (double& x : v) x = rng.normal(0.0, stddev);
}

void glorot(Rng& rng, Tensor& t) {
  const double fan_out = static_cast<double>(t.shape[0]);
  const double fan_in = static_cast<double>(t.shape.size() > 1 ? t.shape[1] : 1);
  fill_uniform(rng, t.values, std::sqrt(6.0 / (fan_in + fan_out)));
}

}  // namespace

void initialize_params(ParamSet& ps, const ModelConfig& config, const InitConfig& init) {
  if (!ps.same_layout(make_param_layout(config))) {
    throw InputError("initialize_params: parameter layout does not match the configuration");
  }
  ps.fill(0.0);
  Rng rng(init.seed);
  const ModelDims d = dims_for(config.architecture);
  const double N = static_cast<double>(d.states);
  const double I = static_cast<double>(d.projection);

  if (config.architecture == Architecture::kEd) {
    glorot(rng, ps.at("dec.W"));
    const double bound = 1.0 / std::sqrt(static_cast<double>(d.ed_kernel));
    fill_uniform(rng, ps.at("enc_h.W").values, bound);
    fill_uniform(rng, ps.at("enc_c.W").values, bound);
  } else {
    glorot(rng, ps.at("proj.W"));
  }

  switch (config.architecture) {
    case Architecture::kLstm:
    case Architecture::kEd: {
      const double bound = 1.0 / std::sqrt(N);
      fill_uniform(rng, ps.at("lstm.W").values, bound);
      fill_uniform(rng, ps.at("lstm.U").values, bound);
      fill_uniform(rng, ps.at("lstm.b").values, bound);
      break;
    }
    case Architecture::kLru: {
      auto& nu = ps.at("lru.nu").values;
      auto& theta = ps.at("lru.theta").values;
      for (std::size_t k = 0; k < nu.size(); ++k) {
        const double r = rng.uniform(init.lru_r_min, init.lru_r_max);
        nu[k] = std::log(-std::log(r));
        theta[k] = rng.uniform(0.0, init.lru_max_phase);
      }
      const double sb = 1.0 / std::sqrt(2.0 * I);
      fill_normal(rng, ps.at("lru.U.re").values, sb);
      fill_normal(rng, ps.at("lru.U.im").values, sb);
      const double sc = 1.0 / std::sqrt(N);
      fill_normal(rng, ps.at("lru.W.re").values, sc);
      fill_normal(rng, ps.at("lru.W.im").values, sc);
      break;
    }
    case Architecture::kS4d: {
      auto& are = ps.at("s4d.A_log_re").values;
      auto& aim = ps.at("s4d.A_im").values;
      auto& ldt = ps.at("s4d.log_dt").values;
      for (std::size_t k = 0; k < are.size(); ++k) {
        are[k] = std::log(0.5);
        aim[k] = std::numbers::pi * static_cast<double>(k);
        ldt[k] = rng.uniform(std::log(init.dt_min), std::log(init.dt_max));
      }
      const double sb = 1.0 / std::sqrt(2.0 * I);
      fill_normal(rng, ps.at("s4d.B.re").values, sb);
      fill_normal(rng, ps.at("s4d.B.im").values, sb);
      const double sc = 1.0 / std::sqrt(N);
      fill_normal(rng, ps.at("s4d.C.re").values, sc);
      fill_normal(rng, ps.at("s4d.C.im").values, sc);
      fill_normal(rng, ps.at("s4d.D").values, 1.0 / std::sqrt(I));
      break;
    }
    case Architecture::kS6: {
      auto& alog = ps.at("s6.A_log").values;
      for (std::size_t k = 0; k < alog.size(); ++k) alog[k] = std::log(static_cast<double>(k + 1));
      const double dt0 = std::exp(rng.uniform(std::log(init.dt_min), std::log(init.dt_max)));
      ps.at("s6.dt.b").values[0] = std::log(std::expm1(dt0));
      const double small = 0.1 / std::sqrt(I);
      fill_uniform(rng, ps.at("s6.dt.w").values, small);
      fill_uniform(rng, ps.at("s6.Bmap.W").values, small);
      fill_uniform(rng, ps.at("s6.Cmap.W").values, small);
      std::fill(ps.at("s6.Bmap.b").values.begin(), ps.at("s6.Bmap.b").values.end(), 1.0);
      std::fill(ps.at("s6.Cmap.b").values.begin(), ps.at("s6.Cmap.b").values.end(), 1.0);
      glorot(rng, ps.at("s6.Min"));
      glorot(rng, ps.at("s6.Mout"));
      fill_normal(rng, ps.at("s6.D").values, 1.0 / std::sqrt(I));
      break;
    }
  }

  glorot(rng, ps.at("post.W"));
  if (config.cond_dim > 0) {
    // Start as the identity modulation: theta = 1, eta = 0.
    fill_uniform(rng, ps.at("film.W").values, 0.1);
    auto& fb = ps.at("film.b").values;
    for (std::size_t k = 0; k < kConditionedWidth; ++k) fb[k] = 1.0;
  }
  glorot(rng, ps.at("glu.W"));
  auto& gb = ps.at("glu.b").values;
  for (std::size_t k = kConditionedWidth; k < 2 * kConditionedWidth; ++k) gb[k] = init.gate_bias;
  glorot(rng, ps.at("out.W"));
}

Vector conditioning_apply(const ConditioningBlock& cb, std::span<const double> o,
                          std::span<const double> p) {
  constexpr std::size_t W = kConditionedWidth;
  if (o.size() != W) throw DimensionError("conditioning: expected a 4-wide input");
  double q[W];
  if (cb.cond_dim == 0) {
    std::copy(o.begin(), o.end(), q);
  } else {
    if (p.size() != cb.cond_dim) {
      throw DimensionError("conditioning: expected " + std::to_string(cb.cond_dim) +
                           " parameters, got " + std::to_string(p.size()));
    }
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (!(p[j] >= 0.0 && p[j] <= 1.0)) {
        std::ostringstream os;
        os << "conditioning: parameter " << j << " = " << p[j] << " is outside [0, 1]";
        throw InputError(os.str());
      }
    }
    double film[2 * W];
    affine(cb.film.weight, cb.film.bias, p, film);
    for (std::size_t k = 0; k < W; ++k) q[k] = film[k] * o[k] + film[W + k];
  }
  double g[2 * W];
  affine(cb.glu.weight, cb.glu.bias, std::span<const double>(q, W), g);
  Vector out(W);
  for (std::size_t k = 0; k < W; ++k) out[k] = g[k] * softsign(g[W + k]);
  return out;
}

Model::Model(ModelConfig config) : Model(config, make_param_layout(config)) {}

Model::Model(ModelConfig config, ParamSet params)
    : config_(std::move(config)), dims_(dims_for(config_.architecture)), params_(std::move(params)) {
  if (!params_.same_layout(make_param_layout(config_))) {
    throw CompatibilityError("model weights do not match the " +
                             std::string(to_string(config_.architecture)) + " layout with P = " +
                             std::to_string(config_.cond_dim));
  }
  refresh();
}

Model Model::initialized(ModelConfig config, const InitConfig& init) {
  ParamSet ps = make_param_layout(config);
  initialize_params(ps, config, init);
  return Model(std::move(config), std::move(ps));
}

void Model::set_params(ParamSet params) {
  if (!params.same_layout(params_)) throw CompatibilityError("set_params: layout mismatch");
  params_ = std::move(params);
  refresh();
}

namespace {

Dense make_dense(const ParamSet& ps, const std::string& w, const std::string& b) {
  const Tensor& tw = ps.at(w);
  Dense d(tw.shape[0], tw.shape[1]);
  d.weight = tw.values;
  d.bias = ps.at(b).values;
  return d;
}

ComplexVector make_complex(const ParamSet& ps, const std::string& re, const std::string& im) {
  const auto& r = ps.at(re).values;
  const auto& i = ps.at(im).values;
  ComplexVector out(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) out[k] = Complex(r[k], i[k]);
  return out;
}

}  // namespace

void Model::refresh() {
  const ParamSet& ps = params_;
  for (const Tensor& t : ps) {
    for (double v : t.values) {
      if (!std::isfinite(v)) throw NumericError("weight tensor " + t.name + " is not finite");
    }
  }
  const std::size_t N = dims_.states;
  const std::size_t I = dims_.projection;
  const std::size_t O = dims_.cell_output;

  if (config_.architecture == Architecture::kEd) {
    projection_ = make_dense(ps, "dec.W", "dec.b");
    encoder_ = EdEncoder(dims_.ed_channels, dims_.ed_kernel);
    encoder_.h_kernel = ps.at("enc_h.W").values;
    encoder_.h_bias = ps.at("enc_h.b").values;
    encoder_.c_kernel = ps.at("enc_c.W").values;
    encoder_.c_bias = ps.at("enc_c.b").values;
  } else {
    projection_ = make_dense(ps, "proj.W", "proj.b");
  }

  switch (config_.architecture) {
    case Architecture::kLstm:
    case Architecture::kEd:
      lstm_ = LstmCell(N, I);
      lstm_.recurrent = ps.at("lstm.W").values;
      lstm_.input = ps.at("lstm.U").values;
      lstm_.bias = ps.at("lstm.b").values;
      break;
    case Architecture::kLru: {
      ComplexVector lambda = lru_eigenvalues(ps.at("lru.nu").values, ps.at("lru.theta").values);
      lru_ = LruCell::from_eigenvalues(std::move(lambda), make_complex(ps, "lru.U.re", "lru.U.im"),
                                       make_complex(ps, "lru.b.re", "lru.b.im"),
                                       make_complex(ps, "lru.W.re", "lru.W.im"),
                                       ps.at("lru.bo").values, I, O);
      break;
    }
    case Architecture::kS4d: {
      const auto& are = ps.at("s4d.A_log_re").values;
      const auto& aim = ps.at("s4d.A_im").values;
      const auto& ldt = ps.at("s4d.log_dt").values;
      ComplexVector a(N);
      Vector delta(N);
      for (std::size_t k = 0; k < N; ++k) {
        a[k] = Complex(-std::exp(are[k]), aim[k]);
        delta[k] = std::exp(ldt[k]);
      }
      S4dDiscrete disc = s4d_discretize(a, make_complex(ps, "s4d.B.re", "s4d.B.im"), delta, I);
      for (std::size_t k = 0; k < N; ++k) {
        if (!(std::abs(disc.a_bar[k]) < 1.0)) {
          throw StabilityError("s4d: discretized pole " + std::to_string(k) +
                               " is not inside the unit circle");
        }
      }
      s4d_.states = N;
      s4d_.inputs = I;
      s4d_.outputs = O;
      s4d_.a_bar = std::move(disc.a_bar);
      s4d_.b_bar = std::move(disc.b_bar);
      s4d_.c = make_complex(ps, "s4d.C.re", "s4d.C.im");
      s4d_.d = ps.at("s4d.D").values;
      break;
    }
    case Architecture::kS6: {
      const auto& alog = ps.at("s6.A_log").values;
      s6_.states = N;
      s6_.inputs = I;
      s6_.outputs = O;
      s6_.a.resize(N);
      for (std::size_t k = 0; k < N; ++k) s6_.a[k] = -std::exp(alog[k]);
      s6_.dt_weight = ps.at("s6.dt.w").values;
      s6_.dt_bias = ps.at("s6.dt.b").values[0];
      s6_.b_weight = ps.at("s6.Bmap.W").values;
      s6_.b_bias = ps.at("s6.Bmap.b").values;
      s6_.c_weight = ps.at("s6.Cmap.W").values;
      s6_.c_bias = ps.at("s6.Cmap.b").values;
      s6_.in_mix = ps.at("s6.Min").values;
      s6_.out_mix = ps.at("s6.Mout").values;
      s6_.d = ps.at("s6.D").values;
      for (double a : s6_.a) {
        if (!(a < 0.0)) throw StabilityError("s6: state decay rate must be negative");
      }
      break;
    }
  }

  post_ = make_dense(ps, "post.W", "post.b");
  conditioning_.cond_dim = config_.cond_dim;
  if (config_.cond_dim > 0) {
    conditioning_.film = make_dense(ps, "film.W", "film.b");
  } else {
    conditioning_.film = Dense();
  }
  conditioning_.glu = make_dense(ps, "glu.W", "glu.b");
  output_ = make_dense(ps, "out.W", "out.b");
}

RecurrentState Model::initial_state() const {
  RecurrentState s;
  s.architecture = config_.architecture;
  s.initialized = true;
  s.history.assign(kHistorySize, 0.0);
  const std::size_t N = dims_.states;
  switch (config_.architecture) {
    case Architecture::kLstm:
    case Architecture::kEd:
      s.cell = LstmState{Vector(N, 0.0), Vector(N, 0.0)};
      break;
    case Architecture::kLru:
      s.cell = LruState{ComplexVector(N)};
      break;
    case Architecture::kS4d:
      s.cell = SsmState{ComplexVector(N)};
      break;
    case Architecture::kS6:
      s.cell = S6State{Vector(N, 0.0)};
      break;
  }
  return s;
}

void Model::check_state(const RecurrentState& state) const {
  if (!state.initialized) throw StateError("recurrent state is not initialized");
  if (state.architecture != config_.architecture) {
    throw StateError("recurrent state belongs to a " + std::string(to_string(state.architecture)) +
                     " model, not " + std::string(to_string(config_.architecture)));
  }
  if (state.history.size() != kHistorySize) throw StateError("recurrent state history is corrupt");
}

double Model::head(std::span<const double> cell_out, std::span<const double> p) const {
  double o[4];
  post_.apply_into(cell_out, o);
  if (dims_.post_tanh) {
    for (double& v : o) v = std::tanh(v);
  }
  const Vector oc = conditioning_apply(conditioning_, o, p);
  double y = output_.bias[0];
  for (std::size_t k = 0; k < kConditionedWidth; ++k) y += output_.weight[k] * oc[k];
  return y;
}

double Model::forward_sample(RecurrentState& state, std::span<const double> window,
                             std::span<const double> p) const {
  check_state(state);
  if (window.size() != kWindowSize) {
    throw DimensionError("forward_sample: window must hold 64 samples");
  }
  double y = 0.0;
  switch (config_.architecture) {
    case Architecture::kLstm: {
      const Vector u = projection_.apply(window);
      auto& st = std::get<LstmState>(state.cell);
      st = lstm_step(lstm_, st, u);
      y = head(st.h, p);
      break;
    }
    case Architecture::kEd: {
      const std::size_t half = kWindowSize / 2;
      const Vector u = projection_.apply(window.first(half));
      const EdCandidates cand = ed_encode(encoder_, window.subspan(half));
      auto& st = std::get<LstmState>(state.cell);
      st = lstm_step(lstm_, ed_state_merge(st, cand.h, cand.c), u);
      y = head(st.h, p);
      break;
    }
    case Architecture::kLru: {
      const Vector u = projection_.apply(window);
      auto& st = std::get<LruState>(state.cell);
      LruStep step = lru_step(lru_, st, u);
      st = std::move(step.state);
      y = head(step.output, p);
      break;
    }
    case Architecture::kS4d: {
      const Vector u = projection_.apply(window);
      auto& st = std::get<SsmState>(state.cell);
      SsmStep step = s4d_step(s4d_, st, u);
      st = std::move(step.state);
      y = head(step.output, p);
      break;
    }
    case Architecture::kS6: {
      const Vector u = projection_.apply(window);
      auto& st = std::get<S6State>(state.cell);
      S6Step step = s6_step(s6_, st, u);
      st = std::move(step.state);
      y = head(step.output, p);
      break;
    }
  }
  for (std::size_t j = 0; j < kHistorySize; ++j) state.history[j] = window[kHistorySize - 1 - j];
  return y;
}

double Model::process_sample(RecurrentState& state, double x, std::span<const double> p) const {
  check_state(state);
  double window[kWindowSize];
  window[0] = x;
  for (std::size_t j = 1; j < kWindowSize; ++j) window[j] = state.history[kHistorySize - j];
  return forward_sample(state, window, p);
}

Vector Model::forward_segment(RecurrentState& state, std::span<const double> input,
                              std::span<const double> p) const {
  Vector y(input.size());
  for (std::size_t n = 0; n < input.size(); ++n) y[n] = process_sample(state, input[n], p);
  return y;
}

}  // namespace vafx
