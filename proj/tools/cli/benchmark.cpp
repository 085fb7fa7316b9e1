// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <chrono>
#include <fstream>

#include "commands.hpp"
#include "json.hpp"
#include "vafx/checkpoint.hpp"
#include "vafx/rng.hpp"

namespace vafx::cli {

BenchmarkReport measure_model(const Model& model, double seconds) {
  constexpr double kRate = 48000.0;
  const auto n = static_cast<std::size_t>(std::max(1.0, seconds * kRate));
  Rng rng(1);
  Vector x(n);
  for (double& v : x) v = rng.uniform(-0.5, 0.5);
  const Vector p(model.config().cond_dim, 0.5);

  double best = 0.0;
  double sink = 0.0;
  for (int rep = 0; rep < 3; ++rep) {
    RecurrentState st = model.initial_state();
    const auto t0 = std::chrono::steady_clock::now();
    for (double v : x) sink += model.process_sample(st, v, p);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    best = std::max(best, static_cast<double>(n) / dt);
  }
  if (!std::isfinite(sink)) throw NumericError("benchmark produced a non-finite output");

  BenchmarkReport r;
  r.architecture = std::string(to_string(model.architecture()));
  r.cond_dim = model.config().cond_dim;
  r.params = model.count_params();
  r.flops = model.count_flops();
  r.reference_flops = reference_total_flops(model.architecture());
  r.flops_deviation_pct = 100.0 * (static_cast<double>(r.flops.total) - static_cast<double>(r.reference_flops)) /
                          static_cast<double>(r.reference_flops);
  r.samples_per_second = best;
  r.real_time_factor = best / kRate;
  r.latency_samples = 64;
  r.latency_ms = 1000.0 * 64.0 / kRate;
  return r;
}

BenchmarkReport run_benchmark(const BenchmarkOptions& opt) {
  RunManifest manifest;
  manifest.command = "benchmark";
  manifest.started_at = utc_timestamp();
  if (!(opt.seconds > 0.0)) throw UsageError("benchmark: --seconds must be positive");

  Model model = [&] {
    if (!opt.checkpoint.empty()) return load_checkpoint(opt.checkpoint).to_model();
    Architecture arch;
    try {
      arch = parse_architecture(opt.arch);
    } catch (const InputError& e) {
      throw UsageError(e.what());
    }
    ModelConfig mc;
    mc.architecture = arch;
    mc.cond_dim = opt.cond_dim;
    return Model::initialized(mc, {});
  }();
  const BenchmarkReport r = measure_model(model, opt.seconds);

  if (!opt.out.empty()) {
    nlohmann::json j;
    j["architecture"] = r.architecture;
    j["cond_dim"] = r.cond_dim;
    j["params"] = r.params;
    j["flops"] = {{"convention", r.flops.convention},
                  {"input_projection", r.flops.input_projection},
                  {"recurrent_layer", r.flops.recurrent_layer},
                  {"post_fc", r.flops.post_fc},
                  {"conditioning_block", r.flops.conditioning_block},
                  {"output_layer", r.flops.output_layer},
                  {"total", r.flops.total},
                  {"reference_total", r.reference_flops},
                  {"deviation_pct", r.flops_deviation_pct},
                  {"budget", kFlopsBudget}};
    j["samples_per_second"] = r.samples_per_second;
    j["real_time_factor_48k"] = r.real_time_factor;
    j["latency_samples"] = r.latency_samples;
    j["latency_ms"] = r.latency_ms;
    fs::create_directories(opt.out);
    std::ofstream os(opt.out / "benchmark.json", std::ios::trunc);
    if (!os) throw FormatError("cannot write " + (opt.out / "benchmark.json").string());
    os << j.dump(2) << "\n";
    manifest.artifacts["report"] = (opt.out / "benchmark.json").string();
    if (!opt.checkpoint.empty()) manifest.artifacts["checkpoint"] = opt.checkpoint.string();
    manifest.finished_at = utc_timestamp();
    write_manifest(manifest, opt.out);
  }
  return r;
}

}  // namespace vafx::cli
