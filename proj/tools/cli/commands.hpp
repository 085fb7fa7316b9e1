// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "vafx/dataset.hpp"
#include "vafx/error.hpp"
#include "vafx/metrics.hpp"
#include "vafx/model.hpp"
#include "vafx/training.hpp"

namespace vafx::cli {

namespace fs = std::filesystem;

inline constexpr const char* kToolVersion = "0.1.0";

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitOther = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitFormat = 3;
inline constexpr int kExitNumeric = 4;

int exit_code_for(ErrorKind kind);

struct RunManifest {
  std::string command;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string started_at;
  std::string finished_at;
  std::map<std::string, std::string> artifacts;
  std::string tool_version = kToolVersion;
};

std::string utc_timestamp();
void write_manifest(const RunManifest& m, const fs::path& dir);
RunManifest read_manifest(const fs::path& dir);

// "name=v", "name=v1,v2,..." or "name=min:max:count".
GridAxis parse_grid_axis(const std::string& text, EffectKind effect, double sample_rate);

struct DatasetOptions {
  std::string effect;
  std::vector<std::string> grid;
  fs::path out;
  std::uint64_t seed = 1;
  double duration_s = 45.0;
  double sample_rate = 48000.0;
  bool force = false;
};
Dataset run_dataset(const DatasetOptions& opt);

struct TrainOptions {
  std::string arch = "lstm";
  fs::path dataset;
  fs::path out;
  std::size_t composition = 1;
  std::string config_path;
  TrainConfig train;
  bool quiet = false;
};
std::string format_train_config(const TrainOptions& opt);
TrainResult run_train(const TrainOptions& opt, std::ostream* log = nullptr);

struct EvalRow {
  std::string model;
  std::string dataset;
  std::string split = "test";
  MetricReport metrics;
  std::size_t composition = 1;
  std::string row;  // recording id or "mean"
};

struct EvalOptions {
  fs::path checkpoint;
  fs::path dataset;
  fs::path out;
  std::size_t composition = 1;
  std::string model_name;       // defaults to the architecture name
  bool oracle = false;          // score the target against itself
  bool write_predictions = false;
};
std::vector<EvalRow> run_eval(const EvalOptions& opt);
void write_eval_csv(const std::vector<EvalRow>& rows, const fs::path& path);
std::vector<EvalRow> read_eval_csv(const fs::path& path);

struct RenderOptions {
  fs::path checkpoint;
  fs::path input;
  fs::path out;
  std::vector<double> params;  // fixed conditioning, zeros when empty
  fs::path schedule;           // CSV: time_s followed by one column per parameter
  fs::path run_dir;            // defaults to the output's directory
};
Vector run_render(const RenderOptions& opt);

// Per-sample conditioning from a schedule CSV; each row holds until the next.
std::vector<Vector> load_param_schedule(const fs::path& path, std::size_t cond_dim,
                                        std::size_t length, double sample_rate);

struct BenchmarkReport {
  std::string architecture;
  std::size_t cond_dim = 0;
  std::size_t params = 0;
  FlopsBreakdown flops;
  std::size_t reference_flops = 0;
  double flops_deviation_pct = 0.0;
  double samples_per_second = 0.0;
  double real_time_factor = 0.0;  // at 48 kHz
  std::size_t latency_samples = 64;
  double latency_ms = 0.0;
};

struct BenchmarkOptions {
  fs::path checkpoint;       // or arch + cond_dim with initialized weights
  std::string arch = "lstm";
  std::size_t cond_dim = 2;
  double seconds = 2.0;      // audio processed per measurement
  fs::path out;
};
BenchmarkReport run_benchmark(const BenchmarkOptions& opt);
BenchmarkReport measure_model(const Model& model, double seconds);

struct CompareOptions {
  std::vector<std::string> inputs;  // paths or glob patterns
  fs::path out;
};

struct FriedmanRow {
  std::string dataset;
  std::string metric;
  std::size_t models = 0;
  std::size_t compositions = 0;
  bool computed = false;
  double statistic = 0.0;
  double p_value = 1.0;
  std::string method;
  std::string note;
};

struct WilcoxonRow {
  std::string dataset;
  std::string metric;
  std::string model_a;
  std::string model_b;
  bool computed = false;
  double statistic = 0.0;
  double p_value = 1.0;
  std::string method;
  std::string note;
};

struct CompareReport {
  std::vector<FriedmanRow> friedman;
  std::vector<WilcoxonRow> wilcoxon;
};
CompareReport run_compare(const CompareOptions& opt);
CompareReport compare_rows(const std::vector<EvalRow>& rows);

// Full command line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vafx::cli
