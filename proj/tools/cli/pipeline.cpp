// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "commands.hpp"
#include "vafx/checkpoint.hpp"
#include "vafx/effects.hpp"
#include "vafx/splits.hpp"
#include "vafx/wav.hpp"

namespace vafx::cli {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw FormatError("cannot write " + path.string());
  os << text;
  if (!os) throw FormatError("failed writing " + path.string());
}

bool non_empty_dir(const fs::path& dir) {
  return fs::exists(dir) && fs::is_directory(dir) && !fs::is_empty(dir);
}

void check_composition(std::size_t c) {
  if (c < 1 || c > 5) throw UsageError("composition index must be 1 to 5, got " + std::to_string(c));
}

// Dataset names must survive the comma-separated report formats.
std::string csv_safe(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '"') ch = '_';
  }
  return s;
}

std::vector<SplitComposition> compositions_for(const Dataset& ds) {
  SplitOptions so;
  so.sample_rate = ds.sample_rate;
  return make_split_compositions(ds.recordings, 5, so);
}

}  // namespace

Dataset run_dataset(const DatasetOptions& opt) {
  RunManifest manifest;
  manifest.command = "dataset";
  manifest.seed = opt.seed;
  manifest.started_at = utc_timestamp();

  EffectKind kind;
  try {
    kind = parse_effect(opt.effect);
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  if (opt.out.empty()) throw UsageError("dataset: --out is required");
  if (non_empty_dir(opt.out) && !opt.force) {
    throw UsageError(opt.out.string() + " is not empty; pass --force to overwrite");
  }
  DatasetSpec spec;
  spec.effect = kind;
  for (const std::string& g : opt.grid) spec.axes.push_back(parse_grid_axis(g, kind, opt.sample_rate));
  spec.signal.duration_s = opt.duration_s;
  spec.signal.sample_rate = opt.sample_rate;
  spec.signal.seed = opt.seed;
  Dataset ds = build_dataset(spec);

  if (opt.force && fs::exists(opt.out)) {
    // Drop files a previous, larger grid may have left behind.
    for (const auto& entry : fs::directory_iterator(opt.out)) {
      const std::string name = entry.path().filename().string();
      if (entry.is_regular_file() && (name.rfind("combo_", 0) == 0 || name == "dataset.json")) {
        fs::remove(entry.path());
      }
    }
  }
  write_dataset(ds, opt.out);
  manifest.artifacts["index"] = (opt.out / "dataset.json").string();
  manifest.artifacts["combinations"] = std::to_string(ds.recordings.size());
  manifest.finished_at = utc_timestamp();
  write_manifest(manifest, opt.out);
  return ds;
}

std::string format_train_config(const TrainOptions& opt) {
  const TrainConfig& t = opt.train;
  std::ostringstream os;
  os << "# vafx train configuration\n"
     << "arch = " << opt.arch << "\n"
     << "composition = " << opt.composition << "\n"
     << "lr = " << num(t.initial_lr) << "\n"
     << "decay_base = " << num(t.decay_base) << "\n"
     << "schedule = " << to_string(t.schedule) << "\n"
     << "decay_every = " << t.decay_every << "\n"
     << "max_epochs = " << t.max_epochs << "\n"
     << "patience = " << t.patience << "\n"
     << "segment = " << t.segment_len << "\n"
     << "batch = " << t.batch_size << "\n"
     << "clip = " << num(t.clip_norm) << "\n"
     << "seed = " << t.seed << "\n"
     << "# window = 64 (fixed by the architecture)\n";
  return os.str();
}

TrainResult run_train(const TrainOptions& opt, std::ostream* log) {
  RunManifest manifest;
  manifest.command = "train";
  manifest.config_path = opt.config_path;
  manifest.seed = opt.train.seed;
  manifest.started_at = utc_timestamp();

  check_composition(opt.composition);
  Architecture arch;
  try {
    arch = parse_architecture(opt.arch);
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  if (opt.out.empty()) throw UsageError("train: --out is required");
  try {
    opt.train.validate();
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }

  const Dataset ds = read_dataset(opt.dataset);
  const std::vector<SplitComposition> comps = compositions_for(ds);
  const SplitComposition& comp = comps[opt.composition - 1];
  if (log) {
    for (const std::string& w : comp.warnings) *log << "warning: " << w << "\n";
  }
  const TrainingData data = make_training_data(ds, comp);

  ModelConfig mc;
  mc.architecture = arch;
  mc.cond_dim = ds.cond_dim();
  mc.sample_rate = ds.sample_rate;
  mc.param_labels = ds.param_labels;
  InitConfig init;
  init.seed = opt.train.seed;
  Model model = Model::initialized(mc, init);

  fs::create_directories(opt.out);
  write_file(opt.out / "config.txt", format_train_config(opt));

  TrainResult result = train(std::move(model), data, opt.train, [&](const EpochReport& r) {
    if (log && !opt.quiet) {
      *log << "epoch " << r.epoch << "  train " << num(r.train_loss) << "  val " << num(r.val_loss)
           << "  lr " << num(r.lr) << (r.improved ? "  *" : "") << "\n";
      log->flush();
    }
  });

  const TrainHistory& h = result.history;
  std::ostringstream csv;
  csv << "epoch,train_loss,val_loss,lr\n";
  for (std::size_t e = 0; e < h.train_loss.size(); ++e) {
    csv << e << "," << num(h.train_loss[e]) << "," << num(h.val_loss[e]) << "," << num(h.lr[e]) << "\n";
  }
  write_file(opt.out / "history.csv", csv.str());

  Checkpoint ckpt = Checkpoint::from_model(result.model);
  ckpt.history.train_loss = h.train_loss;
  ckpt.history.val_loss = h.val_loss;
  ckpt.history.lr = h.lr;
  ckpt.best_epoch = h.train_loss.empty() ? -1 : static_cast<std::int64_t>(h.best_epoch);
  save_checkpoint(ckpt, opt.out / "model.ckpt");

  manifest.artifacts["checkpoint"] = (opt.out / "model.ckpt").string();
  manifest.artifacts["history"] = (opt.out / "history.csv").string();
  manifest.artifacts["config"] = (opt.out / "config.txt").string();
  manifest.artifacts["dataset"] = opt.dataset.string();
  manifest.finished_at = utc_timestamp();
  write_manifest(manifest, opt.out);
  if (log && !h.message.empty()) *log << h.message << "\n";
  return result;
}

std::vector<EvalRow> run_eval(const EvalOptions& opt) {
  RunManifest manifest;
  manifest.command = "eval";
  manifest.started_at = utc_timestamp();
  check_composition(opt.composition);

  const Checkpoint ckpt = load_checkpoint(opt.checkpoint);
  const Dataset ds = read_dataset(opt.dataset);
  const ModelConfig& mc = ckpt.config;
  if (mc.cond_dim != ds.cond_dim()) {
    throw CompatibilityError("checkpoint expects " + std::to_string(mc.cond_dim) +
                             " conditioning parameters, dataset provides " +
                             std::to_string(ds.cond_dim()));
  }
  if (!mc.param_labels.empty() && mc.param_labels != ds.param_labels) {
    throw CompatibilityError("checkpoint and dataset conditioning parameters differ");
  }
  if (mc.sample_rate != ds.sample_rate) {
    throw CompatibilityError("checkpoint sample rate " + num(mc.sample_rate) + " differs from dataset " +
                             num(ds.sample_rate));
  }
  const Model model = ckpt.to_model();
  const std::vector<SplitComposition> comps = compositions_for(ds);
  const std::vector<StreamView> streams = make_test_streams(ds, comps[opt.composition - 1]);

  const std::string model_name =
      csv_safe(opt.model_name.empty() ? std::string(to_string(mc.architecture)) : opt.model_name);
  std::string ds_name = fs::absolute(opt.dataset).lexically_normal().filename().string();
  if (ds_name.empty()) ds_name = fs::absolute(opt.dataset).lexically_normal().parent_path().filename().string();
  ds_name = csv_safe(ds_name);

  std::vector<EvalRow> rows;
  EvalRow mean{model_name, ds_name, "test", {}, opt.composition, "mean"};
  for (std::size_t r = 0; r < streams.size(); ++r) {
    const StreamView& s = streams[r];
    Vector y_hat;
    if (opt.oracle) {
      y_hat.assign(s.target.begin(), s.target.end());
    } else {
      RecurrentState st = model.initial_state();
      y_hat = model.forward_segment(st, s.input, s.params);
    }
    EvalRow row{model_name, ds_name, "test", evaluate_metrics(s.target, y_hat), opt.composition,
                ds.recordings[r].id};
    if (opt.write_predictions && !opt.out.empty()) {
      fs::create_directories(opt.out);
      save_wav(opt.out / (row.row + "_test_input.wav"), s.input, ds.sample_rate);
      save_wav(opt.out / (row.row + "_prediction.wav"), y_hat, ds.sample_rate);
    }
    mean.metrics.mse += row.metrics.mse;
    mean.metrics.esr += row.metrics.esr;
    mean.metrics.nrmse += row.metrics.nrmse;
    mean.metrics.m_sf += row.metrics.m_sf;
    mean.metrics.m_stft += row.metrics.m_stft;
    rows.push_back(std::move(row));
  }
  const double n = static_cast<double>(rows.size());
  mean.metrics.mse /= n;
  mean.metrics.esr /= n;
  mean.metrics.nrmse /= n;
  mean.metrics.m_sf /= n;
  mean.metrics.m_stft /= n;
  rows.push_back(mean);

  if (!opt.out.empty()) {
    fs::create_directories(opt.out);
    write_eval_csv(rows, opt.out / "eval.csv");
    manifest.artifacts["report"] = (opt.out / "eval.csv").string();
    manifest.artifacts["checkpoint"] = opt.checkpoint.string();
    manifest.artifacts["dataset"] = opt.dataset.string();
    manifest.finished_at = utc_timestamp();
    write_manifest(manifest, opt.out);
  }
  return rows;
}

void write_eval_csv(const std::vector<EvalRow>& rows, const fs::path& path) {
  std::ostringstream os;
  os << "model,dataset,split,mse,esr,nrmse,m_sf,m_stft,composition,row\n";
  for (const EvalRow& r : rows) {
    os << r.model << "," << r.dataset << "," << r.split << "," << num(r.metrics.mse) << ","
       << num(r.metrics.esr) << "," << num(r.metrics.nrmse) << "," << num(r.metrics.m_sf) << ","
       << num(r.metrics.m_stft) << "," << r.composition << "," << r.row << "\n";
  }
  write_file(path, os.str());
}

std::vector<EvalRow> read_eval_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != "model,dataset,split,mse,esr,nrmse,m_sf,m_stft,composition,row") {
    throw FormatError(path.string() + ": unexpected header");
  }
  std::vector<EvalRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 10) throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected 10 fields");
    auto number = [&](const std::string& s) {
      double v = 0.0;
      const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) {
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + s + "'");
      }
      return v;
    };
    EvalRow r;
    r.model = f[0];
    r.dataset = f[1];
    r.split = f[2];
    r.metrics.mse = number(f[3]);
    r.metrics.esr = number(f[4]);
    r.metrics.nrmse = number(f[5]);
    r.metrics.m_sf = number(f[6]);
    r.metrics.m_stft = number(f[7]);
    r.composition = static_cast<std::size_t>(number(f[8]));
    r.row = f[9];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<Vector> load_param_schedule(const fs::path& path, std::size_t cond_dim, std::size_t length,
                                        double sample_rate) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw FormatError(path.string() + ": empty schedule");
  std::vector<std::pair<double, Vector>> points;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      double v = 0.0;
      const auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || p != cell.data() + cell.size()) {
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      f.push_back(v);
    }
    if (f.size() != cond_dim + 1) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected time_s plus " +
                        std::to_string(cond_dim) + " parameter columns");
    }
    if (!points.empty() && f[0] < points.back().first) {
      throw FormatError(path.string() + ": times must be non-decreasing");
    }
    points.emplace_back(f[0], Vector(f.begin() + 1, f.end()));
  }
  if (points.empty()) throw FormatError(path.string() + ": schedule has no rows");
  std::vector<Vector> out(length);
  std::size_t k = 0;
  for (std::size_t n = 0; n < length; ++n) {
    const double t = static_cast<double>(n) / sample_rate;
    while (k + 1 < points.size() && points[k + 1].first <= t) ++k;
    out[n] = points[k].second;
  }
  return out;
}

Vector run_render(const RenderOptions& opt) {
  RunManifest manifest;
  manifest.command = "render";
  manifest.started_at = utc_timestamp();
  if (opt.out.empty()) throw UsageError("render: --out is required");
  const Checkpoint ckpt = load_checkpoint(opt.checkpoint);
  const Model model = ckpt.to_model();
  const std::size_t p_dim = model.config().cond_dim;
  const Vector x = load_wav(opt.input, model.config().sample_rate);

  Vector fixed(p_dim, 0.0);
  if (!opt.params.empty()) {
    if (!opt.schedule.empty()) throw UsageError("render: use either --params or --schedule");
    if (opt.params.size() != p_dim) {
      throw UsageError("render: model expects " + std::to_string(p_dim) + " parameters, got " +
                       std::to_string(opt.params.size()));
    }
    fixed = opt.params;
  }
  std::vector<Vector> schedule;
  if (!opt.schedule.empty()) schedule = load_param_schedule(opt.schedule, p_dim, x.size(), model.config().sample_rate);

  RecurrentState st = model.initial_state();
  Vector y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    y[n] = model.process_sample(st, x[n], schedule.empty() ? std::span<const double>(fixed)
                                                           : std::span<const double>(schedule[n]));
  }
  if (opt.out.has_parent_path()) fs::create_directories(opt.out.parent_path());
  save_wav(opt.out, y, model.config().sample_rate);

  const fs::path run_dir = !opt.run_dir.empty() ? opt.run_dir
                           : opt.out.has_parent_path() ? opt.out.parent_path()
                                                       : fs::path(".");
  manifest.artifacts["output"] = opt.out.string();
  manifest.artifacts["input"] = opt.input.string();
  manifest.artifacts["checkpoint"] = opt.checkpoint.string();
  if (!opt.schedule.empty()) manifest.artifacts["schedule"] = opt.schedule.string();
  manifest.finished_at = utc_timestamp();
  write_manifest(manifest, run_dir);
  return y;
}

}  // namespace vafx::cli
