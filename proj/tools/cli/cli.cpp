// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <fstream>
#include <iomanip>
#include <ostream>

#include "CLI11.hpp"
#include "commands.hpp"

namespace vafx::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Flat "key = value" file. Keys name long options with '_' for '-'; options
// given on the command line win.
void apply_config_file(CLI::App& sub, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open config file " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    for (char& c : key) {
      if (c == '_') c = '-';
    }
    CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw UsageError(path + ":" + std::to_string(lineno) + ": unknown key '" + trim(line.substr(0, eq)) + "'");
    }
    if (opt->count() > 0) continue;
    opt->clear();
    opt->add_result(value);
    try {
      opt->run_callback();
    } catch (const CLI::ParseError& e) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void print_benchmark(const BenchmarkReport& r, std::ostream& out) {
  out << "architecture        " << r.architecture << "\n"
      << "parameters          " << r.params << " (P = " << r.cond_dim << ")\n"
      << "flops/sample        " << r.flops.total << " [" << r.flops.convention << "]\n"
      << "  input projection  " << r.flops.input_projection << "\n"
      << "  recurrent layer   " << r.flops.recurrent_layer << "\n"
      << "  post fc           " << r.flops.post_fc << "\n"
      << "  conditioning      " << r.flops.conditioning_block << "\n"
      << "  output layer      " << r.flops.output_layer << "\n"
      << "reference flops     " << r.reference_flops << " (" << std::showpos << std::fixed
      << std::setprecision(1) << r.flops_deviation_pct << std::noshowpos << "%)\n"
      << "samples/s           " << std::setprecision(0) << r.samples_per_second << "\n"
      << "real-time factor    " << std::setprecision(2) << r.real_time_factor << " at 48 kHz\n"
      << "algorithmic latency " << r.latency_samples << " samples (" << std::setprecision(3) << r.latency_ms
      << " ms)\n";
  out << std::defaultfloat;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"vafx: neural virtual-analog effect modeling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  DatasetOptions dso;
  std::string ds_out;
  auto* ds = app.add_subcommand("dataset", "Render an oracle-effect dataset");
  ds->add_option("--effect", dso.effect, "identity, waveshaper, tape_saturator, resonant_lowpass, "
                                         "feedforward_compressor or peaking_eq")->required();
  ds->add_option("--grid", dso.grid, "Parameter grid: name=v, name=v1,v2 or name=min:max:count");
  ds->add_option("--out", ds_out, "Output directory")->required();
  ds->add_option("--seed", dso.seed, "Input-signal seed");
  ds->add_option("--duration", dso.duration_s, "Seconds per recording")->check(CLI::PositiveNumber);
  ds->add_flag("--force", dso.force, "Overwrite a non-empty output directory");
  std::string ds_config;
  ds->add_option("--config", ds_config, "Flat key = value file");

  TrainOptions tro;
  std::string tr_dataset, tr_out, tr_schedule = "staged";
  auto* tr = app.add_subcommand("train", "Train one architecture on one split composition");
  tr->add_option("--arch", tro.arch, "lstm, ed, lru, s4d or s6");
  tr->add_option("--dataset", tr_dataset, "Dataset directory")->required();
  tr->add_option("--composition", tro.composition, "Split composition 1-5");
  tr->add_option("--out", tr_out, "Run directory")->required();
  tr->add_option("--lr", tro.train.initial_lr, "Initial learning rate");
  tr->add_option("--decay-base", tro.train.decay_base, "Learning-rate decay base");
  tr->add_option("--schedule", tr_schedule, "staged or literal");
  tr->add_option("--decay-every", tro.train.decay_every, "Epochs per decay stage");
  tr->add_option("--max-epochs", tro.train.max_epochs, "Epoch limit");
  tr->add_option("--patience", tro.train.patience, "Early-stopping patience");
  tr->add_option("--segment", tro.train.segment_len, "TBPTT segment length");
  tr->add_option("--batch", tro.train.batch_size, "Streams per minibatch");
  tr->add_option("--clip", tro.train.clip_norm, "Global gradient-norm clip");
  tr->add_option("--seed", tro.train.seed, "Initialization and shuffling seed");
  tr->add_flag("--quiet", tro.quiet, "No per-epoch log");
  tr->add_option("--config", tro.config_path, "Flat key = value file");

  EvalOptions evo;
  std::string ev_ckpt, ev_dataset, ev_out;
  auto* ev = app.add_subcommand("eval", "Score a checkpoint on a composition's test split");
  ev->add_option("--checkpoint", ev_ckpt)->required();
  ev->add_option("--dataset", ev_dataset)->required();
  ev->add_option("--composition", evo.composition, "Split composition 1-5");
  ev->add_option("--out", ev_out, "Report directory")->required();
  ev->add_option("--model-name", evo.model_name, "Model column in the report");
  ev->add_flag("--oracle", evo.oracle, "Use the target as the prediction");
  ev->add_flag("--write-predictions", evo.write_predictions, "Save test inputs and predictions as WAV");
  std::string ev_config;
  ev->add_option("--config", ev_config, "Flat key = value file");

  RenderOptions rdo;
  std::string rd_ckpt, rd_in, rd_out, rd_sched, rd_run;
  auto* rd = app.add_subcommand("render", "Process a WAV file sample by sample");
  rd->add_option("--checkpoint", rd_ckpt)->required();
  rd->add_option("--input", rd_in)->required();
  rd->add_option("--out", rd_out)->required();
  rd->add_option("--params", rdo.params, "Fixed normalized conditioning values")->delimiter(',');
  rd->add_option("--schedule", rd_sched, "CSV with time_s and one column per parameter");
  rd->add_option("--run-dir", rd_run, "Manifest directory (default: the output's directory)");
  std::string rd_config;
  rd->add_option("--config", rd_config, "Flat key = value file");

  BenchmarkOptions bmo;
  std::string bm_ckpt, bm_out;
  auto* bm = app.add_subcommand("benchmark", "Throughput, FLOPs and latency report");
  bm->add_option("--checkpoint", bm_ckpt, "Checkpoint; otherwise --arch with initialized weights");
  bm->add_option("--arch", bmo.arch);
  bm->add_option("--cond-dim", bmo.cond_dim);
  bm->add_option("--seconds", bmo.seconds, "Audio seconds per timing run");
  bm->add_option("--out", bm_out, "Report directory");
  std::string bm_config;
  bm->add_option("--config", bm_config, "Flat key = value file");

  CompareOptions cmo;
  std::string cm_out;
  auto* cm = app.add_subcommand("compare", "Friedman and pairwise Wilcoxon tests over eval reports");
  cm->add_option("inputs", cmo.inputs, "eval.csv files or glob patterns")->required();
  cm->add_option("--out", cm_out, "Report directory")->required();
  std::string cm_config;
  cm->add_option("--config", cm_config, "Flat key = value file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ds) {
      if (!ds_config.empty()) apply_config_file(*ds, ds_config);
      dso.out = ds_out;
      const Dataset d = run_dataset(dso);
      out << "wrote " << d.recordings.size() << " combinations to " << ds_out << "\n";
    } else if (*tr) {
      if (!tro.config_path.empty()) apply_config_file(*tr, tro.config_path);
      tro.dataset = tr_dataset;
      tro.out = tr_out;
      try {
        tro.train.schedule = parse_lr_schedule(tr_schedule);
      } catch (const InputError& e) {
        throw UsageError(e.what());
      }
      const TrainResult r = run_train(tro, &out);
      out << "best epoch " << r.history.best_epoch << " of " << r.history.epochs_run << "; checkpoint "
          << (tro.out / "model.ckpt").string() << "\n";
      if (r.history.diverged) {
        err << "training diverged: " << r.history.message << "\n";
        return kExitNumeric;
      }
    } else if (*ev) {
      if (!ev_config.empty()) apply_config_file(*ev, ev_config);
      evo.checkpoint = ev_ckpt;
      evo.dataset = ev_dataset;
      evo.out = ev_out;
      const std::vector<EvalRow> rows = run_eval(evo);
      const EvalRow& m = rows.back();
      out << m.model << " on " << m.dataset << " composition " << m.composition << ": mse " << m.metrics.mse
          << "  esr " << m.metrics.esr << "  nrmse " << m.metrics.nrmse << "  m_sf " << m.metrics.m_sf
          << "  m_stft " << m.metrics.m_stft << "\n";
    } else if (*rd) {
      if (!rd_config.empty()) apply_config_file(*rd, rd_config);
      rdo.checkpoint = rd_ckpt;
      rdo.input = rd_in;
      rdo.out = rd_out;
      rdo.schedule = rd_sched;
      rdo.run_dir = rd_run;
      const Vector y = run_render(rdo);
      out << "rendered " << y.size() << " samples to " << rd_out << "\n";
    } else if (*bm) {
      if (!bm_config.empty()) apply_config_file(*bm, bm_config);
      bmo.checkpoint = bm_ckpt;
      bmo.out = bm_out;
      print_benchmark(run_benchmark(bmo), out);
    } else if (*cm) {
      if (!cm_config.empty()) apply_config_file(*cm, cm_config);
      cmo.out = cm_out;
      const CompareReport r = run_compare(cmo);
      for (const FriedmanRow& f : r.friedman) {
        out << f.dataset << " " << f.metric << ": ";
        if (f.computed) {
          out << "Friedman chi2 " << f.statistic << " p " << f.p_value << " (" << f.method << ")";
        }
        if (!f.note.empty()) out << (f.computed ? "; " : "") << f.note;
        out << "\n";
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOk;
}

}  // namespace vafx::cli
