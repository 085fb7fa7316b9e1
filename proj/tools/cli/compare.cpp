// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <glob.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "commands.hpp"
#include "vafx/stats.hpp"

namespace vafx::cli {

namespace {

constexpr const char* kMetricNames[] = {"mse", "esr", "nrmse", "m_sf", "m_stft"};

double metric_value(const MetricReport& m, const std::string& name) {
  if (name == "mse") return m.mse;
  if (name == "esr") return m.esr;
  if (name == "nrmse") return m.nrmse;
  if (name == "m_sf") return m.m_sf;
  return m.m_stft;
}

std::vector<std::string> expand(const std::string& pattern) {
  glob_t g{};
  const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
  std::vector<std::string> out;
  if (rc == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  }
  globfree(&g);
  if (out.empty()) throw FormatError("no files match '" + pattern + "'");
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

CompareReport compare_rows(const std::vector<EvalRow>& all_rows) {
  std::map<std::string, std::map<std::pair<std::size_t, std::string>, const EvalRow*>> cells;
  std::map<std::string, std::set<std::string>> models;
  std::map<std::string, std::set<std::size_t>> comps;
  std::vector<std::string> problems;
  for (const EvalRow& r : all_rows) {
    if (r.row != "mean") continue;
    auto [it, fresh] = cells[r.dataset].emplace(std::make_pair(r.composition, r.model), &r);
    if (!fresh) {
      problems.push_back("duplicate " + r.dataset + "/composition " + std::to_string(r.composition) + "/" + r.model);
    }
    models[r.dataset].insert(r.model);
    comps[r.dataset].insert(r.composition);
  }
  if (cells.empty()) throw InputError("compare: no mean rows found in the inputs");
  for (const auto& [ds, table] : cells) {
    for (std::size_t c : comps[ds]) {
      for (const std::string& m : models[ds]) {
        if (!table.count({c, m})) {
          problems.push_back("missing " + ds + "/composition " + std::to_string(c) + "/" + m);
        }
      }
    }
  }
  if (!problems.empty()) {
    std::string msg = "compare: ragged inputs:";
    for (const std::string& p : problems) msg += "\n  " + p;
    throw InputError(msg);
  }

  CompareReport report;
  for (const auto& [ds, table] : cells) {
    const std::vector<std::string> names(models[ds].begin(), models[ds].end());
    const std::vector<std::size_t> blocks(comps[ds].begin(), comps[ds].end());
    for (const char* metric : kMetricNames) {
      ScoreMatrix sm(blocks.size(), names.size());
      sm.col_labels = names;
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        sm.row_labels.push_back(std::to_string(blocks[b]));
        for (std::size_t m = 0; m < names.size(); ++m) {
          sm.at(b, m) = metric_value(table.at({blocks[b], names[m]})->metrics, metric);
        }
      }

      FriedmanRow fr;
      fr.dataset = ds;
      fr.metric = metric;
      fr.models = names.size();
      fr.compositions = blocks.size();
      if (names.size() < 3) {
        fr.note = names.size() == 2 ? "Friedman skipped with 2 models; Wilcoxon only" : "single model";
      } else if (blocks.size() < 2) {
        fr.note = "Friedman skipped with fewer than 2 compositions";
      } else {
        const FriedmanResult f = friedman_test(sm);
        fr.computed = true;
        fr.statistic = f.statistic;
        fr.p_value = f.p_value;
        fr.method = f.method;
        for (const std::string& w : f.warnings) fr.note += (fr.note.empty() ? "" : "; ") + w;
      }
      report.friedman.push_back(fr);

      for (std::size_t a = 0; a < names.size(); ++a) {
        for (std::size_t b = a + 1; b < names.size(); ++b) {
          WilcoxonRow wr;
          wr.dataset = ds;
          wr.metric = metric;
          wr.model_a = names[a];
          wr.model_b = names[b];
          try {
            const Vector ca = sm.column(a);
            const Vector cb = sm.column(b);
            const WilcoxonResult w = wilcoxon_signed_rank(ca, cb);
            wr.computed = true;
            wr.statistic = w.statistic;
            wr.p_value = w.p_value;
            wr.method = w.method;
            for (const std::string& s : w.warnings) wr.note += (wr.note.empty() ? "" : "; ") + s;
          } catch (const InputError& e) {
            wr.note = e.what();
          }
          report.wilcoxon.push_back(wr);
        }
      }
    }
  }
  return report;
}

CompareReport run_compare(const CompareOptions& opt) {
  RunManifest manifest;
  manifest.command = "compare";
  manifest.started_at = utc_timestamp();
  if (opt.inputs.empty()) throw UsageError("compare: no input files given");
  if (opt.out.empty()) throw UsageError("compare: --out is required");

  std::vector<EvalRow> rows;
  std::set<std::string> files;
  for (const std::string& pattern : opt.inputs) {
    for (const std::string& f : expand(pattern)) files.insert(f);
  }
  for (const std::string& f : files) {
    std::vector<EvalRow> r = read_eval_csv(f);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  const CompareReport report = compare_rows(rows);

  fs::create_directories(opt.out);
  auto cell = [](bool computed, double v) { return computed ? num(v) : std::string(); };
  {
    std::ofstream os(opt.out / "friedman.csv", std::ios::trunc);
    os << "dataset,metric,models,compositions,statistic,p_value,method,note\n";
    for (const FriedmanRow& r : report.friedman) {
      os << r.dataset << "," << r.metric << "," << r.models << "," << r.compositions << ","
         << cell(r.computed, r.statistic) << "," << cell(r.computed, r.p_value) << "," << r.method << ","
         << r.note << "\n";
    }
  }
  {
    // Dataset x metric grid of Friedman p-values.
    std::ofstream os(opt.out / "friedman_table.csv", std::ios::trunc);
    os << "dataset";
    for (const char* m : kMetricNames) os << "," << m;
    os << "\n";
    std::string current;
    for (const FriedmanRow& r : report.friedman) {
      if (r.dataset != current) {
        if (!current.empty()) os << "\n";
        current = r.dataset;
        os << r.dataset;
      }
      os << "," << cell(r.computed, r.p_value);
    }
    os << "\n";
  }
  {
    std::ofstream os(opt.out / "wilcoxon.csv", std::ios::trunc);
    os << "dataset,metric,model_a,model_b,statistic,p_value,method,note\n";
    for (const WilcoxonRow& r : report.wilcoxon) {
      std::string note = r.note;
      for (char& ch : note) {
        if (ch == ',' || ch == '\n') ch = ';';
      }
      os << r.dataset << "," << r.metric << "," << r.model_a << "," << r.model_b << ","
         << cell(r.computed, r.statistic) << "," << cell(r.computed, r.p_value) << "," << r.method << ","
         << note << "\n";
    }
    if (!os) throw FormatError("failed writing " + (opt.out / "wilcoxon.csv").string());
  }
  manifest.artifacts["friedman"] = (opt.out / "friedman.csv").string();
  manifest.artifacts["friedman_table"] = (opt.out / "friedman_table.csv").string();
  manifest.artifacts["wilcoxon"] = (opt.out / "wilcoxon.csv").string();
  manifest.artifacts["inputs"] = std::to_string(files.size()) + " files";
  manifest.finished_at = utc_timestamp();
  write_manifest(manifest, opt.out);
  return report;
}

}  // namespace vafx::cli
