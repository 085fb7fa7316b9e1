// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "vafx/splits.hpp"

#include <cmath>

#include "vafx/error.hpp"

namespace vafx {

constexpr std::size_t kBlocks = 10;

std::vector<std::size_t> snap_boundaries(std::span<const double> x, const SplitOptions& opt,
                                         std::vector<std::string>* warnings) {
  const std::size_t L = x.size();
  if (L < kBlocks) throw InputError("split: signal too short");
  std::vector<double> prefix(L + 1, 0.0);
  for (std::size_t n = 0; n < L; ++n) prefix[n + 1] = prefix[n] + x[n] * x[n];
  const double total_rms = std::sqrt(prefix[L] / static_cast<double>(L));
  const double limit = opt.silence_ratio * total_rms;
  const std::size_t half = opt.rms_window / 2;

  auto quiet = [&](std::size_t c) {
    if (c < half || c + half > L) return false;
    const double ms = (prefix[c + half] - prefix[c - half]) / static_cast<double>(2 * half);
    return std::sqrt(std::max(ms, 0.0)) < limit;
  };

  const auto radius = static_cast<std::size_t>(std::llround(opt.snap_radius_s * opt.sample_rate));
  std::vector<std::size_t> out;
  for (std::size_t b = 1; b < kBlocks; ++b) {
    const std::size_t nominal = L * b / kBlocks;
    std::size_t chosen = nominal;
    bool found = false;
    for (std::size_t d = 0; d <= radius && !found; ++d) {
      if (quiet(nominal - std::min(d, nominal))) {
        chosen = nominal - std::min(d, nominal);
        found = true;
      } else if (nominal + d < L && quiet(nominal + d)) {
        chosen = nominal + d;
        found = true;
      }
    }
    if (!found && warnings) {
      warnings->push_back("no silent point within " + std::to_string(opt.snap_radius_s) +
                          " s of boundary " + std::to_string(b) + "/10; using nominal sample " +
                          std::to_string(nominal));
    }
    out.push_back(chosen);
  }
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] <= out[i - 1]) throw InputError("split: recording too short for snapping radius");
  }
  return out;
}

std::vector<SplitComposition> make_split_compositions(const std::vector<Recording>& recordings,
                                                      std::size_t n, const SplitOptions& opt) {
  if (n == 0 || n > kBlocks / 2) throw InputError("split: between 1 and 5 compositions");
  std::vector<SplitComposition> comps(n);
  for (std::size_t c = 0; c < n; ++c) comps[c].index = c + 1;

  for (const Recording& rec : recordings) {
    std::vector<std::string> warnings;
    const std::vector<std::size_t> inner = snap_boundaries(rec.in(), opt, &warnings);
    std::vector<std::size_t> edge{0};
    edge.insert(edge.end(), inner.begin(), inner.end());
    edge.push_back(rec.in().size());
    for (std::size_t c = 0; c < n; ++c) {
      RecordingSplit s;
      s.validation = Span{edge[2 * c], edge[2 * c + 1]};
      s.test = Span{edge[2 * c + 1], edge[2 * c + 2]};
      if (edge[2 * c] > 0) s.train.push_back(Span{0, edge[2 * c]});
      if (edge[2 * c + 2] < edge.back()) s.train.push_back(Span{edge[2 * c + 2], edge.back()});
      comps[c].recordings.push_back(std::move(s));
      for (const auto& w : warnings) comps[c].warnings.push_back(rec.id + ": " + w);
    }
  }
  return comps;
}

namespace {

StreamView view(const Recording& rec, const Span& s, const std::string& tag) {
  StreamView v;
  v.input = rec.in().subspan(s.begin, s.size());
  v.target = rec.out().subspan(s.begin, s.size());
  v.params = rec.params;
  v.label = rec.id + ":" + tag;
  return v;
}

void check(const Dataset& ds, const SplitComposition& comp) {
  if (comp.recordings.size() != ds.recordings.size()) {
    throw InputError("split composition does not match the dataset's recordings");
  }
}

}  // namespace

TrainingData make_training_data(const Dataset& ds, const SplitComposition& comp) {
  check(ds, comp);
  TrainingData data;
  for (std::size_t r = 0; r < ds.recordings.size(); ++r) {
    const RecordingSplit& s = comp.recordings[r];
    for (std::size_t i = 0; i < s.train.size(); ++i) {
      data.train.push_back(view(ds.recordings[r], s.train[i], "train" + std::to_string(i)));
    }
    data.validation.push_back(view(ds.recordings[r], s.validation, "val"));
  }
  return data;
}

std::vector<StreamView> make_test_streams(const Dataset& ds, const SplitComposition& comp) {
  check(ds, comp);
  std::vector<StreamView> out;
  for (std::size_t r = 0; r < ds.recordings.size(); ++r) {
    out.push_back(view(ds.recordings[r], comp.recordings[r].test, "test"));
  }
  return out;
}

}  // namespace vafx
