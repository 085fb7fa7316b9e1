// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "vafx/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "json.hpp"

#include "vafx/error.hpp"
#include "vafx/wav.hpp"

namespace vafx {

using nlohmann::json;

namespace {

std::string combo_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "combo_%03zu", i);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw FormatError("failed writing " + path.string());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace

GridAxis make_axis(const ParamSpec& spec, double min, double max, std::size_t count) {
  if (count == 0) throw InputError("grid axis " + spec.name + ": count must be positive");
  if (count > 1 && !(max > min)) throw InputError("grid axis " + spec.name + ": need min < max");
  GridAxis axis{spec.name, {}};
  const NormRange r{spec.name, min, max, spec.log_scale};
  for (std::size_t i = 0; i < count; ++i) {
    const double u = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    axis.values.push_back(count == 1 ? min : i + 1 == count ? max : r.denormalize(u));
  }
  return axis;
}

Dataset build_dataset(const DatasetSpec& spec) {
  const double fs = spec.signal.sample_rate;
  const std::vector<ParamSpec> params = effect_parameters(spec.effect, fs);

  // Value lists per effect parameter, defaults where no axis is given.
  std::vector<std::vector<double>> values(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) values[i] = {params[i].default_value};
  std::set<std::string> seen;
  for (const GridAxis& axis : spec.axes) {
    auto it = std::find_if(params.begin(), params.end(),
                           [&](const ParamSpec& p) { return p.name == axis.name; });
    if (it == params.end()) {
      throw InputError(std::string(to_string(spec.effect)) + " has no parameter '" + axis.name + "'");
    }
    if (!seen.insert(axis.name).second) throw InputError("parameter '" + axis.name + "' given twice");
    if (axis.values.empty()) throw InputError("parameter '" + axis.name + "' has no values");
    values[static_cast<std::size_t>(it - params.begin())] = axis.values;
  }

  Dataset ds;
  ds.effect = spec.effect;
  ds.sample_rate = fs;
  ds.seed = spec.signal.seed;
  ds.duration_s = spec.signal.duration_s;
  std::vector<std::size_t> varying;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto [lo, hi] = std::minmax_element(values[i].begin(), values[i].end());
    if (*lo != *hi) {
      varying.push_back(i);
      ds.param_labels.push_back(params[i].name);
      ds.ranges.push_back(NormRange{params[i].name, *lo, *hi, params[i].log_scale});
    }
  }

  auto input = std::make_shared<const Vector>(generate_input_signal(spec.signal));

  std::size_t total = 1;
  for (const auto& v : values) total *= v.size();
  for (std::size_t combo = 0; combo < total; ++combo) {
    Recording rec;
    rec.id = combo_id(combo);
    rec.input = input;
    rec.physical.resize(params.size());
    std::size_t rest = combo;
    for (std::size_t i = params.size(); i-- > 0;) {
      rec.physical[i] = values[i][rest % values[i].size()];
      rest /= values[i].size();
    }
    for (std::size_t v = 0; v < varying.size(); ++v) {
      rec.params.push_back(std::clamp(ds.ranges[v].normalize(rec.physical[varying[v]]), 0.0, 1.0));
    }
    rec.output = apply_oracle(spec.effect, rec.physical, *input, fs);
    for (double& y : rec.output) y = static_cast<double>(static_cast<float>(y));
    ds.recordings.push_back(std::move(rec));
  }
  return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::vector<ParamSpec> params = effect_parameters(ds.effect, ds.sample_rate);
  json index;
  index["format"] = "vafx-dataset";
  index["version"] = 1;
  index["effect"] = std::string(to_string(ds.effect));
  index["sample_rate"] = ds.sample_rate;
  index["seed"] = ds.seed;
  index["duration_s"] = ds.duration_s;
  index["param_labels"] = ds.param_labels;
  index["ranges"] = json::array();
  for (const NormRange& r : ds.ranges) {
    index["ranges"].push_back({{"name", r.name}, {"min", r.min}, {"max", r.max}, {"log_scale", r.log_scale}});
  }
  index["combinations"] = json::array();
  for (const Recording& rec : ds.recordings) {
    const std::string in_name = rec.id + "_input.wav";
    const std::string out_name = rec.id + "_output.wav";
    save_wav(dir / in_name, *rec.input, ds.sample_rate);
    save_wav(dir / out_name, rec.output, ds.sample_rate);
    json side;
    side["id"] = rec.id;
    side["effect"] = std::string(to_string(ds.effect));
    side["seed"] = ds.seed;
    side["input"] = in_name;
    side["output"] = out_name;
    side["physical"] = json::object();
    for (std::size_t i = 0; i < params.size(); ++i) side["physical"][params[i].name] = rec.physical[i];
    side["normalized"] = json::object();
    for (std::size_t i = 0; i < ds.param_labels.size(); ++i) {
      side["normalized"][ds.param_labels[i]] = rec.params[i];
    }
    write_text(dir / (rec.id + ".json"), side.dump(2) + "\n");
    index["combinations"].push_back(rec.id);
  }
  write_text(dir / "dataset.json", index.dump(2) + "\n");
}

Dataset read_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw FormatError("dataset directory " + dir.string() + " does not exist");
  }
  const json index = read_json(dir / "dataset.json");
  Dataset ds;
  try {
    if (index.at("format") != "vafx-dataset" || index.at("version") != 1) {
      throw FormatError("dataset.json: unsupported format or version");
    }
    ds.effect = parse_effect(index.at("effect").get<std::string>());
    ds.sample_rate = index.at("sample_rate").get<double>();
    ds.seed = index.at("seed").get<std::uint64_t>();
    ds.duration_s = index.at("duration_s").get<double>();
    ds.param_labels = index.at("param_labels").get<std::vector<std::string>>();
    for (const json& r : index.at("ranges")) {
      ds.ranges.push_back(NormRange{r.at("name").get<std::string>(), r.at("min").get<double>(),
                                    r.at("max").get<double>(), r.at("log_scale").get<bool>()});
    }
    if (ds.ranges.size() != ds.param_labels.size()) {
      throw FormatError("dataset.json: ranges and param_labels disagree");
    }
    const std::vector<ParamSpec> params = effect_parameters(ds.effect, ds.sample_rate);
    std::shared_ptr<const Vector> last_input;
    for (const json& id : index.at("combinations")) {
      const json side = read_json(dir / (id.get<std::string>() + ".json"));
      Recording rec;
      rec.id = side.at("id").get<std::string>();
      Vector in = load_wav(dir / side.at("input").get<std::string>(), ds.sample_rate);
      if (last_input && *last_input == in) {
        rec.input = last_input;
      } else {
        rec.input = last_input = std::make_shared<const Vector>(std::move(in));
      }
      rec.output = load_wav(dir / side.at("output").get<std::string>(), ds.sample_rate);
      if (rec.output.size() != rec.input->size()) {
        throw FormatError(rec.id + ": input and output lengths differ");
      }
      for (const ParamSpec& p : params) rec.physical.push_back(side.at("physical").at(p.name).get<double>());
      for (const std::string& label : ds.param_labels) {
        rec.params.push_back(side.at("normalized").at(label).get<double>());
      }
      ds.recordings.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw FormatError("dataset " + dir.string() + ": " + e.what());
  } catch (const InputError& e) {
    throw FormatError("dataset " + dir.string() + ": " + e.what());
  }
  if (ds.recordings.empty()) throw FormatError("dataset " + dir.string() + " has no combinations");
  return ds;
}

}  // namespace vafx
