// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>

#include "commands.hpp"
#include "json.hpp"
#include "vafx/effects.hpp"

namespace vafx::cli {

using json = nlohmann::json;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return kExitUsage;
    case ErrorKind::kFormat:
      return kExitFormat;
    case ErrorKind::kNumeric:
    case ErrorKind::kStability:
      return kExitNumeric;
    default:
      return kExitOther;
  }
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const RunManifest& m, const fs::path& dir) {
  fs::create_directories(dir);
  json j;
  j["command"] = m.command;
  j["config_path"] = m.config_path;
  j["seed"] = m.seed;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["artifacts"] = m.artifacts;
  j["tool_version"] = m.tool_version;
  std::ofstream os(dir / "manifest.json", std::ios::trunc);
  if (!os) throw FormatError("cannot write " + (dir / "manifest.json").string());
  os << j.dump(2) << "\n";
}

RunManifest read_manifest(const fs::path& dir) {
  std::ifstream is(dir / "manifest.json");
  if (!is) throw FormatError("cannot open " + (dir / "manifest.json").string());
  try {
    const json j = json::parse(is);
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config_path = j.at("config_path").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.started_at = j.at("started_at").get<std::string>();
    m.finished_at = j.at("finished_at").get<std::string>();
    m.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
    m.tool_version = j.at("tool_version").get<std::string>();
    return m;
  } catch (const json::exception& e) {
    throw FormatError("manifest.json: " + std::string(e.what()));
  }
}

namespace {

double parse_number(const std::string& s, const std::string& context) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw UsageError(context + ": '" + s + "' is not a number");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

GridAxis parse_grid_axis(const std::string& text, EffectKind effect, double sample_rate) {
  const std::size_t eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw UsageError("grid entry '" + text + "' should look like name=values");
  }
  const std::string name = text.substr(0, eq);
  const std::string rhs = text.substr(eq + 1);
  const std::vector<ParamSpec> specs = effect_parameters(effect, sample_rate);
  auto it = std::find_if(specs.begin(), specs.end(), [&](const ParamSpec& p) { return p.name == name; });
  if (it == specs.end()) {
    throw UsageError(std::string(to_string(effect)) + " has no parameter '" + name + "'");
  }
  const std::vector<std::string> range = split(rhs, ':');
  try {
    if (range.size() == 3) {
      const double count = parse_number(range[2], name);
      if (count < 1 || count != static_cast<double>(static_cast<std::size_t>(count))) {
        throw UsageError(name + ": count must be a positive integer");
      }
      return make_axis(*it, parse_number(range[0], name), parse_number(range[1], name),
                       static_cast<std::size_t>(count));
    }
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  if (range.size() != 1) throw UsageError("grid entry '" + text + "' should use min:max:count");
  GridAxis axis{name, {}};
  for (const std::string& v : split(rhs, ',')) axis.values.push_back(parse_number(v, name));
  return axis;
}

}  // namespace vafx::cli
