// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "vafx/checkpoint.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "vafx/error.hpp"

namespace vafx {

namespace {

constexpr const char* kMagic = "vafx-checkpoint";

void append_f64(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(bits & 0xffu));
    bits >>= 8;
  }
}

double read_f64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
  return std::bit_cast<double>(bits);
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

bool valid_label(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '\0') return false;
  }
  return true;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::uint64_t parse_uint(const std::string& s, const char* what) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw FormatError(std::string("checkpoint: bad ") + what + " '" + s + "'");
  }
  return v;
}

struct HeaderTensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t count = 1;
};

}  // namespace

Checkpoint Checkpoint::from_model(const Model& model) {
  Checkpoint c;
  c.config = model.config();
  c.params = model.params();
  return c;
}

Model Checkpoint::to_model() const { return Model(config, params); }

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  ckpt.config.validate();
  for (const auto& label : ckpt.config.param_labels) {
    if (!valid_label(label)) throw InputError("checkpoint: parameter labels may not contain spaces");
  }
  std::ostringstream h;
  h << kMagic << "\n";
  h << "version " << kCheckpointVersion << "\n";
  h << "architecture " << to_string(ckpt.config.architecture) << "\n";
  h << "cond_dim " << ckpt.config.cond_dim << "\n";
  h << "sample_rate " << format_double(ckpt.config.sample_rate) << "\n";
  h << "best_epoch " << ckpt.best_epoch << "\n";
  h << "param_labels " << ckpt.config.param_labels.size();
  for (const auto& label : ckpt.config.param_labels) h << " " << label;
  h << "\n";

  std::vector<std::pair<std::string, const Vector*>> extra = {
      {"history.train_loss", &ckpt.history.train_loss},
      {"history.val_loss", &ckpt.history.val_loss},
      {"history.lr", &ckpt.history.lr},
  };
  for (const Tensor& t : ckpt.params) {
    h << "tensor " << t.name << " " << t.shape.size();
    for (std::size_t d : t.shape) h << " " << d;
    h << "\n";
  }
  for (const auto& [name, vec] : extra) h << "tensor " << name << " 1 " << vec->size() << "\n";
  h << "end\n";

  std::string out = h.str();
  for (const Tensor& t : ckpt.params) {
    for (double v : t.values) append_f64(out, v);
  }
  for (const auto& [name, vec] : extra) {
    for (double v : *vec) append_f64(out, v);
  }
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string {
    const std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string::npos) throw FormatError("checkpoint: truncated header");
    std::string line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };
  auto expect_key = [&](const char* key) {
    auto toks = split_ws(next_line());
    if (toks.empty() || toks[0] != key) {
      throw FormatError(std::string("checkpoint: expected '") + key + "' line");
    }
    return toks;
  };

  if (next_line() != kMagic) throw FormatError("checkpoint: not a vafx checkpoint");
  auto toks = expect_key("version");
  if (toks.size() != 2) throw FormatError("checkpoint: malformed version line");
  const auto version = parse_uint(toks[1], "version");
  if (version != static_cast<std::uint64_t>(kCheckpointVersion)) {
    throw FormatError("checkpoint: unsupported version " + toks[1] + " (this build reads " +
                      std::to_string(kCheckpointVersion) + ")");
  }

  Checkpoint ckpt;
  toks = expect_key("architecture");
  if (toks.size() != 2) throw FormatError("checkpoint: malformed architecture line");
  try {
    ckpt.config.architecture = parse_architecture(toks[1]);
  } catch (const InputError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  toks = expect_key("cond_dim");
  if (toks.size() != 2) throw FormatError("checkpoint: malformed cond_dim line");
  ckpt.config.cond_dim = parse_uint(toks[1], "cond_dim");
  toks = expect_key("sample_rate");
  if (toks.size() != 2) throw FormatError("checkpoint: malformed sample_rate line");
  {
    double sr = 0.0;
    auto res = std::from_chars(toks[1].data(), toks[1].data() + toks[1].size(), sr);
    if (res.ec != std::errc() || !(sr > 0.0)) throw FormatError("checkpoint: bad sample_rate");
    ckpt.config.sample_rate = sr;
  }
  toks = expect_key("best_epoch");
  if (toks.size() != 2) throw FormatError("checkpoint: malformed best_epoch line");
  {
    std::int64_t be = 0;
    auto res = std::from_chars(toks[1].data(), toks[1].data() + toks[1].size(), be);
    if (res.ec != std::errc()) throw FormatError("checkpoint: bad best_epoch");
    ckpt.best_epoch = be;
  }
  toks = expect_key("param_labels");
  if (toks.size() < 2) throw FormatError("checkpoint: malformed param_labels line");
  const auto nlabels = parse_uint(toks[1], "param_labels count");
  if (toks.size() != 2 + nlabels) throw FormatError("checkpoint: param_labels count mismatch");
  ckpt.config.param_labels.assign(toks.begin() + 2, toks.end());

  std::vector<HeaderTensor> tensors;
  for (;;) {
    toks = split_ws(next_line());
    if (toks.size() == 1 && toks[0] == "end") break;
    if (toks.size() < 3 || toks[0] != "tensor") throw FormatError("checkpoint: malformed tensor line");
    HeaderTensor t;
    t.name = toks[1];
    const auto rank = parse_uint(toks[2], "tensor rank");
    if (toks.size() != 3 + rank) throw FormatError("checkpoint: tensor " + t.name + " rank mismatch");
    for (std::size_t i = 0; i < rank; ++i) {
      t.shape.push_back(parse_uint(toks[3 + i], "tensor dimension"));
      t.count *= t.shape.back();
    }
    tensors.push_back(std::move(t));
  }

  std::size_t total = 0;
  for (const auto& t : tensors) total += t.count;
  if (bytes.size() - pos != total * 8) {
    throw FormatError("checkpoint: payload holds " + std::to_string(bytes.size() - pos) +
                      " bytes, header describes " + std::to_string(total * 8));
  }

  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data()) + pos;
  for (const auto& t : tensors) {
    Vector values(t.count);
    for (std::size_t i = 0; i < t.count; ++i, data += 8) values[i] = read_f64(data);
    if (t.name == "history.train_loss") {
      ckpt.history.train_loss = std::move(values);
    } else if (t.name == "history.val_loss") {
      ckpt.history.val_loss = std::move(values);
    } else if (t.name == "history.lr") {
      ckpt.history.lr = std::move(values);
    } else {
      if (ckpt.params.contains(t.name)) throw FormatError("checkpoint: duplicate tensor " + t.name);
      ckpt.params.add(t.name, t.shape);
      ckpt.params.at(t.name).values = std::move(values);
    }
  }

  try {
    ckpt.config.validate();
  } catch (const InputError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  if (!ckpt.params.same_layout(make_param_layout(ckpt.config))) {
    throw FormatError("checkpoint: tensors do not match the " +
                      std::string(to_string(ckpt.config.architecture)) + " layout");
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw FormatError("failed writing " + path.string());
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  save_checkpoint(Checkpoint::from_model(model), path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace vafx
