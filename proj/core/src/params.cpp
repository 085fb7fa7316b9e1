// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "vafx/params.hpp"

#include <functional>
#include <numeric>

#include "vafx/error.hpp"

namespace vafx {

std::size_t ParamSet::add(const std::string& name, std::vector<std::size_t> shape) {
  if (contains(name)) throw InputError("duplicate tensor name: " + name);
  const std::size_t n =
      std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  tensors_.push_back(Tensor{name, std::move(shape), std::vector<double>(n, 0.0)});
  index_[name] = tensors_.size() - 1;
  return tensors_.size() - 1;
}

std::size_t ParamSet::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw InputError("unknown tensor: " + name);
  return it->second;
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out = *this;
  out.fill(0.0);
  return out;
}

void ParamSet::fill(double v) {
  for (auto& t : tensors_) std::fill(t.values.begin(), t.values.end(), v);
}

bool ParamSet::same_layout(const ParamSet& other) const {
  if (tensors_.size() != other.tensors_.size()) return false;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (tensors_[i].name != other.tensors_[i].name ||
        tensors_[i].shape != other.tensors_[i].shape) {
      return false;
    }
  }
  return true;
}

}  // namespace vafx
