// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace vafx {

// A named, shaped array of trainable scalars.
struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
};

// Ordered collection of named tensors. Insertion order is the serialization
// order and the order used by optimizers and gradient audits.
class ParamSet {
 public:
  // Adds a zero-filled tensor and returns its index. Throws on duplicate names.
  std::size_t add(const std::string& name, std::vector<std::size_t> shape);

  std::size_t size() const noexcept { return tensors_.size(); }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t index_of(const std::string& name) const;

  Tensor& operator[](std::size_t i) { return tensors_[i]; }
  const Tensor& operator[](std::size_t i) const { return tensors_[i]; }
  Tensor& at(const std::string& name) { return tensors_[index_of(name)]; }
  const Tensor& at(const std::string& name) const { return tensors_[index_of(name)]; }

  std::span<double> values(std::size_t i) { return tensors_[i].values; }
  std::span<const double> values(std::size_t i) const { return tensors_[i].values; }

  auto begin() { return tensors_.begin(); }
  auto end() { return tensors_.end(); }
  auto begin() const { return tensors_.begin(); }
  auto end() const { return tensors_.end(); }

  std::size_t scalar_count() const;

  // Same names and shapes, all values zero.
  ParamSet zeros_like() const;
  void fill(double v);
  bool same_layout(const ParamSet& other) const;

 private:
  std::vector<Tensor> tensors_;
  std::map<std::string, std::size_t> index_;
};

// Gradients share the parameter layout.
using GradientSet = ParamSet;

}  // namespace vafx
