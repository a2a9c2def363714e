// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "jcif/numerics/tape.hpp"

namespace jcif::numerics {

// Named trainable tensors. Iteration order is the lexicographic name order,
// which fixes the layout of flattened gradients and checkpoint records.
class ParameterSet {
 public:
  Tensor& add(const std::string& name, Tensor value);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }

  // Names starting with `prefix`, in iteration order.
  std::vector<std::string> names(std::string_view prefix = "") const;
  std::size_t element_count(std::string_view prefix = "") const;

  void zero_grad();
  // Concatenated gradients of `names` (zeros for tensors without a gradient).
  std::vector<double> flat_grad(const std::vector<std::string>& names) const;

  std::map<std::string, Tensor>& tensors() { return tensors_; }
  const std::map<std::string, Tensor>& tensors() const { return tensors_; }

  bool operator==(const ParameterSet& other) const;

 private:
  std::map<std::string, Tensor> tensors_;
};

// Lazily places parameters on a tape. Trainable bindings register the
// tensors as gradient leaves; frozen bindings record plain constants.
class Bindings {
 public:
  Bindings(Tape& tape, ParameterSet& params, bool trainable)
      : tape_(&tape), params_(&params), mutable_(trainable ? &params : nullptr) {}
  Bindings(Tape& tape, const ParameterSet& params) : tape_(&tape), params_(&params) {}

  Var operator[](const std::string& name);
  Tape& tape() const { return *tape_; }
  const ParameterSet& params() const { return *params_; }

 private:
  Tape* tape_;
  const ParameterSet* params_;
  ParameterSet* mutable_ = nullptr;
  std::map<std::string, Var> bound_;
};

}  // namespace jcif::numerics
