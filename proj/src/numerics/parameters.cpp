// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/numerics/parameters.hpp"

#include "jcif/common/error.hpp"

namespace jcif::numerics {

Tensor& ParameterSet::add(const std::string& name, Tensor value) {
  auto [it, inserted] = tensors_.emplace(name, std::move(value));
  if (!inserted) throw ConfigError("duplicate parameter '" + name + "'");
  return it->second;
}

Tensor& ParameterSet::at(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw NotFoundError("unknown parameter '" + name + "'");
  return it->second;
}

const Tensor& ParameterSet::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw NotFoundError("unknown parameter '" + name + "'");
  return it->second;
}

std::vector<std::string> ParameterSet::names(std::string_view prefix) const {
  std::vector<std::string> out;
  for (const auto& [name, t] : tensors_) {
    if (name.starts_with(prefix)) out.push_back(name);
  }
  return out;
}

std::size_t ParameterSet::element_count(std::string_view prefix) const {
  std::size_t n = 0;
  for (const auto& [name, t] : tensors_) {
    if (name.starts_with(prefix)) n += t.size();
  }
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& [name, t] : tensors_) t.zero_grad();
}

std::vector<double> ParameterSet::flat_grad(const std::vector<std::string>& names) const {
  std::vector<double> out;
  for (const auto& name : names) {
    const Tensor& t = at(name);
    if (t.has_grad()) {
      out.insert(out.end(), t.grad().begin(), t.grad().end());
    } else {
      out.insert(out.end(), t.size(), 0.0);
    }
  }
  return out;
}

bool ParameterSet::operator==(const ParameterSet& other) const {
  if (tensors_.size() != other.tensors_.size()) return false;
  auto a = tensors_.begin();
  auto b = other.tensors_.begin();
  for (; a != tensors_.end(); ++a, ++b) {
    if (a->first != b->first || !(a->second == b->second)) return false;
  }
  return true;
}

Var Bindings::operator[](const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  Var v = mutable_ != nullptr ? tape_->parameter(mutable_->at(name)) : tape_->constant(params_->at(name));
  bound_.emplace(name, v);
  return v;
}

}  // namespace jcif::numerics
