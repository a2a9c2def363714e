// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "jcif/numerics/tensor.hpp"

namespace jcif::numerics {

enum class Primitive : std::uint8_t {
  kConstant,
  kParameter,
  kAdd,
  kSub,
  kMul,
  kScale,
  kAddScalar,
  kMatMul,
  kTranspose,
  kConv2d,
  kBiasAdd,
  kRelu,
  kSigmoid,
  kLog,
  kExp,
  kSoftplus,
  kSquare,
  kSum,
  kMean,
  kConcat,
  kReshape,
  kUpsample2x,
  kGlobalAvgPool,
  kChannelScale,
  kRoundSte,
  kSignSte,
  kMixtureLikelihood,
  kFactorizedLikelihood,
  kInformationBits,
};

std::string_view primitive_name(Primitive kind);

class Tape;

// Handle to a value recorded on a tape.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Tape& tape() const { return *tape_; }
  std::uint32_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

// Arguments handed to a primitive's backward rule. An input whose gradient
// is not needed gets an empty span and must be skipped.
struct BackwardArgs {
  std::span<const double> out_grad;
  std::vector<std::span<double>> in_grads;
};

using BackwardFn = std::function<void(BackwardArgs&)>;

// Records primitive applications in evaluation order. Nodes are appended
// only after their inputs, so the node list is always topologically sorted.
// Parameters are referenced, not copied: backward() accumulates
// d(loss)/d(param) into Tensor::grad() of the registered tensor.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var parameter(Tensor& param);
  Var record(Primitive kind, Tensor value, std::vector<Var> inputs, BackwardFn backward);

  // Accumulates gradients of a scalar `loss` into every parameter leaf that
  // influences it. Calling twice without zeroing doubles the gradients.
  void backward(Var loss);

  const Tensor& value(Var v) const { return nodes_[v.id_].value; }
  Primitive kind(Var v) const { return nodes_[v.id_].kind; }
  bool requires_grad(Var v) const { return nodes_[v.id_].requires_grad; }
  std::span<const std::uint32_t> inputs(std::uint32_t node) const { return nodes_.at(node).inputs; }
  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  struct Node {
    Primitive kind;
    Tensor value;
    std::vector<std::uint32_t> inputs;
    Tensor* param = nullptr;
    bool requires_grad = false;
    BackwardFn backward;
  };

  void check_owned(Var v) const;

  std::deque<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape_->value(*this); }

}  // namespace jcif::numerics
