// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/numerics/tape.hpp"

#include <algorithm>

#include "jcif/common/error.hpp"

namespace jcif::numerics {

std::string_view primitive_name(Primitive kind) {
  switch (kind) {
    case Primitive::kConstant: return "constant";
    case Primitive::kParameter: return "parameter";
    case Primitive::kAdd: return "add";
    case Primitive::kSub: return "sub";
    case Primitive::kMul: return "mul";
    case Primitive::kScale: return "scale";
    case Primitive::kAddScalar: return "add_scalar";
    case Primitive::kMatMul: return "matmul";
    case Primitive::kTranspose: return "transpose";
    case Primitive::kConv2d: return "conv2d";
    case Primitive::kBiasAdd: return "bias_add";
    case Primitive::kRelu: return "relu";
    case Primitive::kSigmoid: return "sigmoid";
    case Primitive::kLog: return "log";
    case Primitive::kExp: return "exp";
    case Primitive::kSoftplus: return "softplus";
    case Primitive::kSquare: return "square";
    case Primitive::kSum: return "sum";
    case Primitive::kMean: return "mean";
    case Primitive::kConcat: return "concat";
    case Primitive::kReshape: return "reshape";
    case Primitive::kUpsample2x: return "upsample2x";
    case Primitive::kGlobalAvgPool: return "global_avg_pool";
    case Primitive::kChannelScale: return "channel_scale";
    case Primitive::kRoundSte: return "round_ste";
    case Primitive::kSignSte: return "sign_ste";
    case Primitive::kMixtureLikelihood: return "mixture_likelihood";
    case Primitive::kFactorizedLikelihood: return "factorized_likelihood";
    case Primitive::kInformationBits: return "information_bits";
  }
  return "unknown";
}

void Tape::check_owned(Var v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size()) {
    throw Error("variable does not belong to this tape");
  }
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{Primitive::kConstant, std::move(value), {}, nullptr, false, {}});
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::parameter(Tensor& param) {
  param.enable_grad();
  nodes_.push_back(Node{Primitive::kParameter, param, {}, &param, true, {}});
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::record(Primitive kind, Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  Node node{kind, std::move(value), {}, nullptr, false, std::move(backward)};
  node.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    check_owned(in);
    node.inputs.push_back(in.id_);
    node.requires_grad = node.requires_grad || nodes_[in.id_].requires_grad;
  }
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

void Tape::backward(Var loss) {
  check_owned(loss);
  const Node& root = nodes_[loss.id_];
  if (root.value.size() != 1) {
    throw ShapeError("backward requires a scalar loss, got shape " + to_string(root.value.shape()));
  }
  if (!root.requires_grad) return;

  std::vector<std::vector<double>> adjoint(loss.id_ + 1);
  adjoint[loss.id_].assign(1, 1.0);

  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.requires_grad || adjoint[i].empty()) continue;
    if (node.param != nullptr) {
      auto g = node.param->grad();
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += adjoint[i][k];
    } else if (node.backward) {
      BackwardArgs args;
      args.out_grad = adjoint[i];
      args.in_grads.reserve(node.inputs.size());
      for (auto in : node.inputs) {
        if (nodes_[in].requires_grad) {
          if (adjoint[in].empty()) adjoint[in].assign(nodes_[in].value.size(), 0.0);
          args.in_grads.emplace_back(adjoint[in]);
        } else {
          args.in_grads.emplace_back();
        }
      }
      node.backward(args);
    }
    std::vector<double>().swap(adjoint[i]);
  }
}

}  // namespace jcif::numerics
