// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "jcif/common/labels.hpp"
#include "jcif/numerics/parameters.hpp"

namespace jcif::hash {

struct HashHeadConfig {
  std::size_t code_bits = 64;
  std::size_t hidden = 128;
  std::size_t classes = 8;
  std::size_t latent_channels = 16;
  // Zero selects the defaults 5/q and 0.1/q.
  double alpha = 0.0;
  double gamma = 0.0;

  double relaxation() const { return alpha > 0.0 ? alpha : 5.0 / static_cast<double>(code_bits); }
  double soft_weight() const { return gamma > 0.0 ? gamma : 0.1 / static_cast<double>(code_bits); }

  void validate() const;
  bool operator==(const HashHeadConfig&) const = default;

  numerics::Tensor to_tensor() const;
  static HashHeadConfig from_tensor(const numerics::Tensor& t);
};

inline constexpr std::string_view kHashPrefix = "hash_head.";

void init_hash_params(numerics::ParameterSet& params, const HashHeadConfig& config, std::uint64_t seed);

struct HashOutputs {
  numerics::Var logits;  // (q)
  numerics::Var code;    // (q), sign of logits with straight-through backward
  numerics::Var labels;  // (C), sigmoid probabilities
};

// Channel gate from global average pooling, two 1x1 convolutions with ReLU,
// spatial pooling, then classification and hash layers side by side.
HashOutputs hash_forward(numerics::Bindings& b, const HashHeadConfig& config, numerics::Var latent);

// Inference: code of a continuous latent (H, W, c_lat).
HashCode hash_code(const numerics::ParameterSet& params, const HashHeadConfig& config,
                   const numerics::Tensor& latent);

// Cosine similarity of label vectors; 0 when either is all-zero.
double label_similarity(const LabelVector& a, const LabelVector& b);
// A pair is hard when its similarity is exactly 0 or 1.
bool is_hard_pair(double similarity);

struct HashLosses {
  numerics::Var pairwise;        // L_p
  numerics::Var balance;         // L_b
  numerics::Var classification;  // L_c
  numerics::Var total;           // L_p + L_b + L_c
};

// Losses over every ordered pair (i, j) of the batch, i == j included.
numerics::Var soft_pairwise_loss(std::span<const numerics::Var> codes, std::span<const LabelVector> labels,
                                 double alpha, double gamma);
numerics::Var bit_balance_loss(std::span<const numerics::Var> codes);
numerics::Var classification_loss(std::span<const numerics::Var> predicted, std::span<const LabelVector> labels);
HashLosses hashing_loss(std::span<const HashOutputs> outputs, std::span<const LabelVector> labels,
                        const HashHeadConfig& config);

}  // namespace jcif::hash
