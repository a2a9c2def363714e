// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/hash/head.hpp"

#include <cmath>

#include "jcif/common/error.hpp"
#include "jcif/common/random.hpp"
#include "jcif/numerics/ops.hpp"

namespace jcif::hash {

using numerics::Bindings;
using numerics::ParameterSet;
using numerics::Shape;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;
namespace ops = numerics;

namespace {

void add_dense(ParameterSet& params, const std::string& name, Shape weight_shape, std::size_t fan_in, double gain,
               Rng& rng) {
  const std::size_t out = weight_shape.back();
  Tensor w(std::move(weight_shape));
  const double std_dev = std::sqrt(gain / static_cast<double>(fan_in));
  for (auto& v : w.values()) v = rng.normal(0.0, std_dev);
  params.add(name + ".weight", std::move(w));
  params.add(name + ".bias", Tensor(Shape{out}));
}

Var dense(Bindings& b, const std::string& name, Var row) {
  Var y = ops::matmul(row, b[name + ".weight"]);
  return ops::bias_add(ops::reshape(y, Shape{y.shape()[1]}), b[name + ".bias"]);
}

Var pointwise(Bindings& b, const std::string& name, Var x) {
  return ops::relu(ops::bias_add(ops::conv2d(x, b[name + ".weight"]), b[name + ".bias"]));
}

// Stacks rank-1 vars of equal length into an (n, d) matrix.
Var stack_rows(std::span<const Var> rows, const char* what) {
  if (rows.empty()) throw ShapeError(std::string(what) + ": empty batch");
  std::vector<Var> parts;
  parts.reserve(rows.size());
  const std::size_t d = rows[0].value().size();
  for (const Var& r : rows) {
    if (r.value().size() != d) throw ShapeError(std::string(what) + ": rows differ in length");
    parts.push_back(ops::reshape(r, Shape{1, d}));
  }
  return ops::concat(parts, 0);
}

Tensor label_matrix(std::span<const LabelVector> labels, std::size_t n, std::size_t classes, const char* what) {
  if (labels.size() != n) throw ShapeError(std::string(what) + ": label count does not match batch");
  Tensor t(Shape{n, classes});
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i].size() != classes) throw ShapeError(std::string(what) + ": label vector length mismatch");
    for (std::size_t c = 0; c < classes; ++c) t[i * classes + c] = labels[i][c];
  }
  return t;
}

}  // namespace

void HashHeadConfig::validate() const {
  if (code_bits == 0 || hidden == 0 || classes == 0 || latent_channels == 0) {
    throw ConfigError("hash head: code length, width, classes and latent channels must be positive");
  }
  if (alpha < 0.0 || gamma < 0.0 || !std::isfinite(alpha) || !std::isfinite(gamma)) {
    throw ConfigError("hash head: alpha and gamma must be non-negative");
  }
}

Tensor HashHeadConfig::to_tensor() const {
  return Tensor(Shape{6}, {static_cast<double>(code_bits), static_cast<double>(hidden), static_cast<double>(classes),
                           static_cast<double>(latent_channels), alpha, gamma});
}

HashHeadConfig HashHeadConfig::from_tensor(const Tensor& t) {
  if (t.shape() != Shape{6}) throw FormatError("hash head config record: expected 6 values");
  auto count = [&](std::size_t i) {
    const double v = t[i];
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e6) throw FormatError("hash head config record: bad size");
    return static_cast<std::size_t>(v);
  };
  HashHeadConfig c;
  c.code_bits = count(0);
  c.hidden = count(1);
  c.classes = count(2);
  c.latent_channels = count(3);
  c.alpha = t[4];
  c.gamma = t[5];
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("hash head config record: ") + e.what());
  }
  return c;
}

void init_hash_params(ParameterSet& params, const HashHeadConfig& c, std::uint64_t seed) {
  c.validate();
  Rng rng = Rng::derive(seed, 0x4A54);
  add_dense(params, "hash_head.attention", Shape{c.latent_channels, c.latent_channels}, c.latent_channels, 1.0, rng);
  add_dense(params, "hash_head.hidden.0", Shape{1, 1, c.latent_channels, c.hidden}, c.latent_channels, 2.0, rng);
  add_dense(params, "hash_head.hidden.1", Shape{1, 1, c.hidden, c.hidden}, c.hidden, 2.0, rng);
  add_dense(params, "hash_head.classify", Shape{c.hidden, c.classes}, c.hidden, 1.0, rng);
  add_dense(params, "hash_head.hash", Shape{c.hidden, c.code_bits}, c.hidden, 1.0, rng);
}

HashOutputs hash_forward(Bindings& b, const HashHeadConfig& c, Var latent) {
  if (latent.shape().size() != 3 || latent.shape()[2] != c.latent_channels) {
    throw ShapeError("hash_forward: expected (h, w, " + std::to_string(c.latent_channels) + ") latent, got " +
                     numerics::to_string(latent.shape()));
  }
  const Var pooled = ops::reshape(ops::global_avg_pool(latent), Shape{1, c.latent_channels});
  const Var gate = ops::sigmoid(dense(b, "hash_head.attention", pooled));
  Var h = ops::channel_scale(latent, gate);
  h = pointwise(b, "hash_head.hidden.0", h);
  h = pointwise(b, "hash_head.hidden.1", h);
  const Var features = ops::reshape(ops::global_avg_pool(h), Shape{1, c.hidden});
  HashOutputs out;
  out.labels = ops::sigmoid(dense(b, "hash_head.classify", features));
  out.logits = dense(b, "hash_head.hash", features);
  out.code = ops::sign_ste(out.logits);
  return out;
}

HashCode hash_code(const ParameterSet& params, const HashHeadConfig& config, const Tensor& latent) {
  Tape tape;
  Bindings b(tape, params);
  const Tensor& code = hash_forward(b, config, tape.constant(latent)).code.value();
  HashCode out(code.size());
  for (std::size_t i = 0; i < code.size(); ++i) out[i] = code[i] > 0.0 ? 1 : -1;
  return out;
}

double label_similarity(const LabelVector& a, const LabelVector& b) {
  if (a.size() != b.size()) throw ShapeError("label_similarity: label vectors differ in length");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

bool is_hard_pair(double s) { return std::abs(s) <= 1e-12 || std::abs(s - 1.0) <= 1e-12; }

Var soft_pairwise_loss(std::span<const Var> codes, std::span<const LabelVector> labels, double alpha, double gamma) {
  const Var B = stack_rows(codes, "soft_pairwise_loss");
  Tape& tape = B.tape();
  const std::size_t n = codes.size();
  const double q = static_cast<double>(B.shape()[1]);
  if (labels.size() != n) throw ShapeError("soft_pairwise_loss: label count does not match batch");

  Tensor hard(Shape{n, n}), soft(Shape{n, n}), target(Shape{n, n}), sim(Shape{n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double s = label_similarity(labels[i], labels[j]);
      const bool m = is_hard_pair(s);
      sim[i * n + j] = s;
      hard[i * n + j] = m ? 1.0 : 0.0;
      soft[i * n + j] = m ? 0.0 : 1.0;
      // 1/2 (s_h + q) - s_o q  =  1/2 s_h + (q/2 - s_o q)
      target[i * n + j] = 0.5 * q - s * q;
    }
  }
  const Var inner = ops::matmul(B, ops::transpose(B));
  const Var a_inner = ops::scale(inner, alpha);
  const Var hard_term = ops::mul(tape.constant(std::move(hard)),
                                 ops::sub(ops::softplus(a_inner), ops::mul(a_inner, tape.constant(std::move(sim)))));
  const Var gap = ops::add(ops::scale(inner, 0.5), tape.constant(std::move(target)));
  const Var soft_term = ops::mul(tape.constant(std::move(soft)), ops::square(gap));
  return ops::add(ops::sum(hard_term), ops::scale(ops::sum(soft_term), gamma));
}

Var bit_balance_loss(std::span<const Var> codes) {
  const Var B = stack_rows(codes, "bit_balance_loss");
  const std::size_t n = codes.size();
  const Var row_sums = ops::matmul(B, B.tape().constant(Tensor(Shape{B.shape()[1], 1}, 1.0)));
  // Each code occurs once as b_i and once as b_j in n ordered pairs.
  return ops::scale(ops::sum(ops::square(row_sums)), 2.0 * static_cast<double>(n));
}

Var classification_loss(std::span<const Var> predicted, std::span<const LabelVector> labels) {
  const Var P = stack_rows(predicted, "classification_loss");
  const std::size_t n = predicted.size();
  const Var diff = ops::sub(P, P.tape().constant(label_matrix(labels, n, P.shape()[1], "classification_loss")));
  return ops::scale(ops::sum(ops::square(diff)), 2.0 * static_cast<double>(n));
}

HashLosses hashing_loss(std::span<const HashOutputs> outputs, std::span<const LabelVector> labels,
                        const HashHeadConfig& config) {
  std::vector<Var> codes, predicted;
  for (const auto& o : outputs) {
    codes.push_back(o.code);
    predicted.push_back(o.labels);
  }
  HashLosses l;
  l.pairwise = soft_pairwise_loss(codes, labels, config.relaxation(), config.soft_weight());
  l.balance = bit_balance_loss(codes);
  l.classification = classification_loss(predicted, labels);
  l.total = ops::add(ops::add(l.pairwise, l.balance), l.classification);
  return l;
}

}  // namespace jcif::hash
