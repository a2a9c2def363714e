// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "jcif/common/error.hpp"
#include "jcif/common/random.hpp"
#include "jcif/hash/head.hpp"
#include "jcif/numerics/gradcheck.hpp"
#include "jcif/numerics/ops.hpp"

namespace jcif::hash {
namespace {

using numerics::Bindings;
using numerics::ParameterSet;
using numerics::Shape;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;
namespace ops = numerics;

Var vec(Tape& tape, std::vector<double> v) {
  const std::size_t n = v.size();
  return tape.constant(Tensor(Shape{n}, std::move(v)));
}

// Direct per-pair evaluation of the pairwise objective.
double pair_oracle(const std::vector<double>& bi, const std::vector<double>& bj, const LabelVector& li,
                   const LabelVector& lj, double alpha, double gamma) {
  double sh = 0.0;
  for (std::size_t k = 0; k < bi.size(); ++k) sh += bi[k] * bj[k];
  double dot = 0.0, ni = 0.0, nj = 0.0;
  for (std::size_t c = 0; c < li.size(); ++c) {
    dot += li[c] * lj[c];
    ni += li[c];
    nj += lj[c];
  }
  const double so = (ni == 0 || nj == 0) ? 0.0 : dot / std::sqrt(ni * nj);
  const double q = static_cast<double>(bi.size());
  if (so == 0.0 || so == 1.0) return std::log1p(std::exp(alpha * sh)) - alpha * sh * so;
  const double d = 0.5 * (sh + q) - so * q;
  return gamma * d * d;
}

LabelVector random_labels(Rng& rng, std::size_t classes) {
  LabelVector l(classes, 0);
  l[rng.below(classes)] = 1;
  if (rng.uniform() < 0.5) l[rng.below(classes)] = 1;
  return l;
}

TEST(LabelSimilarityTest, Examples) {
  EXPECT_DOUBLE_EQ(label_similarity({0, 1, 0}, {0, 1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(label_similarity({1, 0, 0}, {0, 1, 1}), 0.0);
  EXPECT_NEAR(label_similarity({1, 1, 0}, {1, 0, 1}), 1.0 / (std::sqrt(2.0) * std::sqrt(2.0)), 1e-15);
  EXPECT_DOUBLE_EQ(label_similarity({0, 0, 0}, {1, 0, 1}), 0.0);
  EXPECT_THROW(label_similarity({1}, {1, 0}), ShapeError);
}

TEST(LabelSimilarityTest, SymmetricBoundedAndOneIffParallel) {
  Rng rng(3);
  for (int t = 0; t < 2000; ++t) {
    LabelVector a(5), b(5);
    for (auto& v : a) v = rng.below(2);
    for (auto& v : b) v = rng.below(2);
    const double s = label_similarity(a, b);
    ASSERT_EQ(s, label_similarity(b, a));
    ASSERT_GE(s, 0.0);
    ASSERT_LE(s, 1.0 + 1e-15);
    const bool nonzero = std::count(a.begin(), a.end(), 1) > 0 && std::count(b.begin(), b.end(), 1) > 0;
    ASSERT_EQ(is_hard_pair(s) && s > 0.5, nonzero && a == b);
  }
}

TEST(HashForwardTest, CodeIsSignOfLogitsWithPositiveTies) {
  HashHeadConfig c;
  c.code_bits = 16;
  c.hidden = 8;
  c.latent_channels = 4;
  ParameterSet params;
  init_hash_params(params, c, 1);
  for (auto& v : params.at("hash_head.hash.weight").values()) v = 0.0;
  Rng rng(2);
  Tensor latent(Shape{8, 8, 4});
  for (auto& v : latent.values()) v = rng.normal();
  const HashCode zero_ties = hash_code(params, c, latent);
  for (auto b : zero_ties) EXPECT_EQ(b, 1);

  for (auto& v : params.at("hash_head.hash.bias").values()) v = rng.normal();
  Tape tape;
  Bindings b(tape, params);
  const auto out = hash_forward(b, c, tape.constant(latent));
  for (std::size_t k = 0; k < c.code_bits; ++k) {
    EXPECT_EQ(out.code.value()[k], out.logits.value()[k] >= 0.0 ? 1.0 : -1.0);
  }
  for (double p : out.labels.value().values()) {
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
  EXPECT_EQ(hash_code(params, c, latent), hash_code(params, c, latent));
}

TEST(HashForwardTest, SignBackwardIsIdentity) {
  Tape tape;
  Tensor logits(Shape{4}, {0.3, -2.0, 0.0, 5.0});
  Var x = tape.parameter(logits);
  Var loss = ops::sum(ops::mul(ops::sign_ste(x), vec(tape, {1.0, 2.0, 3.0, 4.0})));
  tape.backward(loss);
  EXPECT_EQ(std::vector<double>(logits.grad().begin(), logits.grad().end()),
            (std::vector<double>{1.0, 2.0, 3.0, 4.0}));
}

TEST(PairwiseLossTest, HardIdenticalPair) {
  Tape tape;
  const Var code = vec(tape, {1, -1, 1, 1});
  const Var codes[] = {code};
  const LabelVector labels[] = {{1, 0}};
  const double v = soft_pairwise_loss(codes, labels, 1.25, 0.025).value().item();
  EXPECT_NEAR(v, std::log1p(std::exp(5.0)) - 5.0, 1e-12);
  EXPECT_NEAR(v, 0.00672, 5e-6);
}

TEST(PairwiseLossTest, SoftPairAtTargetVanishes) {
  Tape tape;
  const Var codes[] = {vec(tape, {1, 1, -1, -1}), vec(tape, {1, -1, 1, -1})};
  const LabelVector labels[] = {{1, 1, 0}, {1, 0, 1}};
  // Only the two self-pairs remain; they are hard with s_h = q.
  const double v = soft_pairwise_loss(codes, labels, 1.25, 0.025).value().item();
  EXPECT_NEAR(v, 2.0 * (std::log1p(std::exp(5.0)) - 5.0), 1e-12);
}

TEST(PairwiseLossTest, DissimilarPairMinimizedByOppositeCodes) {
  const double alpha = 1.25;
  const double q = 4.0;
  auto hard_term = [&](double sh, double so) { return std::log1p(std::exp(alpha * sh)) - alpha * sh * so; };
  double best = INFINITY, best_sh = 0.0;
  for (int sh = -4; sh <= 4; ++sh) {
    if (hard_term(sh, 0.0) < best) {
      best = hard_term(sh, 0.0);
      best_sh = sh;
    }
  }
  EXPECT_EQ(best_sh, -q);
  Tape tape;
  const Var codes[] = {vec(tape, {1, 1, -1, 1}), vec(tape, {-1, -1, 1, -1})};
  const LabelVector labels[] = {{1, 0}, {0, 1}};
  const double v = soft_pairwise_loss(codes, labels, alpha, 0.025).value().item();
  EXPECT_NEAR(v, 2.0 * std::log1p(std::exp(-alpha * q)) + 2.0 * (std::log1p(std::exp(5.0)) - 5.0), 1e-12);
  EXPECT_NEAR(2.0 * std::log1p(std::exp(-alpha * q)), 2.0 * best, 1e-15);
}

TEST(PairwiseLossTest, HardTermMonotoneInInnerProduct) {
  const double q = 64, alpha = 5.0 / q;
  for (int sh = -63; sh <= 64; ++sh) {
    auto t = [&](double s, double so) { return std::log1p(std::exp(alpha * s)) - alpha * s * so; };
    EXPECT_LT(t(sh, 1.0), t(sh - 1, 1.0));
    EXPECT_GT(t(sh, 0.0), t(sh - 1, 0.0));
  }
}

TEST(PairwiseLossTest, MatchesPerPairOracleOnRandomBatches) {
  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng.below(6);
    const std::size_t q = 8;
    Tape tape;
    std::vector<Var> codes;
    std::vector<std::vector<double>> raw;
    std::vector<LabelVector> labels;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> b(q);
      for (auto& v : b) v = rng.uniform() < 0.5 ? -1.0 : 1.0;
      raw.push_back(b);
      codes.push_back(vec(tape, b));
      labels.push_back(random_labels(rng, 4));
    }
    double oracle = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) oracle += pair_oracle(raw[i], raw[j], labels[i], labels[j], 5.0 / q, 0.1 / q);
    }
    EXPECT_NEAR(soft_pairwise_loss(codes, labels, 5.0 / q, 0.1 / q).value().item(), oracle, 1e-9 * (1 + oracle));
  }
}

TEST(BitBalanceTest, Examples) {
  Tape tape;
  const Var balanced[] = {vec(tape, {1, -1, 1, -1})};
  EXPECT_EQ(bit_balance_loss(balanced).value().item(), 0.0);
  const Var ones[] = {vec(tape, {1, 1, 1, 1})};
  EXPECT_EQ(bit_balance_loss(ones).value().item(), 32.0);
  const Var mixed[] = {vec(tape, {1, -1, 1, -1}), vec(tape, {1, 1, 1, -1})};
  // Ordered pairs: (0,0) 0, (0,1) 0+4, (1,0) 4+0, (1,1) 4+4.
  EXPECT_EQ(bit_balance_loss(mixed).value().item(), 16.0);
}

TEST(BitBalanceTest, ZeroIffEveryCodeBalanced) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    Tape tape;
    std::vector<Var> codes;
    bool all_balanced = true;
    for (int i = 0; i < 3; ++i) {
      std::vector<double> b(6);
      double s = 0;
      for (auto& v : b) s += v = rng.uniform() < 0.5 ? -1.0 : 1.0;
      all_balanced = all_balanced && s == 0.0;
      codes.push_back(vec(tape, b));
    }
    ASSERT_EQ(bit_balance_loss(codes).value().item() == 0.0, all_balanced);
  }
}

TEST(ClassificationLossTest, Examples) {
  Tape tape;
  const Var perfect[] = {vec(tape, {1, 0, 1})};
  const LabelVector truth[] = {{1, 0, 1}};
  EXPECT_EQ(classification_loss(perfect, truth).value().item(), 0.0);
  const Var half[] = {vec(tape, {0.5, 0.5, 0.5, 0.5})};
  const LabelVector four[] = {{1, 0, 0, 1}};
  EXPECT_DOUBLE_EQ(classification_loss(half, four).value().item(), 2.0);
}

// The losses are checked on relaxed (real-valued) codes; the sign layer in
// front of them passes gradients through unchanged.
TEST(HashLossGradientTest, AllLossesMatchFiniteDifferences) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.below(3);
    const std::size_t q = 8, C = 4;
    std::vector<Tensor> codes(n, Tensor(Shape{q})), preds(n, Tensor(Shape{C}));
    std::vector<LabelVector> labels;
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& v : codes[i].values()) v = rng.uniform(-1.0, 1.0);
      for (auto& v : preds[i].values()) v = rng.uniform(0.05, 0.95);
      labels.push_back(random_labels(rng, C));
    }
    std::vector<Tensor*> leaves;
    for (auto& t : codes) leaves.push_back(&t);
    for (auto& t : preds) leaves.push_back(&t);
    auto build = [&](Tape& tape, int which) {
      std::vector<Var> cv, pv;
      for (auto& t : codes) cv.push_back(tape.parameter(t));
      for (auto& t : preds) pv.push_back(tape.parameter(t));
      const Var lp = soft_pairwise_loss(cv, labels, 5.0 / q, 0.1 / q);
      const Var lb = bit_balance_loss(cv);
      const Var lc = classification_loss(pv, labels);
      switch (which) {
        case 0: return lp;
        case 1: return lb;
        case 2: return lc;
        default: return ops::add(ops::add(lp, lb), lc);
      }
    };
    for (int which = 0; which < 4; ++which) {
      EXPECT_LT(numerics::max_relative_gradient_error([&](Tape& t) { return build(t, which); }, leaves), 1e-4)
          << "loss " << which << " trial " << trial;
    }
  }
}

TEST(HashingLossTest, TotalIsSumAndGradientsAdd) {
  HashHeadConfig c;
  c.code_bits = 16;
  c.hidden = 8;
  c.latent_channels = 4;
  c.classes = 3;
  ParameterSet params;
  init_hash_params(params, c, 3);
  Rng rng(5);
  std::vector<Tensor> latents;
  std::vector<LabelVector> labels;
  for (int i = 0; i < 4; ++i) {
    Tensor t(Shape{4, 4, 4});
    for (auto& v : t.values()) v = rng.normal();
    latents.push_back(t);
    labels.push_back(random_labels(rng, 3));
  }
  auto grads = [&](int which) {
    params.zero_grad();
    Tape tape;
    Bindings b(tape, params, true);
    std::vector<HashOutputs> outs;
    for (auto& l : latents) outs.push_back(hash_forward(b, c, tape.constant(l)));
    const HashLosses L = hashing_loss(outs, labels, c);
    if (which == -1) {
      EXPECT_NEAR(L.total.value().item(),
                  L.pairwise.value().item() + L.balance.value().item() + L.classification.value().item(), 1e-12);
    }
    const Var pick[] = {L.pairwise, L.balance, L.classification, L.total};
    tape.backward(pick[which < 0 ? 3 : which]);
    return params.flat_grad(params.names());
  };
  const auto total = grads(-1);
  const auto g0 = grads(0), g1 = grads(1), g2 = grads(2);
  for (std::size_t i = 0; i < total.size(); ++i) {
    ASSERT_NEAR(g0[i] + g1[i] + g2[i], total[i], 1e-9 * (1.0 + std::abs(total[i])));
  }
}

TEST(HashHeadConfigTest, DefaultsAndRecord) {
  HashHeadConfig c;
  EXPECT_DOUBLE_EQ(c.relaxation(), 5.0 / 64.0);
  EXPECT_DOUBLE_EQ(c.soft_weight(), 0.1 / 64.0);
  EXPECT_EQ(HashHeadConfig::from_tensor(c.to_tensor()), c);
  c.code_bits = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

}  // namespace
}  // namespace jcif::hash
