// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

#include "jcif/numerics/tape.hpp"

namespace jcif::codec {

inline constexpr double kScaleFloor = 1e-6;
// 2^-32: probabilities are floored here before taking logarithms.
inline constexpr double kProbabilityFloor = 2.3283064365386963e-10;

double normal_cdf(double x);

// Per-element Gaussian mixture, already normalized (weights on the simplex,
// scales above the floor).
struct MixtureElement {
  std::span<const double> weights;
  std::span<const double> means;
  std::span<const double> scales;
};

// P(lo - 1/2 <= Y < hi + 1/2) for the mixture, with the upper tail computed
// through symmetry so that far-out intervals keep their relative accuracy.
double mixture_interval(const MixtureElement& m, double lo, double hi);
double mixture_probability(const MixtureElement& m, double symbol);

// Raw hyper-decoder output layout for an (H, W, C) latent with K components:
// channel k*C + c holds weight logits, K*C + k*C + c means and
// 2*K*C + k*C + c pre-softplus scales, for latent channel c.
struct MixtureLayout {
  std::size_t channels;
  std::size_t components;
  std::size_t raw_channels() const { return 3 * channels * components; }
};

// Normalized mixtures for every latent element, stored contiguously as
// [element][k] for weights, means and scales.
struct MixtureTable {
  std::size_t components = 0;
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> scales;

  std::size_t size() const { return components == 0 ? 0 : weights.size() / components; }
  MixtureElement element(std::size_t i) const;
};

MixtureTable mixture_table(const numerics::Tensor& raw, MixtureLayout layout);

// Likelihood of each quantized latent value under its mixture; symbols are
// (H, W, C), raw mixture parameters (H, W, 3*K*C).
numerics::Var mixture_likelihood(numerics::Var symbols, numerics::Var raw, std::size_t components);

// Monotone per-channel CDF: a stack of small softplus-weighted affine maps
// with tanh residual gates (filter widths 1-3-3-3-1), ending in a logit.
inline constexpr std::size_t kDensityParamsPerChannel = 43;

numerics::Tensor initial_density_params(std::size_t channels, double init_scale, std::uint64_t seed);
double density_logit(std::span<const double> channel_params, double x);
double density_cdf(std::span<const double> channel_params, double x);
// P(z) = CDF(z + 1/2) - CDF(z - 1/2), evaluated on the numerically safer side.
double density_interval(std::span<const double> channel_params, double lo, double hi);

// Likelihood of each (H, W, C) hyper-latent value under its channel's
// density; params are (C, 43).
numerics::Var factorized_likelihood(numerics::Var symbols, numerics::Var params);

// Sum of -log2(max(p, floor)). Below the floor the value saturates at 32 bits
// while the gradient is that of -log2 at the floor, so far-off elements keep
// being pulled toward their model without overflowing.
numerics::Var information_bits(numerics::Var probabilities);

}  // namespace jcif::codec
