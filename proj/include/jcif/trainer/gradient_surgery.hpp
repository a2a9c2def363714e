// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "jcif/common/random.hpp"

namespace jcif::trainer {

using FlatGradient = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);

struct MgdaResult {
  double weight = 0.5;     // weight on the first gradient
  FlatGradient combined;   // minimum-norm point of the segment between the two
};

// Two-task MGDA: weight = clip(<g2 - g1, g2> / |g1 - g2|^2, 0, 1).
MgdaResult mgda_combine(std::span<const double> first, std::span<const double> second);

// MGDA weight solved on each gradient divided by its loss value, applied to
// the unscaled gradients. Invariant to a constant factor on either loss.
// Falls back to mgda_combine when either loss is not positive.
MgdaResult loss_scaled_mgda(std::span<const double> first, std::span<const double> second, double first_loss,
                            double second_loss);

struct Projection {
  std::size_t task = 0;
  std::size_t against = 0;
  double inner_after = 0.0;  // <g_task, g_against> right after the projection
};

struct PcGradResult {
  std::vector<FlatGradient> projected;
  FlatGradient sum;
  std::vector<Projection> projections;
};

// Projects each task gradient off every conflicting original gradient, visiting
// the other tasks in a random order drawn from `rng`.
PcGradResult pcgrad(std::span<const FlatGradient> gradients, Rng& rng);

}  // namespace jcif::trainer
