// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "jcif/numerics/tape.hpp"

namespace jcif::numerics {

struct GradCheckOptions {
  double step = 1e-5;
  // Number of coordinates probed per tensor; 0 probes all of them.
  std::size_t max_coords_per_tensor = 0;
  std::uint64_t seed = 0;
};

// Max over coordinates of |analytic - numeric| / max(1, |analytic|), with the
// numeric derivative taken by central differences. `loss` must register each
// tensor in `params` through Tape::parameter and return a scalar.
double max_relative_gradient_error(const std::function<Var(Tape&)>& loss,
                                   std::span<Tensor* const> params,
                                   const GradCheckOptions& options = {});

// Single-input convenience form: f receives x as a parameter leaf.
double finite_difference_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x,
                               double step);

}  // namespace jcif::numerics
