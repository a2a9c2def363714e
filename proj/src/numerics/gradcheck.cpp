// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "jcif/common/error.hpp"
#include "jcif/common/random.hpp"

namespace jcif::numerics {

namespace {

double evaluate(const std::function<Var(Tape&)>& loss) {
  Tape tape;
  const double v = loss(tape).value().item();
  if (!std::isfinite(v)) throw NumericError("gradient check: non-finite loss value");
  return v;
}

}  // namespace

double max_relative_gradient_error(const std::function<Var(Tape&)>& loss,
                                   std::span<Tensor* const> params,
                                   const GradCheckOptions& options) {
  if (!(options.step > 0.0)) throw ConfigError("gradient check step must be positive");
  for (Tensor* p : params) {
    p->enable_grad();
    p->zero_grad();
  }
  {
    Tape tape;
    Var out = loss(tape);
    if (!std::isfinite(out.value().item())) {
      throw NumericError("gradient check: non-finite loss value");
    }
    tape.backward(out);
  }

  Rng rng(options.seed);
  double worst = 0.0;
  for (Tensor* p : params) {
    std::vector<double> analytic(p->grad().begin(), p->grad().end());
    std::vector<std::size_t> coords(p->size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.max_coords_per_tensor != 0 && coords.size() > options.max_coords_per_tensor) {
      rng.shuffle(coords.begin(), coords.end());
      coords.resize(options.max_coords_per_tensor);
    }
    for (std::size_t i : coords) {
      if (!std::isfinite(analytic[i])) throw NumericError("gradient check: non-finite gradient");
      const double saved = (*p)[i];
      (*p)[i] = saved + options.step;
      const double up = evaluate(loss);
      (*p)[i] = saved - options.step;
      const double down = evaluate(loss);
      (*p)[i] = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

double finite_difference_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x,
                               double step) {
  Tensor leaf = x;
  Tensor* params[] = {&leaf};
  GradCheckOptions options;
  options.step = step;
  return max_relative_gradient_error(
      [&](Tape& tape) { return f(tape, tape.parameter(leaf)); }, params, options);
}

}  // namespace jcif::numerics
