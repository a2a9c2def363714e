// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "jcif/numerics/parameters.hpp"

namespace jcif::trainer {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adaptive-moment optimizer with per-tensor learning-rate factors.
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  // `gradient` is the concatenation of the gradients of `names`, in order.
  // `factor(name)` scales the rate per tensor; a zero factor freezes it.
  void step(numerics::ParameterSet& params, const std::vector<std::string>& names,
            std::span<const double> gradient, double learning_rate,
            const std::function<double(const std::string&)>& factor = {});

  std::size_t steps() const { return t_; }

 private:
  struct Moments {
    std::vector<double> m, v;
  };
  AdamOptions options_;
  std::size_t t_ = 0;
  std::map<std::string, Moments> state_;
};

}  // namespace jcif::trainer
