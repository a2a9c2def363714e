// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/trainer/adam.hpp"

#include <cmath>

#include "jcif/common/error.hpp"

namespace jcif::trainer {

void Adam::step(numerics::ParameterSet& params, const std::vector<std::string>& names,
                std::span<const double> gradient, double learning_rate,
                const std::function<double(const std::string&)>& factor) {
  if (!(learning_rate >= 0.0)) throw ConfigError("adam: learning rate must be non-negative");
  std::size_t total = 0;
  for (const auto& n : names) total += params.at(n).size();
  if (total != gradient.size()) throw ShapeError("adam: gradient length does not match parameters");
  for (double g : gradient) {
    if (!std::isfinite(g)) throw NumericError("adam: non-finite gradient");
  }

  ++t_;
  const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
  std::size_t offset = 0;
  for (const auto& name : names) {
    auto& p = params.at(name);
    auto& st = state_[name];
    if (st.m.size() != p.size()) {
      st.m.assign(p.size(), 0.0);
      st.v.assign(p.size(), 0.0);
    }
    const double lr = learning_rate * (factor ? factor(name) : 1.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = gradient[offset + i];
      st.m[i] = options_.beta1 * st.m[i] + (1.0 - options_.beta1) * g;
      st.v[i] = options_.beta2 * st.v[i] + (1.0 - options_.beta2) * g * g;
      if (lr == 0.0) continue;
      const double mhat = st.m[i] / bc1;
      const double vhat = st.v[i] / bc2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + options_.epsilon);
    }
    offset += p.size();
  }
}

}  // namespace jcif::trainer
