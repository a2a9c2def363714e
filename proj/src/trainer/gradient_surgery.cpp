// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/trainer/gradient_surgery.hpp"

#include <algorithm>
#include <numeric>

#include "jcif/common/error.hpp"

namespace jcif::trainer {

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("dot: gradient lengths differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

MgdaResult mgda_combine(std::span<const double> g1, std::span<const double> g2) {
  if (g1.size() != g2.size()) throw ShapeError("mgda_combine: gradient lengths differ");
  double diff_sq = 0.0, num = 0.0;
  for (std::size_t i = 0; i < g1.size(); ++i) {
    const double d = g1[i] - g2[i];
    diff_sq += d * d;
    num -= d * g2[i];
  }
  MgdaResult r;
  if (diff_sq > 0.0) r.weight = std::clamp(num / diff_sq, 0.0, 1.0);
  r.combined.resize(g1.size());
  for (std::size_t i = 0; i < g1.size(); ++i) r.combined[i] = r.weight * g1[i] + (1.0 - r.weight) * g2[i];
  return r;
}

MgdaResult loss_scaled_mgda(std::span<const double> g1, std::span<const double> g2, double l1, double l2) {
  if (!(l1 > 0.0) || !(l2 > 0.0)) return mgda_combine(g1, g2);
  if (g1.size() != g2.size()) throw ShapeError("mgda_combine: gradient lengths differ");
  FlatGradient a(g1.size()), b(g2.size());
  for (std::size_t i = 0; i < g1.size(); ++i) {
    a[i] = g1[i] / l1;
    b[i] = g2[i] / l2;
  }
  MgdaResult r;
  r.weight = mgda_combine(a, b).weight;
  r.combined.resize(g1.size());
  for (std::size_t i = 0; i < g1.size(); ++i) r.combined[i] = r.weight * g1[i] + (1.0 - r.weight) * g2[i];
  return r;
}

PcGradResult pcgrad(std::span<const FlatGradient> g, Rng& rng) {
  if (g.size() < 2) throw ConfigError("pcgrad: need at least two task gradients");
  const std::size_t dim = g[0].size();
  for (const auto& v : g) {
    if (v.size() != dim) throw ShapeError("pcgrad: gradient lengths differ");
  }
  std::vector<double> norms(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) norms[j] = dot(g[j], g[j]);

  PcGradResult r;
  r.projected.reserve(g.size());
  r.sum.assign(dim, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    FlatGradient gi = g[i];
    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (j != i) order.push_back(j);
    }
    rng.shuffle(order.begin(), order.end());
    for (std::size_t j : order) {
      if (norms[j] == 0.0) continue;
      const double d = dot(gi, g[j]);
      if (d >= 0.0) continue;
      const double c = d / norms[j];
      for (std::size_t k = 0; k < dim; ++k) gi[k] -= c * g[j][k];
      r.projections.push_back({i, j, dot(gi, g[j])});
    }
    for (std::size_t k = 0; k < dim; ++k) r.sum[k] += gi[k];
    r.projected.push_back(std::move(gi));
  }
  return r;
}

}  // namespace jcif::trainer
