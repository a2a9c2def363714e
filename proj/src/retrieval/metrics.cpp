// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/retrieval/metrics.hpp"

#include <cmath>

#include "jcif/common/error.hpp"

namespace jcif::retrieval {

bool RelevanceRule::relevant(const LabelVector& a, const LabelVector& b) const {
  if (a.size() != b.size()) throw ShapeError("relevance: label vectors differ in length");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i] && b[i]);
    na += static_cast<double>(a[i] != 0);
    nb += static_cast<double>(b[i] != 0);
  }
  if (kind == Kind::kSharedLabel) return dot > 0.0;
  if (na == 0.0 || nb == 0.0) return false;
  return dot / std::sqrt(na * nb) >= threshold;
}

PrecisionRecall precision_recall_at_k(std::span<const std::uint8_t> ranking, std::size_t total_relevant, std::size_t k) {
  if (k == 0) throw ConfigError("precision/recall: k must be at least 1");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranking.size() && i < k; ++i) hits += ranking[i] != 0 ? 1 : 0;
  PrecisionRecall pr;
  pr.precision = static_cast<double>(hits) / static_cast<double>(k);
  pr.recall = total_relevant == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(total_relevant);
  return pr;
}

std::optional<double> average_precision(std::span<const std::uint8_t> ranking) {
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (ranking[i] == 0) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  if (hits == 0) return std::nullopt;
  return sum / static_cast<double>(hits);
}

MapSummary mean_average_precision(std::span<const std::optional<double>> per_query) {
  MapSummary s;
  double total = 0.0;
  for (const auto& ap : per_query) {
    if (ap) {
      total += *ap;
      ++s.evaluated;
    } else {
      ++s.excluded;
    }
  }
  s.map = s.evaluated == 0 ? 0.0 : total / static_cast<double>(s.evaluated);
  return s;
}

}  // namespace jcif::retrieval
