// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "jcif/common/labels.hpp"

namespace jcif::retrieval {

// Multi-label relevance. The default treats two images as relevant when they
// share at least one label; kCosine requires label cosine >= threshold.
struct RelevanceRule {
  enum class Kind { kSharedLabel, kCosine };
  Kind kind = Kind::kSharedLabel;
  double threshold = 0.5;

  bool relevant(const LabelVector& a, const LabelVector& b) const;
};

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

// `ranking` holds the relevance (0 or 1) of each retrieved item in rank order;
// `total_relevant` counts relevant items in the whole archive.
PrecisionRecall precision_recall_at_k(std::span<const std::uint8_t> ranking, std::size_t total_relevant, std::size_t k);

// Mean over relevant ranks r of (relevant items in the first r) / r; empty
// when the ranking contains no relevant item.
std::optional<double> average_precision(std::span<const std::uint8_t> ranking);

struct MapSummary {
  double map = 0.0;
  std::size_t evaluated = 0;
  std::size_t excluded = 0;  // queries without any relevant item
};

MapSummary mean_average_precision(std::span<const std::optional<double>> per_query);

}  // namespace jcif::retrieval
