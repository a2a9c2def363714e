// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jcif/pipeline/model.hpp"
#include "jcif/retrieval/metrics.hpp"

namespace jcif::pipeline {

struct LabeledImage {
  retrieval::ImageId id = 0;
  codec::RasterImage image;
  LabelVector labels;
};

struct EvaluationOptions {
  std::size_t k = 10;
  // Ranking depth used for AP; zero ranks the whole archive.
  std::size_t depth = 0;
  retrieval::RelevanceRule rule;
};

struct QueryMetrics {
  retrieval::ImageId query = 0;
  double precision = 0.0;
  double recall = 0.0;
  std::optional<double> average_precision;  // empty when nothing is relevant
  double seconds = 0.0;
};

enum class Approach { kJoint, kStandard };
std::string_view approach_name(Approach approach);

struct MetricsReport {
  Approach approach = Approach::kJoint;
  std::size_t k = 10;
  double precision = 0.0;  // mean P@k over all queries
  double recall = 0.0;     // mean R@k over all queries
  double map = 0.0;
  std::size_t evaluated = 0;
  std::size_t excluded = 0;
  double total_seconds = 0.0;
  std::uint64_t decode_operations = 0;
  std::vector<QueryMetrics> queries;

  double mean_query_seconds() const;
};

using GalleryLabels = std::map<retrieval::ImageId, LabelVector>;

// Decode-free retrieval: the hash table is built from the stored codes.
MetricsReport evaluate_joint(const Model& model, const Archive& archive, const GalleryLabels& labels,
                             std::span<const LabeledImage> queries, const EvaluationOptions& options = {});

// Decodes every archived image, re-encodes and hashes it, then retrieves.
// The clock covers the decoding of the whole archive.
MetricsReport evaluate_standard(const Model& model, const Archive& archive, const GalleryLabels& labels,
                                std::span<const LabeledImage> queries, const EvaluationOptions& options = {});

// Per-query rows without timing, so identical runs give identical files.
std::string metrics_csv(std::span<const MetricsReport> reports);
std::string summary_csv(std::span<const MetricsReport> reports);
std::string timing_csv(std::span<const MetricsReport> reports);

}  // namespace jcif::pipeline
