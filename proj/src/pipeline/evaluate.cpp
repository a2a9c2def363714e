// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/pipeline/evaluate.hpp"

#include <chrono>
#include <sstream>

#include "jcif/codec/coding.hpp"

namespace jcif::pipeline {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

const LabelVector& gallery_label(const GalleryLabels& labels, retrieval::ImageId id) {
  auto it = labels.find(id);
  if (it == labels.end()) throw NotFoundError("no labels for archived image " + std::to_string(id));
  return it->second;
}

// Runs every query against `table`; the caller's clock already covers setup.
void run_queries(MetricsReport& report, const Model& model, const retrieval::HashTable& table,
                 const GalleryLabels& labels, std::span<const LabeledImage> queries, const EvaluationOptions& options) {
  if (options.k == 0) throw ConfigError("evaluation: k must be positive");
  const std::size_t depth = options.depth == 0 ? std::max<std::size_t>(table.size(), 1) : options.depth;
  std::vector<std::optional<double>> aps;
  for (const auto& q : queries) {
    const auto start = Clock::now();
    const auto result = table.query(image_code(model, q.image), depth);
    QueryMetrics m;
    m.query = q.id;
    m.seconds = since(start);

    std::vector<std::uint8_t> ranking;
    ranking.reserve(result.ids.size());
    for (auto id : result.ids) ranking.push_back(options.rule.relevant(q.labels, gallery_label(labels, id)) ? 1 : 0);
    std::size_t total_relevant = 0;
    for (const auto& [id, l] : labels) total_relevant += options.rule.relevant(q.labels, l) ? 1 : 0;
    const auto pr = retrieval::precision_recall_at_k(ranking, total_relevant, options.k);
    m.precision = pr.precision;
    m.recall = pr.recall;
    m.average_precision = retrieval::average_precision(ranking);
    aps.push_back(m.average_precision);
    report.queries.push_back(m);
  }
  const auto summary = retrieval::mean_average_precision(aps);
  report.map = summary.map;
  report.evaluated = summary.evaluated;
  report.excluded = summary.excluded;
  for (const auto& m : report.queries) {
    report.precision += m.precision;
    report.recall += m.recall;
  }
  if (!report.queries.empty()) {
    report.precision /= static_cast<double>(report.queries.size());
    report.recall /= static_cast<double>(report.queries.size());
  }
}

void check_gallery(const Archive& archive, const GalleryLabels& labels) {
  for (const auto& e : archive.entries) gallery_label(labels, e.id);
}

}  // namespace

std::string_view approach_name(Approach approach) {
  return approach == Approach::kJoint ? "joint" : "standard";
}

double MetricsReport::mean_query_seconds() const {
  return queries.empty() ? 0.0 : total_seconds / static_cast<double>(queries.size());
}

MetricsReport evaluate_joint(const Model& model, const Archive& archive, const GalleryLabels& labels,
                             std::span<const LabeledImage> queries, const EvaluationOptions& options) {
  check_gallery(archive, labels);
  MetricsReport report;
  report.approach = Approach::kJoint;
  report.k = options.k;
  const auto decodes_before = codec::decode_operation_count();
  const auto start = Clock::now();
  std::vector<std::pair<retrieval::ImageId, retrieval::PackedCode>> codes;
  codes.reserve(archive.entries.size());
  for (const auto& e : archive.entries) codes.emplace_back(e.id, e.code);
  const auto table = retrieval::HashTable::build_packed(archive.code_bits, codes);
  run_queries(report, model, table, labels, queries, options);
  report.total_seconds = since(start);
  report.decode_operations = codec::decode_operation_count() - decodes_before;
  return report;
}

MetricsReport evaluate_standard(const Model& model, const Archive& archive, const GalleryLabels& labels,
                                std::span<const LabeledImage> queries, const EvaluationOptions& options) {
  check_gallery(archive, labels);
  MetricsReport report;
  report.approach = Approach::kStandard;
  report.k = options.k;
  const auto decodes_before = codec::decode_operation_count();
  const auto start = Clock::now();
  std::vector<std::pair<retrieval::ImageId, HashCode>> codes;
  codes.reserve(archive.entries.size());
  for (const auto& e : archive.entries) {
    const auto image = codec::decompress(model.params, model.codec, e.image);
    codes.emplace_back(e.id, image_code(model, image));
  }
  const auto table = retrieval::HashTable::build(archive.code_bits, codes);
  run_queries(report, model, table, labels, queries, options);
  report.total_seconds = since(start);
  report.decode_operations = codec::decode_operation_count() - decodes_before;
  return report;
}

std::string metrics_csv(std::span<const MetricsReport> reports) {
  std::ostringstream os;
  os.precision(10);
  os << "approach,query_id,P@k,R@k,AP\n";
  for (const auto& r : reports) {
    for (const auto& q : r.queries) {
      os << approach_name(r.approach) << ',' << q.query << ',' << q.precision << ',' << q.recall << ',';
      if (q.average_precision) os << *q.average_precision;
      os << '\n';
    }
  }
  return os.str();
}

std::string summary_csv(std::span<const MetricsReport> reports) {
  std::ostringstream os;
  os.precision(10);
  os << "approach,k,P@k,R@k,mAP,evaluated,excluded,decode_operations\n";
  for (const auto& r : reports) {
    os << approach_name(r.approach) << ',' << r.k << ',' << r.precision << ',' << r.recall << ',' << r.map << ','
       << r.evaluated << ',' << r.excluded << ',' << r.decode_operations << '\n';
  }
  return os.str();
}

std::string timing_csv(std::span<const MetricsReport> reports) {
  std::ostringstream os;
  os.precision(10);
  os << "approach,query_id,seconds\n";
  for (const auto& r : reports) {
    for (const auto& q : r.queries) os << approach_name(r.approach) << ',' << q.query << ',' << q.seconds << '\n';
    os << approach_name(r.approach) << ",total," << r.total_seconds << '\n';
    os << approach_name(r.approach) << ",mean_per_query," << r.mean_query_seconds() << '\n';
  }
  return os.str();
}

}  // namespace jcif::pipeline
