// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "jcif/codec/coding.hpp"
#include "jcif/common/error.hpp"
#include "jcif/dataset/scene.hpp"
#include "jcif/pipeline/evaluate.hpp"
#include "jcif/pipeline/rate_distortion.hpp"

namespace jcif::pipeline {
namespace {

namespace fs = std::filesystem;

Model small_model() {
  Model m;
  m.codec.hidden1 = 6;
  m.codec.hidden2 = 8;
  m.codec.latent_channels = 4;
  m.codec.hyper_hidden = 6;
  m.codec.hyper_channels = 2;
  m.codec.mixtures = 2;
  hash::HashHeadConfig h;
  h.code_bits = 16;
  h.hidden = 16;
  h.classes = 4;
  h.latent_channels = 4;
  m.head = h;
  codec::init_codec_params(m.params, m.codec, 3);
  hash::init_hash_params(m.params, h, 4);
  return m;
}

std::vector<LabeledImage> scenes(std::size_t first, std::size_t n) {
  dataset::SyntheticSceneConfig sc;
  sc.height = sc.width = 16;
  sc.classes = 4;
  std::vector<LabeledImage> out;
  for (std::size_t i = first; i < first + n; ++i) {
    auto s = dataset::generate_scene(sc, i);
    out.push_back({i, s.image, s.labels});
  }
  return out;
}

std::vector<SourceImage> sources(const std::vector<LabeledImage>& images) {
  std::vector<SourceImage> out;
  for (const auto& im : images) out.push_back({im.id, im.image});
  return out;
}

TEST(ArchiveTest, RoundTripAndLookup) {
  const auto model = small_model();
  const auto images = scenes(0, 6);
  const auto archive = compress_images(model, sources(images));
  ASSERT_EQ(archive.entries.size(), 6u);
  EXPECT_EQ(archive.code_bits, 16u);

  ByteWriter w;
  append_archive(w, archive);
  ByteReader r(w.bytes());
  EXPECT_EQ(read_archive(r), archive);
  EXPECT_TRUE(r.done());

  const auto& e = archive.find(3);
  EXPECT_EQ(e.code, retrieval::pack_code(image_code(model, images[3].image)));
  EXPECT_THROW(archive.find(99), NotFoundError);

  const auto path = fs::temp_directory_path() / "jcif_archive_test.jcar";
  save_archive(path, archive);
  EXPECT_EQ(load_archive(path), archive);
  fs::remove(path);
}

TEST(ArchiveTest, HeaderLayout) {
  Archive a;
  a.code_bits = 8;
  ByteWriter w;
  append_archive(w, a);
  const std::vector<std::uint8_t> expected{'J', 'C', 'A', 'R', 1, 8, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  EXPECT_EQ(w.bytes(), expected);
}

TEST(ArchiveTest, CorruptionIsRejected) {
  const auto model = small_model();
  const auto archive = compress_images(model, sources(scenes(0, 2)));
  ByteWriter w;
  append_archive(w, archive);
  auto bytes = w.take();

  auto bad = bytes;
  bad[0] = 'X';
  ByteReader r1(bad);
  EXPECT_THROW(read_archive(r1), FormatError);

  bad = bytes;
  bad[4] = 9;
  ByteReader r2(bad);
  EXPECT_THROW(read_archive(r2), FormatError);

  for (std::size_t cut = 0; cut < bytes.size(); cut += 7) {
    std::vector<std::uint8_t> truncated(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    ByteReader r(truncated);
    EXPECT_THROW(read_archive(r), FormatError) << cut;
  }
}

TEST(ArchiveTest, DuplicateIdsAreRejected) {
  const auto model = small_model();
  auto src = sources(scenes(0, 2));
  src[1].id = src[0].id;
  EXPECT_THROW(compress_images(model, src), ConfigError);
}

TEST(EvaluateTest, JointPathNeverDecodesStandardDecodesEverything) {
  const auto model = small_model();
  const auto gallery = scenes(0, 12);
  const auto queries = scenes(100, 5);
  const auto archive = compress_images(model, sources(gallery));
  GalleryLabels labels;
  for (const auto& g : gallery) labels.emplace(g.id, g.labels);

  const auto joint = evaluate_joint(model, archive, labels, queries);
  const auto standard = evaluate_standard(model, archive, labels, queries);
  EXPECT_EQ(joint.decode_operations, 0u);
  EXPECT_EQ(standard.decode_operations, gallery.size());
  for (const auto* r : {&joint, &standard}) {
    EXPECT_EQ(r->queries.size(), queries.size());
    EXPECT_GE(r->precision, 0.0);
    EXPECT_LE(r->precision, 1.0);
    EXPECT_GE(r->recall, 0.0);
    EXPECT_LE(r->recall, 1.0);
    EXPECT_GE(r->map, 0.0);
    EXPECT_LE(r->map, 1.0);
    EXPECT_GT(r->total_seconds, 0.0);
    EXPECT_EQ(r->evaluated + r->excluded, queries.size());
  }
  const std::vector<MetricsReport> both{joint, standard};
  const auto csv = metrics_csv(both);
  EXPECT_NE(csv.find("joint,100,"), std::string::npos);
  EXPECT_NE(csv.find("standard,100,"), std::string::npos);
  EXPECT_EQ(csv.find("seconds"), std::string::npos);
  EXPECT_NE(timing_csv(both).find("standard,total,"), std::string::npos);
}

TEST(EvaluateTest, JointMetricsMatchDirectComputation) {
  const auto model = small_model();
  const auto gallery = scenes(0, 20);
  const auto queries = scenes(200, 4);
  const auto archive = compress_images(model, sources(gallery));
  GalleryLabels labels;
  for (const auto& g : gallery) labels.emplace(g.id, g.labels);
  EvaluationOptions options;
  options.k = 5;
  const auto report = evaluate_joint(model, archive, labels, queries, options);

  retrieval::RelevanceRule rule;
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const auto qcode = image_code(model, queries[qi].image);
    std::vector<std::pair<unsigned, retrieval::ImageId>> order;
    for (const auto& e : archive.entries) {
      order.emplace_back(retrieval::hamming(retrieval::pack_code(qcode), e.code), e.id);
    }
    std::sort(order.begin(), order.end());
    std::vector<std::uint8_t> rel;
    std::size_t total = 0;
    for (const auto& [d, id] : order) rel.push_back(rule.relevant(queries[qi].labels, labels.at(id)) ? 1 : 0);
    for (auto v : rel) total += v;
    const auto pr = retrieval::precision_recall_at_k(rel, total, 5);
    EXPECT_DOUBLE_EQ(report.queries[qi].precision, pr.precision);
    EXPECT_DOUBLE_EQ(report.queries[qi].recall, pr.recall);
    EXPECT_EQ(report.queries[qi].average_precision, retrieval::average_precision(rel));
  }
}

TEST(EvaluateTest, UnknownGalleryLabelIsReported) {
  const auto model = small_model();
  const auto gallery = scenes(0, 3);
  const auto archive = compress_images(model, sources(gallery));
  GalleryLabels labels{{0, gallery[0].labels}};
  EXPECT_THROW(evaluate_joint(model, archive, labels, scenes(10, 1)), NotFoundError);
}

std::vector<codec::RasterImage> rasters(std::size_t n) {
  std::vector<codec::RasterImage> out;
  for (auto& s : scenes(0, n)) out.push_back(s.image);
  return out;
}

TEST(RateDistortionTest, UniformQuantizerMatchesDirectOracle) {
  const auto images = rasters(3);
  const int levels = 5;
  std::map<int, double> counts;
  double se = 0.0, n = 0.0;
  for (const auto& im : images) {
    for (double v : im.data()) {
      int bin = static_cast<int>(v * levels);
      bin = std::clamp(bin, 0, levels - 1);
      counts[bin] += 1.0;
      const double rec = (bin + 0.5) / levels;
      se += (v - rec) * (v - rec);
      n += 1.0;
    }
  }
  double entropy = 0.0;
  for (const auto& [s, c] : counts) entropy -= c / n * std::log2(c / n);
  const auto p = measure_uniform(images, levels);
  EXPECT_NEAR(p.bpp, entropy * 3.0, 1e-9);
  EXPECT_NEAR(p.psnr, 10.0 * std::log10(n / se), 1e-9);
}

TEST(RateDistortionTest, SingleLevelIsConstantGrey) {
  const auto images = rasters(2);
  const auto p = measure_uniform(images, 1);
  EXPECT_EQ(p.bpp, 0.0);
  double se = 0.0, n = 0.0;
  for (const auto& im : images) {
    for (double v : im.data()) {
      se += (v - 0.5) * (v - 0.5);
      n += 1.0;
    }
  }
  EXPECT_NEAR(p.psnr, 10.0 * std::log10(n / se), 1e-9);
}

TEST(RateDistortionTest, UniformCurveIsSortedAndInterpolates) {
  const auto images = rasters(2);
  const auto curve = uniform_curve(images, 16);
  ASSERT_EQ(curve.size(), 16u);
  for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_LE(curve[i - 1].bpp, curve[i].bpp);
  const double mid = 0.5 * (curve[3].bpp + curve[4].bpp);
  const double got = uniform_psnr_at(curve, mid);
  EXPECT_GE(got, std::min(curve[3].psnr, curve[4].psnr) - 1e-12);
  EXPECT_LE(got, std::max(curve[3].psnr, curve[4].psnr) + 1e-12);
  EXPECT_DOUBLE_EQ(uniform_psnr_at(curve, curve[5].bpp), curve[5].psnr);
  EXPECT_THROW(uniform_psnr_at(curve, curve.back().bpp + 1.0), ConfigError);
}

TEST(RateDistortionTest, CodecMeasurementUsesCodedBits) {
  const auto model = small_model();
  const auto images = rasters(3);
  const auto p = measure_codec(model.params, model.codec, images);
  double bits = 0.0;
  for (const auto& im : images) bits += static_cast<double>(codec::compress(model.params, model.codec, im).payload_bits());
  EXPECT_DOUBLE_EQ(p.bpp, bits / (3 * 16 * 16));
  EXPECT_TRUE(std::isfinite(p.psnr));
  EXPECT_EQ(p.lambda, model.codec.lambda);
}

TEST(RateDistortionTest, CsvIsSortedByBpp) {
  const std::vector<RdPoint> points{{1.0, 2.0, 30.0}, {0.1, 0.5, 20.0}, {0.3, 1.0, 25.0}};
  const auto csv = rd_csv(points, {});
  EXPECT_LT(csv.find("0.1,0.5"), csv.find("0.3,1,"));
  EXPECT_LT(csv.find("0.3,1,"), csv.find("1,2,"));
}

}  // namespace
}  // namespace jcif::pipeline
