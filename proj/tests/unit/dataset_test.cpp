// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <filesystem>

#include "jcif/common/byte_io.hpp"
#include "jcif/common/error.hpp"
#include "jcif/dataset/manifest.hpp"
#include "jcif/dataset/tensor_file.hpp"

namespace jcif::dataset {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("jcif_dataset_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(TensorFileTest, ScalarRoundTrip) {
  const fs::path p = scratch_dir("scalar") / "s.jctf";
  write_tensor(p, {"s", numerics::Tensor::scalar(-3.25)});
  const auto back = read_tensor(p);
  EXPECT_EQ(back.name, "s");
  EXPECT_EQ(back.tensor.rank(), 0u);
  EXPECT_EQ(back.tensor.item(), -3.25);
}

TEST(TensorFileTest, PayloadSizeForRank3) {
  ByteWriter w;
  append_tensor_record(w, {"abc", numerics::Tensor({2, 3, 4})});
  // magic 4 + version 1 + name length 4 + name 3 + rank 1 + extents 12.
  EXPECT_EQ(w.bytes().size(), 25u + 192u);
}

TEST(TensorFileTest, RandomTensorsRoundTripBitExactly) {
  Rng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    numerics::Shape shape(rng.below(4));
    for (auto& e : shape) e = 1 + rng.below(5);
    numerics::Tensor t(shape);
    for (auto& v : t.values()) v = std::bit_cast<double>(rng.next_u64() & 0x7fefffffffffffffULL);
    ByteWriter w;
    append_tensor_record(w, {"t" + std::to_string(trial), t});
    ByteReader r(w.bytes());
    const auto back = read_tensor_record(r);
    ASSERT_TRUE(r.done());
    ASSERT_EQ(back.tensor.shape(), t.shape());
    for (std::size_t i = 0; i < t.size(); ++i) {
      ASSERT_EQ(std::bit_cast<std::uint64_t>(back.tensor[i]), std::bit_cast<std::uint64_t>(t[i]));
    }
  }
}

TEST(TensorFileTest, CorruptionIsAFormatError) {
  ByteWriter w;
  append_tensor_record(w, {"x", numerics::Tensor({3}, {1, 2, 3})});
  auto bytes = w.take();
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  ByteReader r1(bad_magic);
  EXPECT_THROW(read_tensor_record(r1), FormatError);
  bytes.resize(bytes.size() - 5);
  ByteReader r2(bytes);
  EXPECT_THROW(read_tensor_record(r2), FormatError);
}

TEST(SceneTest, SingleLabelScenesAreOneHot) {
  SyntheticSceneConfig config;
  config.min_labels = config.max_labels = 1;
  for (std::uint64_t id = 0; id < 50; ++id) {
    const auto scene = generate_scene(config, id);
    int ones = 0;
    for (auto b : scene.labels) ones += b;
    EXPECT_EQ(ones, 1);
  }
}

TEST(SceneTest, NoiselessScenesAreDeterministic) {
  SyntheticSceneConfig config;
  config.noise = 0.0;
  const auto a = generate_scene(config, 42);
  const auto b = generate_scene(config, 42);
  EXPECT_EQ(a.image.pixels(), b.image.pixels());
  EXPECT_EQ(a.labels, b.labels);
}

TEST(SceneTest, InvalidConfigRejected) {
  SyntheticSceneConfig config;
  config.max_labels = 9;
  EXPECT_THROW(config.validate(), ConfigError);
  config.max_labels = 2;
  config.min_labels = 0;
  EXPECT_THROW(config.validate(), ConfigError);
}

// Matched filter on chroma: pixels whose colour, with the grey component
// removed, lies near a class colour vote for that class.
TEST(SceneTest, LabelsAreRecoverableByMatchedFilter) {
  SyntheticSceneConfig config;
  std::size_t correct = 0, total = 0;
  for (std::uint64_t id = 0; id < 1000; ++id) {
    const auto scene = generate_scene(config, id);
    const auto& img = scene.image;
    for (std::size_t cls = 0; cls < config.classes; ++cls) {
      const auto look = class_appearance(cls);
      const double cm = (look.color[0] + look.color[1] + look.color[2]) / 3.0;
      std::size_t hits = 0;
      for (std::size_t y = 0; y < img.height(); ++y) {
        for (std::size_t x = 0; x < img.width(); ++x) {
          const double pm = (img.at(y, x, 0) + img.at(y, x, 1) + img.at(y, x, 2)) / 3.0;
          double d2 = 0.0;
          for (std::size_t c = 0; c < 3; ++c) {
            const double d = (img.at(y, x, c) - pm) - (look.color[c] - cm);
            d2 += d * d;
          }
          if (d2 < 0.1 * 0.1) ++hits;
        }
      }
      const bool predicted = hits > img.height() * img.width() / 10;
      correct += predicted == (scene.labels[cls] == 1);
      ++total;
    }
  }
  EXPECT_GT(static_cast<double>(correct) / static_cast<double>(total), 0.9);
}

TEST(SceneTest, EveryClassAppearsOften) {
  SyntheticSceneConfig config;
  std::vector<int> counts(config.classes, 0);
  const int n = 2000;
  for (int id = 0; id < n; ++id) {
    const auto scene = generate_scene(config, static_cast<std::uint64_t>(id));
    for (std::size_t c = 0; c < config.classes; ++c) counts[c] += scene.labels[c];
  }
  for (int c : counts) EXPECT_GE(c, n / 20);
}

TEST(DatasetTest, PaperSplitProportions) {
  const auto dir = scratch_dir("splits");
  SyntheticSceneConfig config;
  const auto manifest = build_dataset(config, 100, {}, dir);
  EXPECT_EQ(manifest.in_split(Split::kTrain).size(), 52u);
  EXPECT_EQ(manifest.in_split(Split::kVal).size(), 24u);
  EXPECT_EQ(manifest.in_split(Split::kTest).size(), 24u);
  const auto reread = read_manifest(dir / "manifest.csv");
  EXPECT_EQ(reread.entries.size(), 100u);
  for (const auto& e : reread.entries) {
    ASSERT_TRUE(fs::exists(dir / e.path));
    const auto img = load_image(reread, e);
    EXPECT_EQ(img.height(), config.height);
    EXPECT_EQ(img.width(), config.width);
    EXPECT_EQ(img.channels(), config.channels);
  }
}

TEST(DatasetTest, SplitCountsWithinOneImage) {
  for (std::size_t n : {1u, 7u, 33u, 250u, 2000u}) {
    const auto splits = assign_splits(n, {}, 3);
    std::size_t train = 0, val = 0;
    for (auto s : splits) {
      train += s == Split::kTrain;
      val += s == Split::kVal;
    }
    EXPECT_LE(std::abs(static_cast<double>(train) - 0.52 * static_cast<double>(n)), 1.0);
    EXPECT_LE(std::abs(static_cast<double>(val) - 0.24 * static_cast<double>(n)), 1.0);
    EXPECT_EQ(splits, assign_splits(n, {}, 3));
  }
  EXPECT_THROW(assign_splits(10, {0.5, 0.5, 0.5}, 1), ConfigError);
}

TEST(DatasetTest, EmptyDataset) {
  const auto dir = scratch_dir("empty");
  const auto manifest = build_dataset({}, 0, {}, dir);
  EXPECT_TRUE(manifest.entries.empty());
  EXPECT_FALSE(fs::exists(dir / "images"));
  EXPECT_TRUE(read_manifest(dir / "manifest.csv").entries.empty());
}

TEST(DatasetTest, RebuildGivesIdenticalManifestHash) {
  const auto a = scratch_dir("rebuild_a"), b = scratch_dir("rebuild_b");
  build_dataset({}, 30, {}, a);
  build_dataset({}, 30, {}, b);
  EXPECT_EQ(fnv1a64(read_file(a / "manifest.csv")), fnv1a64(read_file(b / "manifest.csv")));
  EXPECT_EQ(read_file(a / "images/7.jctf"), read_file(b / "images/7.jctf"));
}

TEST(DatasetTest, ManifestErrors) {
  const auto dir = scratch_dir("bad_manifest");
  write_text_file(dir / "m.csv", "id,path,split,labels\n0,a,train,01\n0,b,val,10\n");
  EXPECT_THROW(read_manifest(dir / "m.csv"), FormatError);
  write_text_file(dir / "m.csv", "id,path,split,labels\n0,a,holdout,01\n");
  EXPECT_THROW(read_manifest(dir / "m.csv"), FormatError);
  EXPECT_THROW(read_manifest(dir / "missing.csv"), IoError);
}

}  // namespace
}  // namespace jcif::dataset
