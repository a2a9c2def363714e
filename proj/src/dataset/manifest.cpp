// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/dataset/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "jcif/common/error.hpp"
#include "jcif/common/random.hpp"
#include "jcif/dataset/tensor_file.hpp"

namespace jcif::dataset {

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw FormatError("unknown split name \"" + std::string(name) + "\"");
}

void SplitRatios::validate() const {
  if (train < 0 || val < 0 || test < 0 || std::abs(train + val + test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be non-negative and sum to 1");
  }
}

std::vector<const ManifestEntry*> DatasetManifest::in_split(Split split) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries) {
    if (e.split == split) out.push_back(&e);
  }
  return out;
}

const ManifestEntry& DatasetManifest::find(std::uint64_t id) const {
  for (const auto& e : entries) {
    if (e.id == id) return e;
  }
  throw NotFoundError("image id " + std::to_string(id) + " not in manifest");
}

std::vector<Split> assign_splits(std::size_t n, const SplitRatios& ratios, std::uint64_t seed) {
  ratios.validate();
  std::vector<std::uint64_t> order(n);
  std::iota(order.begin(), order.end(), std::uint64_t{0});
  const std::uint64_t salt = Rng::mix(seed ^ 0x5b1d5b1dULL);
  std::sort(order.begin(), order.end(), [salt](std::uint64_t a, std::uint64_t b) {
    const auto ka = Rng::mix(a ^ salt), kb = Rng::mix(b ^ salt);
    return ka != kb ? ka < kb : a < b;
  });
  const auto n_train = static_cast<std::size_t>(std::llround(ratios.train * static_cast<double>(n)));
  const auto n_val = std::min(n - std::min(n, n_train),
                              static_cast<std::size_t>(std::llround(ratios.val * static_cast<double>(n))));
  std::vector<Split> splits(n, Split::kTest);
  for (std::size_t r = 0; r < n; ++r) {
    if (r < n_train) {
      splits[order[r]] = Split::kTrain;
    } else if (r < n_train + n_val) {
      splits[order[r]] = Split::kVal;
    }
  }
  return splits;
}

DatasetManifest build_dataset(const SyntheticSceneConfig& config, std::size_t n,
                              const SplitRatios& ratios, const std::filesystem::path& out_dir) {
  config.validate();
  const auto splits = assign_splits(n, ratios, config.seed);
  DatasetManifest manifest;
  manifest.root = out_dir;
  manifest.classes = config.classes;
  for (std::size_t i = 0; i < n; ++i) {
    Scene scene = generate_scene(config, static_cast<std::uint64_t>(i));
    ManifestEntry entry;
    entry.id = i;
    entry.path = "images/" + std::to_string(i) + ".jctf";
    entry.split = splits[i];
    entry.labels = std::move(scene.labels);
    write_tensor(out_dir / entry.path, NamedTensor{"image/" + std::to_string(i), scene.image.pixels()});
    manifest.entries.push_back(std::move(entry));
  }
  write_manifest(out_dir / "manifest.csv", manifest);
  return manifest;
}

std::string manifest_text(const DatasetManifest& manifest) {
  std::ostringstream os;
  os << "id,path,split,labels\n";
  for (const auto& e : manifest.entries) {
    os << e.id << ',' << e.path << ',' << split_name(e.split) << ',';
    for (auto b : e.labels) os << (b ? '1' : '0');
    os << '\n';
  }
  return os.str();
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  write_text_file(path, manifest_text(manifest));
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  DatasetManifest manifest;
  manifest.root = path.parent_path();
  std::string line;
  std::size_t line_no = 0;
  std::unordered_set<std::uint64_t> seen;
  auto fail = [&](const std::string& why) {
    throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("id,", 0) == 0) continue;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 4) fail("expected 4 fields");
    ManifestEntry e;
    const auto& idf = fields[0];
    if (std::from_chars(idf.data(), idf.data() + idf.size(), e.id).ec != std::errc{}) fail("bad id");
    e.path = fields[1];
    e.split = parse_split(fields[2]);
    for (char ch : fields[3]) {
      if (ch != '0' && ch != '1') fail("label bits must be 0/1");
      e.labels.push_back(ch == '1' ? 1 : 0);
    }
    if (manifest.entries.empty()) {
      manifest.classes = e.labels.size();
    } else if (e.labels.size() != manifest.classes) {
      fail("inconsistent label count");
    }
    if (!seen.insert(e.id).second) fail("duplicate id " + std::to_string(e.id));
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

codec::RasterImage load_image(const DatasetManifest& manifest, const ManifestEntry& entry) {
  return codec::RasterImage(read_tensor(manifest.root / entry.path).tensor);
}

}  // namespace jcif::dataset
