// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "jcif/codec/raster.hpp"
#include "jcif/common/labels.hpp"
#include "jcif/dataset/scene.hpp"

namespace jcif::dataset {

enum class Split : std::uint8_t { kTrain, kVal, kTest };

std::string_view split_name(Split split);
Split parse_split(std::string_view name);

struct SplitRatios {
  double train = 0.52;
  double val = 0.24;
  double test = 0.24;

  void validate() const;
};

struct ManifestEntry {
  std::uint64_t id = 0;
  std::string path;  // relative to the manifest's directory
  Split split = Split::kTrain;
  LabelVector labels;
};

// Line-delimited "id,path,splitname,labelbits" records under a header row.
struct DatasetManifest {
  std::filesystem::path root;  // directory that entry paths are relative to
  std::size_t classes = 0;
  std::vector<ManifestEntry> entries;

  std::vector<const ManifestEntry*> in_split(Split split) const;
  const ManifestEntry& find(std::uint64_t id) const;
};

// Split per id: ids are ranked by a hash of (id, seed) and the first
// round(train * n) go to train, the next round(val * n) to val, the rest to test.
std::vector<Split> assign_splits(std::size_t n, const SplitRatios& ratios, std::uint64_t seed);

// Generates n scenes into out_dir/images and writes out_dir/manifest.csv.
DatasetManifest build_dataset(const SyntheticSceneConfig& config, std::size_t n,
                              const SplitRatios& ratios, const std::filesystem::path& out_dir);

std::string manifest_text(const DatasetManifest& manifest);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

codec::RasterImage load_image(const DatasetManifest& manifest, const ManifestEntry& entry);

}  // namespace jcif::dataset
