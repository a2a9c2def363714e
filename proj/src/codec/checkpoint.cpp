// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/codec/checkpoint.hpp"

#include "jcif/common/error.hpp"
#include "jcif/dataset/tensor_file.hpp"

namespace jcif::codec {

const numerics::Tensor& Checkpoint::require_meta(const std::string& name) const {
  auto it = meta.find(name);
  if (it == meta.end()) throw FormatError("checkpoint is missing record '" + name + "'");
  return it->second;
}

void save_checkpoint(const std::filesystem::path& path, const numerics::ParameterSet& params,
                     const std::map<std::string, numerics::Tensor>& meta) {
  std::vector<dataset::NamedTensor> records;
  for (const auto& [name, t] : meta) {
    if (!name.starts_with(kMetaPrefix)) throw ConfigError("checkpoint metadata '" + name + "' lacks the meta. prefix");
    records.push_back({name, t});
  }
  for (const auto& [name, t] : params.tensors()) records.push_back({name, t});
  dataset::write_tensors(path, records);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  Checkpoint ck;
  for (auto& r : dataset::read_tensors(path)) {
    if (r.name.starts_with(kMetaPrefix)) {
      if (!ck.meta.emplace(r.name, std::move(r.tensor)).second) {
        throw FormatError(path.string() + ": duplicate record '" + r.name + "'");
      }
    } else {
      try {
        ck.params.add(r.name, std::move(r.tensor));
      } catch (const ConfigError&) {
        throw FormatError(path.string() + ": duplicate record '" + r.name + "'");
      }
    }
  }
  return ck;
}

}  // namespace jcif::codec
