// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "jcif/numerics/parameters.hpp"

namespace jcif::codec {

// A checkpoint is a tensor file: "meta.*" records describe configuration,
// every other record is a parameter.
struct Checkpoint {
  numerics::ParameterSet params;
  std::map<std::string, numerics::Tensor> meta;

  // Throws FormatError naming the missing record.
  const numerics::Tensor& require_meta(const std::string& name) const;
};

inline constexpr std::string_view kMetaPrefix = "meta.";

void save_checkpoint(const std::filesystem::path& path, const numerics::ParameterSet& params,
                     const std::map<std::string, numerics::Tensor>& meta);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace jcif::codec
