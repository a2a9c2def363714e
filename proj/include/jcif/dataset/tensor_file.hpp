// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "jcif/common/byte_io.hpp"
#include "jcif/numerics/tensor.hpp"

namespace jcif::dataset {

// One record of the tensor file format:
//   "JCTF" | u8 version | u32 name length | name | u8 rank | u32 extents[rank]
//   | little-endian f64 payload, row-major.
// A file is a sequence of records; checkpoints store one record per parameter.
struct NamedTensor {
  std::string name;
  numerics::Tensor tensor;
};

inline constexpr std::uint8_t kTensorFileVersion = 1;

void append_tensor_record(ByteWriter& out, const NamedTensor& record);
NamedTensor read_tensor_record(ByteReader& in);

void write_tensor(const std::filesystem::path& path, const NamedTensor& record);
NamedTensor read_tensor(const std::filesystem::path& path);

void write_tensors(const std::filesystem::path& path, const std::vector<NamedTensor>& records);
std::vector<NamedTensor> read_tensors(const std::filesystem::path& path);

}  // namespace jcif::dataset
