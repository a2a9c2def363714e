// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/dataset/tensor_file.hpp"

#include <limits>

#include "jcif/common/error.hpp"

namespace jcif::dataset {

void append_tensor_record(ByteWriter& out, const NamedTensor& record) {
  const auto& shape = record.tensor.shape();
  if (shape.size() > std::numeric_limits<std::uint8_t>::max()) {
    throw FormatError("tensor rank too large for tensor file: " + record.name);
  }
  out.text("JCTF");
  out.u8(kTensorFileVersion);
  out.u32(static_cast<std::uint32_t>(record.name.size()));
  out.text(record.name);
  out.u8(static_cast<std::uint8_t>(shape.size()));
  for (auto e : shape) {
    if (e > std::numeric_limits<std::uint32_t>::max()) throw FormatError("extent too large: " + record.name);
    out.u32(static_cast<std::uint32_t>(e));
  }
  for (double v : record.tensor.values()) out.f64(v);
}

NamedTensor read_tensor_record(ByteReader& in) {
  in.expect_magic("JCTF", "tensor file");
  const auto version = in.u8();
  if (version != kTensorFileVersion) {
    throw FormatError("tensor file: unsupported version " + std::to_string(version));
  }
  NamedTensor rec;
  const auto name_len = in.u32();
  rec.name = in.text(name_len);
  const auto rank = in.u8();
  numerics::Shape shape(rank);
  std::size_t count = 1;
  for (auto& e : shape) {
    e = in.u32();
    if (e == 0) throw FormatError("tensor file: zero extent in " + rec.name);
    count *= e;
  }
  if (in.remaining() / 8 < count) throw FormatError("tensor file: truncated payload for " + rec.name);
  std::vector<double> data(count);
  for (auto& v : data) v = in.f64();
  rec.tensor = numerics::Tensor(std::move(shape), std::move(data));
  return rec;
}

void write_tensor(const std::filesystem::path& path, const NamedTensor& record) {
  ByteWriter out;
  append_tensor_record(out, record);
  write_file(path, out.bytes());
}

NamedTensor read_tensor(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  ByteReader in(bytes);
  try {
    return read_tensor_record(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_tensors(const std::filesystem::path& path, const std::vector<NamedTensor>& records) {
  ByteWriter out;
  for (const auto& r : records) append_tensor_record(out, r);
  write_file(path, out.bytes());
}

std::vector<NamedTensor> read_tensors(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  ByteReader in(bytes);
  std::vector<NamedTensor> out;
  try {
    while (!in.done()) out.push_back(read_tensor_record(in));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace jcif::dataset
