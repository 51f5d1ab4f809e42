// data/checkpoint.cc

// Copyright 2026  cpcx authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "data/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "base/error.h"
#include "base/io_util.h"

// The on-disk format is little-endian; bulk payload copies below rely on a
// little-endian host.
static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

namespace cpcx {

namespace {

size_t dtype_size(NamedArray::DType t) {
  switch (t) {
    case NamedArray::DType::kF32: return 4;
    case NamedArray::DType::kF64: return 8;
    case NamedArray::DType::kI64: return 8;
    case NamedArray::DType::kU64: return 8;
  }
  return 0;
}

}  // namespace

NamedArray NamedArray::from_f32(const std::string& name, Shape shape,
                                const std::vector<float>& values) {
  NamedArray a;
  a.name = name;
  a.dtype = DType::kF32;
  a.shape = std::move(shape);
  if (numel(a.shape) != static_cast<int64_t>(values.size())) {
    throw ShapeError("checkpoint array " + name + ": size does not match shape");
  }
  a.bytes.resize(values.size() * 4);
  std::memcpy(a.bytes.data(), values.data(), a.bytes.size());
  return a;
}

NamedArray NamedArray::from_i64(const std::string& name, const std::vector<int64_t>& values) {
  NamedArray a;
  a.name = name;
  a.dtype = DType::kI64;
  a.shape = {static_cast<int64_t>(values.size())};
  a.bytes.resize(values.size() * 8);
  std::memcpy(a.bytes.data(), values.data(), a.bytes.size());
  return a;
}

NamedArray NamedArray::from_u64(const std::string& name, const std::vector<uint64_t>& values) {
  NamedArray a;
  a.name = name;
  a.dtype = DType::kU64;
  a.shape = {static_cast<int64_t>(values.size())};
  a.bytes.resize(values.size() * 8);
  std::memcpy(a.bytes.data(), values.data(), a.bytes.size());
  return a;
}

std::vector<float> NamedArray::as_f32() const {
  if (dtype != DType::kF32) throw DataError("checkpoint array " + name + " is not f32");
  std::vector<float> v(bytes.size() / 4);
  std::memcpy(v.data(), bytes.data(), bytes.size());
  return v;
}

std::vector<int64_t> NamedArray::as_i64() const {
  if (dtype != DType::kI64) throw DataError("checkpoint array " + name + " is not i64");
  std::vector<int64_t> v(bytes.size() / 8);
  std::memcpy(v.data(), bytes.data(), bytes.size());
  return v;
}

std::vector<uint64_t> NamedArray::as_u64() const {
  if (dtype != DType::kU64) throw DataError("checkpoint array " + name + " is not u64");
  std::vector<uint64_t> v(bytes.size() / 8);
  std::memcpy(v.data(), bytes.data(), bytes.size());
  return v;
}

const NamedArray* Checkpoint::find(const std::string& name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

const NamedArray& Checkpoint::require(const std::string& name) const {
  const NamedArray* a = find(name);
  if (!a) throw DataError("checkpoint: missing array '" + name + "'");
  return *a;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ostringstream body;
  put_u32(body, static_cast<uint32_t>(ckpt.config_text.size()));
  body.write(ckpt.config_text.data(), static_cast<std::streamsize>(ckpt.config_text.size()));
  put_u32(body, crc32(ckpt.config_text));
  put_u32(body, static_cast<uint32_t>(ckpt.arrays.size()));
  for (const auto& a : ckpt.arrays) {
    if (a.bytes.size() != static_cast<size_t>(a.count()) * dtype_size(a.dtype)) {
      throw DataError("checkpoint: array " + a.name + " has inconsistent byte count");
    }
    put_u32(body, static_cast<uint32_t>(a.name.size()));
    body.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
    body.put(static_cast<char>(a.dtype));
    put_u32(body, static_cast<uint32_t>(a.shape.size()));
    for (int64_t d : a.shape) put_u64(body, static_cast<uint64_t>(d));
    body.write(reinterpret_cast<const char*>(a.bytes.data()),
               static_cast<std::streamsize>(a.bytes.size()));
  }
  const std::string payload = body.str();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("checkpoint: cannot open " + path + " for writing");
  os.write("CPCX", 4);
  put_u32(os, ckpt.version);
  os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  put_u32(os, crc32(payload));
  if (!os) throw DataError("checkpoint: short write to " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("checkpoint: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "CPCX") {
    throw DataError("checkpoint: " + path + " has wrong magic bytes (not a CPCX file)");
  }
  Checkpoint ckpt;
  ckpt.version = get_u32(is);
  if (ckpt.version != kCheckpointVersion) {
    throw DataError("checkpoint: " + path + " has unknown format version " +
                    std::to_string(ckpt.version));
  }
  // Read the remainder, split off the trailing checksum, verify.
  std::string payload((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (payload.size() < 4) throw DataError("checkpoint: " + path + " is truncated");
  uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) {
    stored |= static_cast<uint32_t>(static_cast<uint8_t>(payload[payload.size() - 4 + i]))
              << (8 * i);
  }
  payload.resize(payload.size() - 4);
  if (crc32(payload) != stored) {
    throw DataError("checkpoint: " + path + " failed its checksum (corrupted file)");
  }

  std::istringstream body(payload);
  const uint32_t config_len = get_u32(body);
  ckpt.config_text.resize(config_len);
  body.read(ckpt.config_text.data(), config_len);
  if (!body) throw DataError("checkpoint: " + path + " is truncated in the config block");
  const uint32_t config_crc = get_u32(body);
  if (crc32(ckpt.config_text) != config_crc) {
    throw DataError("checkpoint: " + path + " config hash mismatch");
  }
  const uint32_t n_arrays = get_u32(body);
  for (uint32_t i = 0; i < n_arrays; ++i) {
    NamedArray a;
    const uint32_t name_len = get_u32(body);
    a.name.resize(name_len);
    body.read(a.name.data(), name_len);
    int dtype_byte = body.get();
    if (dtype_byte < 0 || dtype_byte > 3) {
      throw DataError("checkpoint: " + path + " has array with unknown dtype tag");
    }
    a.dtype = static_cast<NamedArray::DType>(dtype_byte);
    const uint32_t rank = get_u32(body);
    for (uint32_t r = 0; r < rank; ++r) a.shape.push_back(static_cast<int64_t>(get_u64(body)));
    const size_t nbytes = static_cast<size_t>(a.count()) * dtype_size(a.dtype);
    a.bytes.resize(nbytes);
    body.read(reinterpret_cast<char*>(a.bytes.data()), static_cast<std::streamsize>(nbytes));
    if (!body) throw DataError("checkpoint: " + path + " is truncated in array " + a.name);
    ckpt.arrays.push_back(std::move(a));
  }
  return ckpt;
}

}  // namespace cpcx
