// data/checkpoint.h

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

#ifndef CPCX_DATA_CHECKPOINT_H_
#define CPCX_DATA_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "tensor/tensor.h"

namespace cpcx {

inline constexpr uint32_t kCheckpointVersion = 1;

// Self-describing container, layout:
//   magic "CPCX" | u32 version
//   u32 config length | config text | u32 crc32(config)
//   u32 array count
//   per array: u32 name length | name | u8 dtype | u32 rank | u64 dims
//              | little-endian payload
//   u32 crc32 of everything after the version field
// Saving the same checkpoint twice is byte-identical.
struct NamedArray {
  enum class DType : uint8_t { kF32 = 0, kF64 = 1, kI64 = 2, kU64 = 3 };

  std::string name;
  DType dtype = DType::kF32;
  Shape shape;
  std::vector<uint8_t> bytes;

  int64_t count() const { return numel(shape); }

  static NamedArray from_f32(const std::string& name, Shape shape,
                             const std::vector<float>& values);
  static NamedArray from_i64(const std::string& name, const std::vector<int64_t>& values);
  static NamedArray from_u64(const std::string& name, const std::vector<uint64_t>& values);
  std::vector<float> as_f32() const;
  std::vector<int64_t> as_i64() const;
  std::vector<uint64_t> as_u64() const;
};

struct Checkpoint {
  uint32_t version = kCheckpointVersion;
  std::string config_text;  // canonical key=value lines
  std::vector<NamedArray> arrays;

  const NamedArray* find(const std::string& name) const;
  const NamedArray& require(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace cpcx

#endif  // CPCX_DATA_CHECKPOINT_H_
