// data/feature_io.cc

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

#include "data/feature_io.h"

#include <bit>
#include <cstring>
#include <fstream>

#include "base/error.h"
#include "base/io_util.h"

static_assert(std::endian::native == std::endian::little,
              "feature serialization assumes a little-endian host");

namespace cpcx {

void write_feature_file(const std::string& path, const FrameSequence& features) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("features: cannot open " + path + " for writing");
  os.write("CPCF", 4);
  put_u32(os, static_cast<uint32_t>(features.t));
  put_u32(os, static_cast<uint32_t>(features.c));
  os.write(reinterpret_cast<const char*>(features.data.data()),
           static_cast<std::streamsize>(features.data.size() * sizeof(float)));
  if (!os) throw DataError("features: short write to " + path);
}

FrameSequence read_feature_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("features: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "CPCF") {
    throw DataError("features: " + path + " has wrong magic bytes");
  }
  FrameSequence fs;
  fs.t = get_u32(is);
  fs.c = get_u32(is);
  fs.data.resize(static_cast<size_t>(fs.t * fs.c));
  is.read(reinterpret_cast<char*>(fs.data.data()),
          static_cast<std::streamsize>(fs.data.size() * sizeof(float)));
  if (!is) throw DataError("features: " + path + " is truncated");
  return fs;
}

}  // namespace cpcx
