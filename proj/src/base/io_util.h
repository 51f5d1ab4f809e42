// base/io_util.h

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

#ifndef CPCX_BASE_IO_UTIL_H_
#define CPCX_BASE_IO_UTIL_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cpcx {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::vector<std::string> read_lines(const std::string& path);

std::vector<std::string> split(const std::string& s, char sep);
// Splits on runs of whitespace, dropping empty tokens.
std::vector<std::string> split_ws(const std::string& s);
std::string join(const std::vector<std::string>& parts, const std::string& sep);

// Little-endian binary primitives. The on-disk formats (checkpoints,
// feature files) are explicitly little-endian regardless of host order.
void put_u32(std::ostream& os, uint32_t v);
void put_u64(std::ostream& os, uint64_t v);
uint32_t get_u32(std::istream& is);
uint64_t get_u64(std::istream& is);

// CRC-32 (IEEE 802.3 polynomial), used as the checkpoint trailer checksum.
uint32_t crc32(const uint8_t* data, size_t n, uint32_t seed = 0);
uint32_t crc32(const std::string& data);

std::string dirname(const std::string& path);
std::string basename_no_ext(const std::string& path);
std::string path_join(const std::string& a, const std::string& b);

}  // namespace cpcx

#endif  // CPCX_BASE_IO_UTIL_H_
