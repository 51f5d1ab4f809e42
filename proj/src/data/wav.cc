// data/wav.cc

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

#include "data/wav.h"

#include <cmath>
#include <cstdint>
#include <fstream>

#include "base/error.h"
#include "base/io_util.h"
#include "model/frame_sequence.h"

namespace cpcx {

namespace {

std::string read_tag(std::istream& is) {
  char tag[4];
  is.read(tag, 4);
  if (!is) throw DataError("wav: truncated header");
  return std::string(tag, 4);
}

}  // namespace

std::vector<float> read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("wav: cannot open " + path);
  if (read_tag(is) != "RIFF") throw DataError("wav: " + path + " is not a RIFF file");
  get_u32(is);  // total size, unused
  if (read_tag(is) != "WAVE") throw DataError("wav: " + path + " is not a WAVE file");

  bool have_fmt = false;
  std::vector<float> samples;
  while (is.peek() != EOF) {
    const std::string tag = read_tag(is);
    const uint32_t size = get_u32(is);
    if (tag == "fmt ") {
      if (size < 16) throw DataError("wav: malformed fmt chunk in " + path);
      std::vector<uint8_t> fmt(size);
      is.read(reinterpret_cast<char*>(fmt.data()), size);
      if (!is) throw DataError("wav: truncated fmt chunk in " + path);
      const uint16_t codec = static_cast<uint16_t>(fmt[0] | (fmt[1] << 8));
      const uint16_t channels = static_cast<uint16_t>(fmt[2] | (fmt[3] << 8));
      const uint32_t rate = static_cast<uint32_t>(fmt[4]) | (static_cast<uint32_t>(fmt[5]) << 8) |
                            (static_cast<uint32_t>(fmt[6]) << 16) |
                            (static_cast<uint32_t>(fmt[7]) << 24);
      const uint16_t bits = static_cast<uint16_t>(fmt[14] | (fmt[15] << 8));
      if (codec != 1) {
        throw DataError("wav: " + path + " uses codec " + std::to_string(codec) +
                        ", only PCM (1) is supported");
      }
      if (channels != 1) {
        throw DataError("wav: " + path + " has " + std::to_string(channels) +
                        " channels, only mono is supported");
      }
      if (rate != kSampleRate) {
        throw DataError("wav: " + path + " is sampled at " + std::to_string(rate) +
                        " Hz, only 16000 Hz is supported (no silent resampling)");
      }
      if (bits != 16) {
        throw DataError("wav: " + path + " has " + std::to_string(bits) +
                        "-bit samples, only 16-bit is supported");
      }
      have_fmt = true;
    } else if (tag == "data") {
      if (!have_fmt) throw DataError("wav: data chunk before fmt chunk in " + path);
      if (size % 2 != 0) throw DataError("wav: odd data chunk size in " + path);
      const size_t n = size / 2;
      std::vector<uint8_t> raw(size);
      is.read(reinterpret_cast<char*>(raw.data()), size);
      if (!is) throw DataError("wav: truncated data chunk in " + path);
      samples.resize(n);
      for (size_t i = 0; i < n; ++i) {
        const int16_t s = static_cast<int16_t>(raw[2 * i] | (raw[2 * i + 1] << 8));
        samples[i] = static_cast<float>(s) / 32768.0f;
      }
      return samples;
    } else {
      // Skip unknown chunks (LIST, fact, ...).
      is.seekg(size + (size % 2), std::ios::cur);
      if (!is) throw DataError("wav: truncated chunk '" + tag + "' in " + path);
    }
  }
  throw DataError("wav: no data chunk found in " + path);
}

void write_wav(const std::string& path, const std::vector<float>& samples) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("wav: cannot open " + path + " for writing");
  const uint32_t data_bytes = static_cast<uint32_t>(samples.size() * 2);
  os.write("RIFF", 4);
  put_u32(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  put_u32(os, 16);
  const uint16_t codec = 1, channels = 1, bits = 16;
  const uint32_t rate = kSampleRate;
  os.put(static_cast<char>(codec & 0xff));
  os.put(static_cast<char>(codec >> 8));
  os.put(static_cast<char>(channels & 0xff));
  os.put(static_cast<char>(channels >> 8));
  put_u32(os, rate);
  put_u32(os, rate * 2);  // byte rate
  os.put(2);              // block align
  os.put(0);
  os.put(static_cast<char>(bits & 0xff));
  os.put(static_cast<char>(bits >> 8));
  os.write("data", 4);
  put_u32(os, data_bytes);
  for (float v : samples) {
    double scaled = std::lrint(static_cast<double>(v) * 32768.0);
    if (scaled > 32767) scaled = 32767;
    if (scaled < -32768) scaled = -32768;
    const int16_t s = static_cast<int16_t>(scaled);
    os.put(static_cast<char>(s & 0xff));
    os.put(static_cast<char>((s >> 8) & 0xff));
  }
  if (!os) throw DataError("wav: short write to " + path);
}

}  // namespace cpcx
