// data/wav.h

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

#ifndef CPCX_DATA_WAV_H_
#define CPCX_DATA_WAV_H_

#include <string>
#include <vector>

namespace cpcx {

// PCM16 mono 16 kHz only. Anything else is rejected with a description of
// what was found; there is no silent resampling, which would corrupt the
// 160-samples-per-frame contract.
std::vector<float> read_wav(const std::string& path);

// Inverse of read_wav: samples scaled by 32768, clamped to int16 range.
// write_wav(read_wav(f)) reproduces f's payload bit-exactly.
void write_wav(const std::string& path, const std::vector<float>& samples);

}  // namespace cpcx

#endif  // CPCX_DATA_WAV_H_
