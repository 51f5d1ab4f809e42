// data/feature_io.h

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

#ifndef CPCX_DATA_FEATURE_IO_H_
#define CPCX_DATA_FEATURE_IO_H_

#include <string>

#include "model/frame_sequence.h"

namespace cpcx {

// Per-utterance binary feature matrix: magic "CPCF", u32 rows, u32 cols,
// row-major f32 little-endian payload.
void write_feature_file(const std::string& path, const FrameSequence& features);
FrameSequence read_feature_file(const std::string& path);

}  // namespace cpcx

#endif  // CPCX_DATA_FEATURE_IO_H_
