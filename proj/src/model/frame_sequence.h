// model/frame_sequence.h

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

#ifndef CPCX_MODEL_FRAME_SEQUENCE_H_
#define CPCX_MODEL_FRAME_SEQUENCE_H_

#include <cstdint>
#include <vector>

#include "tensor/tensor.h"

namespace cpcx {

// 160 input samples per frame: 10 ms at 16 kHz.
inline constexpr int64_t kSamplesPerFrame = 160;
inline constexpr int64_t kSampleRate = 16000;

// A [T x C] block of per-frame feature vectors at 10 ms resolution. The
// common currency between encoder, context model, probe and ABX.
struct FrameSequence {
  int64_t t = 0;
  int64_t c = 0;
  std::vector<float> data;  // row-major

  const float* row(int64_t i) const { return data.data() + i * c; }
  float* row(int64_t i) { return data.data() + i * c; }

  FrameSequence slice(int64_t start, int64_t len) const {
    FrameSequence out;
    out.t = len;
    out.c = c;
    out.data.assign(data.begin() + start * c, data.begin() + (start + len) * c);
    return out;
  }
};

template <typename Real>
FrameSequence to_frames(const NodePtr<Real>& node) {
  FrameSequence fs;
  fs.t = node->shape[0];
  fs.c = node->shape[1];
  fs.data.assign(node->value.begin(), node->value.end());
  return fs;
}

template <typename Real>
NodePtr<Real> frames_to_node(const FrameSequence& fs) {
  std::vector<Real> v(fs.data.begin(), fs.data.end());
  return constant<Real>({fs.t, fs.c}, std::move(v));
}

}  // namespace cpcx

#endif  // CPCX_MODEL_FRAME_SEQUENCE_H_
