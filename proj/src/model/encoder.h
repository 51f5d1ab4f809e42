// model/encoder.h

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

#ifndef CPCX_MODEL_ENCODER_H_
#define CPCX_MODEL_ENCODER_H_

#include <string>
#include <vector>

#include "base/rng.h"
#include "model/frame_sequence.h"
#include "tensor/ops.h"

namespace cpcx {

// Strided convolutional encoder over raw 16 kHz waveform. The five layers
// jointly downsample by 160, one output frame per 10 ms. Paddings are the
// unique symmetric per-layer choice that makes T = N/160 exact whenever
// 160 divides N, which keeps frame/label alignment arithmetic exact.
struct EncoderConfig {
  std::vector<int64_t> kernels{10, 8, 4, 4, 4};
  std::vector<int64_t> strides{5, 4, 2, 2, 2};
  std::vector<int64_t> pads{3, 2, 1, 1, 1};
  int64_t channels = 256;
  enum class Norm { kChannelNorm, kNone } norm = Norm::kChannelNorm;

  int64_t downsampling() const {
    int64_t d = 1;
    for (int64_t s : strides) d *= s;
    return d;
  }
  void validate() const;
};

inline constexpr double kChannelNormEps = 1e-5;

template <typename Real>
struct EncoderParams {
  std::vector<NodePtr<Real>> kernels;  // [C_out x C_in x k]
  std::vector<NodePtr<Real>> biases;   // [C_out]
  std::vector<NodePtr<Real>> gains;    // [C], channel_norm only
  std::vector<NodePtr<Real>> shifts;   // [C]

  void init(const EncoderConfig& cfg, Rng& rng);
  void collect(std::vector<NodePtr<Real>>& out) const;
};

// Waveform as a [N x 1] constant node. Values are expected in [-1, 1].
template <typename Real>
NodePtr<Real> waveform_node(const float* samples, int64_t n);

// conv1d -> channel_norm -> relu, five times. Requires n >= 160 (one full
// frame); shorter input would produce an empty sequence.
template <typename Real>
NodePtr<Real> encode(const NodePtr<Real>& waveform, const EncoderConfig& cfg,
                     const EncoderParams<Real>& params);

// Number of frames produced for an n-sample input.
int64_t encoded_len(const EncoderConfig& cfg, int64_t n);

}  // namespace cpcx

#endif  // CPCX_MODEL_ENCODER_H_
