// model/model.h

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

#ifndef CPCX_MODEL_MODEL_H_
#define CPCX_MODEL_MODEL_H_

#include <string>
#include <vector>

#include "model/cpc_loss.h"
#include "model/encoder.h"
#include "model/frame_sequence.h"
#include "model/predictor.h"
#include "model/sequence.h"

namespace cpcx {

// The full model: encoder phi, sequence model psi, predictor heads, and an
// optional per-frame classifier head used by supervised pretraining.
template <typename Real>
struct CpcModel {
  EncoderConfig enc_cfg;
  RecurrenceConfig rec_cfg;
  PredictorConfig pred_cfg;
  int64_t n_classes = 0;  // > 0 when the supervised head exists

  EncoderParams<Real> encoder;
  SequenceParams<Real> sequence;
  PredictorParams<Real> predictor;
  NodePtr<Real> head_w, head_b;  // [P x H], [P]

  void init(uint64_t seed);

  // All learnable parameters in a fixed, serialization-stable order.
  std::vector<NodePtr<Real>> parameters() const;

  // phi(x): [T x C] encoder output for a waveform window.
  NodePtr<Real> encode_window(const float* samples, int64_t n) const;
  // psi(phi(x)): [T x H] context states.
  NodePtr<Real> context_of(const NodePtr<Real>& encoded) const;

  void zero_grad() const;
};

// Forward-only context features for a full utterance (no gradients).
FrameSequence context_features(const CpcModel<float>& model, const float* samples, int64_t n);
FrameSequence encoder_features(const CpcModel<float>& model, const float* samples, int64_t n);

}  // namespace cpcx

#endif  // CPCX_MODEL_MODEL_H_
