// model/sequence.h

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

#ifndef CPCX_MODEL_SEQUENCE_H_
#define CPCX_MODEL_SEQUENCE_H_

#include <utility>
#include <vector>

#include "base/rng.h"
#include "tensor/ops.h"

namespace cpcx {

// Causal autoregressive model over encoder frames. One recurrent layer;
// LSTM by default (GRU kept as an ablation flag). z_t is a function of
// frames 1..t only, by construction.
struct RecurrenceConfig {
  enum class Kind { kLstm, kGru } kind = Kind::kLstm;
  int64_t hidden = 256;
  int64_t layers = 1;

  void validate() const;
};

template <typename Real>
struct SequenceParams {
  RecurrenceConfig::Kind kind = RecurrenceConfig::Kind::kLstm;
  // LSTM: gate order (input, forget, cell, output) stacked along rows.
  NodePtr<Real> wx;  // [4H x C]
  NodePtr<Real> wh;  // [4H x H]
  NodePtr<Real> b;   // [4H], forget-gate block initialized to 1
  // GRU: update/reset gates stacked, candidate separate (needs r * h).
  NodePtr<Real> wx_zr, wh_zr, b_zr;  // [2H x C], [2H x H], [2H]
  NodePtr<Real> wx_n, wh_n, b_n;     // [H x C], [H x H], [H]

  void init(const RecurrenceConfig& cfg, int64_t input_dim, Rng& rng);
  void collect(std::vector<NodePtr<Real>>& out) const;
};

// One LSTM step: gates sigmoid, candidate tanh, tanh output gating.
template <typename Real>
std::pair<NodePtr<Real>, NodePtr<Real>> lstm_step(const NodePtr<Real>& x,
                                                  const NodePtr<Real>& h,
                                                  const NodePtr<Real>& c,
                                                  const SequenceParams<Real>& params);

// One GRU step. Update gate z copies the previous state: h' = z*h + (1-z)*n.
template <typename Real>
NodePtr<Real> gru_step(const NodePtr<Real>& x, const NodePtr<Real>& h,
                       const SequenceParams<Real>& params);

// Runs the recurrence over all frames from a zero initial state and stacks
// the hidden states into [T x H].
template <typename Real>
NodePtr<Real> context(const NodePtr<Real>& frames, const RecurrenceConfig& cfg,
                      const SequenceParams<Real>& params);

}  // namespace cpcx

#endif  // CPCX_MODEL_SEQUENCE_H_
