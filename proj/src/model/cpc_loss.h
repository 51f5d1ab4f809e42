// model/cpc_loss.h

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

#ifndef CPCX_MODEL_CPC_LOSS_H_
#define CPCX_MODEL_CPC_LOSS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "base/rng.h"
#include "tensor/ops.h"

namespace cpcx {

// Indices into a speaker pool for one (t, k) scoring position. The
// positive is the true future frame; negatives are same-speaker frames
// drawn with replacement, never equal to the positive.
struct NegativeSet {
  int64_t positive = -1;
  std::vector<int64_t> negatives;
};

// Uniform draw of n_neg indices from [0, pool_size) \ excluded, with
// replacement. `excluded` must be sorted ascending and always contains at
// least the positive row. Fewer than 2 eligible frames is an error: the
// caller needs larger windows or a batch regrouping that gives the
// speaker more material.
std::vector<int64_t> sample_negative_rows(int64_t pool_size,
                                          const std::vector<int64_t>& excluded, int64_t n_neg,
                                          Rng& rng);

// Convenience for the common case of excluding only the positive.
NegativeSet sample_negatives(int64_t pool_size, int64_t positive_row, int64_t n_neg, Rng& rng);

struct LossReport {
  double loss = 0;
  std::vector<double> accuracy_per_k;  // fraction of positions where the
                                       // positive score is strictly largest
  int64_t scored_positions = 0;        // (window, t) pairs entering the mean
};

// All encoder frames of one speaker present in a batch, pooled so that
// negatives can come from any same-speaker window.
template <typename Real>
struct SpeakerPool {
  NodePtr<Real> frames;  // [total x C], concatenation of window encodings
  int64_t rows = 0;
};

// One window's contribution to the loss.
template <typename Real>
struct ScoringWindow {
  std::vector<NodePtr<Real>> preds;  // K nodes of [T x C]
  const SpeakerPool<Real>* pool = nullptr;
  int64_t pool_row0 = 0;  // row of this window's frame 0 inside the pool
  int64_t frames = 0;     // T
};

template <typename Real>
struct InfoNceResult {
  NodePtr<Real> loss;  // scalar, mean over (window, t) of L_t
  LossReport report;
};

// The contrastive objective: for each (t, k) with t + K <= T, the positive
// future frame is scored against n_neg same-speaker negatives with a dot
// product, and L_t averages -log softmax(positive) over k. Positions
// lacking a full K-step horizon are skipped; T <= K is an error. The
// candidate set in the softmax denominator includes the positive.
// When shared_negatives_across_k is set, one negative set per t is drawn
// (excluding the entire horizon t+1..t+K) and reused for every k.
template <typename Real>
InfoNceResult<Real> info_nce(const std::vector<ScoringWindow<Real>>& windows, int64_t horizon,
                             int64_t n_neg, bool shared_negatives_across_k, Rng& rng);

}  // namespace cpcx

#endif  // CPCX_MODEL_CPC_LOSS_H_
