// probe/ctc.h

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

#ifndef CPCX_PROBE_CTC_H_
#define CPCX_PROBE_CTC_H_

#include <cstdint>
#include <vector>

#include "tensor/ops.h"

namespace cpcx {

// Class index 0 is the CTC blank everywhere; labels use 1..P.
inline constexpr int32_t kCtcBlank = 0;

// Frames a label sequence needs at minimum: its length plus one blank
// between each repeated pair.
int64_t ctc_min_frames(const std::vector<int32_t>& labels);

// Negative log probability of all blank-augmented alignments of `labels`
// under per-frame logits [U x (P+1)], by the forward dynamic program in
// log space (Graves et al. 2006). Differentiable w.r.t. the logits.
// Instances with U below the feasible minimum raise CtcInfeasibleError
// rather than returning an infinite loss.
template <typename Real>
NodePtr<Real> ctc_loss(const NodePtr<Real>& logits, const std::vector<int32_t>& labels);

// Per-frame argmax, collapse consecutive repeats, drop blanks.
std::vector<int32_t> ctc_greedy_decode(const float* logits, int64_t u, int64_t n_classes);

// Levenshtein distance with unit costs.
int64_t edit_distance(const std::vector<int32_t>& a, const std::vector<int32_t>& b);

// Phone error rate: edit distance / |ref|. May exceed 1. Empty ref is an
// error.
double per(const std::vector<int32_t>& hyp, const std::vector<int32_t>& ref);

}  // namespace cpcx

#endif  // CPCX_PROBE_CTC_H_
