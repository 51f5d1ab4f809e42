// model/cpc_loss.cc

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

#include "model/cpc_loss.h"

#include <algorithm>

#include "base/error.h"

namespace cpcx {

std::vector<int64_t> sample_negative_rows(int64_t pool_size,
                                          const std::vector<int64_t>& excluded, int64_t n_neg,
                                          Rng& rng) {
  const int64_t eligible = pool_size - static_cast<int64_t>(excluded.size());
  if (eligible < 2) {
    throw DataError(
        "negative sampling: speaker has only " + std::to_string(std::max<int64_t>(eligible, 0)) +
        " frame(s) available beyond the positive; use larger windows or regroup the batch so "
        "each speaker contributes more frames");
  }
  std::vector<int64_t> out(static_cast<size_t>(n_neg));
  for (int64_t i = 0; i < n_neg; ++i) {
    int64_t r = rng.uniform_int(eligible);
    for (int64_t e : excluded) {
      if (r >= e) ++r;
    }
    out[i] = r;
  }
  return out;
}

NegativeSet sample_negatives(int64_t pool_size, int64_t positive_row, int64_t n_neg, Rng& rng) {
  NegativeSet set;
  set.positive = positive_row;
  set.negatives = sample_negative_rows(pool_size, {positive_row}, n_neg, rng);
  return set;
}

template <typename Real>
InfoNceResult<Real> info_nce(const std::vector<ScoringWindow<Real>>& windows, int64_t horizon,
                             int64_t n_neg, bool shared_negatives_across_k, Rng& rng) {
  if (windows.empty()) throw Error("info_nce: no windows to score");
  std::vector<NodePtr<Real>> terms;
  std::vector<int64_t> correct(static_cast<size_t>(horizon), 0);
  int64_t scored_positions = 0;

  for (const auto& w : windows) {
    if (static_cast<int64_t>(w.preds.size()) < horizon) {
      throw ShapeError("info_nce: window provides " + std::to_string(w.preds.size()) +
                       " prediction horizons, need " + std::to_string(horizon));
    }
    const int64_t t_len = w.frames;
    if (t_len <= horizon) {
      throw DataError("info_nce: window of " + std::to_string(t_len) +
                      " frames has no position with a full horizon of K=" +
                      std::to_string(horizon));
    }
    terms.reserve(terms.size() + static_cast<size_t>((t_len - horizon) * horizon));
    for (int64_t t = 0; t + horizon < t_len; ++t) {
      ++scored_positions;
      std::vector<int64_t> shared;
      if (shared_negatives_across_k) {
        std::vector<int64_t> horizon_rows;
        for (int64_t k = 1; k <= horizon; ++k) horizon_rows.push_back(w.pool_row0 + t + k);
        shared = sample_negative_rows(w.pool->rows, horizon_rows, n_neg, rng);
      }
      for (int64_t k = 1; k <= horizon; ++k) {
        const int64_t positive = w.pool_row0 + t + k;
        std::vector<int64_t> candidates;
        candidates.reserve(static_cast<size_t>(n_neg) + 1);
        candidates.push_back(positive);
        if (shared_negatives_across_k) {
          candidates.insert(candidates.end(), shared.begin(), shared.end());
        } else {
          NegativeSet set = sample_negatives(w.pool->rows, positive, n_neg, rng);
          candidates.insert(candidates.end(), set.negatives.begin(), set.negatives.end());
        }
        auto cand = gather_rows(w.pool->frames, std::move(candidates));
        auto scores = matvec(cand, as_row(w.preds[k - 1], t));
        // Positive strictly largest?
        bool top = true;
        for (int64_t i = 1; i < scores->size(); ++i) {
          if (scores->value[i] >= scores->value[0]) {
            top = false;
            break;
          }
        }
        if (top) ++correct[k - 1];
        terms.push_back(pick(log_softmax(scores), 0));
      }
    }
  }

  InfoNceResult<Real> result;
  result.loss = scale(add_n(terms), -1.0 / static_cast<double>(scored_positions * horizon));
  result.report.loss = result.loss->value[0];
  result.report.scored_positions = scored_positions;
  result.report.accuracy_per_k.resize(static_cast<size_t>(horizon));
  for (int64_t k = 0; k < horizon; ++k) {
    result.report.accuracy_per_k[k] =
        static_cast<double>(correct[k]) / static_cast<double>(scored_positions);
  }
  return result;
}

template InfoNceResult<float> info_nce<float>(const std::vector<ScoringWindow<float>>&, int64_t,
                                              int64_t, bool, Rng&);
template InfoNceResult<double> info_nce<double>(const std::vector<ScoringWindow<double>>&,
                                                int64_t, int64_t, bool, Rng&);

}  // namespace cpcx
