// probe/probe.h

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

#ifndef CPCX_PROBE_PROBE_H_
#define CPCX_PROBE_PROBE_H_

#include <string>
#include <vector>

#include "data/dataset.h"
#include "model/model.h"
#include "probe/ctc.h"

namespace cpcx {

// Linear phoneme classifier over concatenated context frames, trained with
// CTC against non-aligned transcripts and scored by phone error rate.
struct ProbeConfig {
  int64_t stack = 8;   // frames concatenated per classifier input
  int64_t stride = 8;  // 8 = non-overlapping blocks (the default reading)
  enum class Mode { kFrozen, kFinetune } mode = Mode::kFrozen;
  int64_t steps = 3000;          // classifier-only optimization steps
  int64_t finetune_steps = 300;  // joint steps after the classifier phase
  double lr = 1e-3;
  double finetune_lr = 1e-4;
  int64_t batch_size = 8;
  int64_t eval_interval = 250;  // dev evaluations for best-model tracking
  uint64_t seed = 1;

  void validate() const;
};

// Non-overlapping (stride = n) or sliding concatenation of n consecutive
// frames: out[u] = x[u*stride .. u*stride+n-1] flattened. The trailing
// remainder shorter than n frames is dropped. T < n is an error.
template <typename Real>
NodePtr<Real> stack_frames(const NodePtr<Real>& x, int64_t n, int64_t stride);

int64_t stacked_len(int64_t t, int64_t n, int64_t stride);

struct ProbeResult {
  NodePtr<float> w, b;  // classifier [(P+1) x stack*H], [(P+1)]
  double dev_per = 0;
  double test_per = 0;
  int64_t train_skipped_infeasible = 0;  // utterances CTC cannot score
  std::vector<std::pair<std::string, std::string>> test_decodes;  // id -> hyp symbols
};

// Trains the probe on `train`, tracks the best classifier by dev PER, and
// reports dev/test PER via greedy decoding. Frozen mode precomputes
// context features once and never touches upstream parameters; finetune
// mode first runs the frozen phase, then continues with joint updates of
// the whole model at finetune_lr, keeping the best-dev snapshot.
ProbeResult train_probe(CpcModel<float>& model, const Dataset& train, const Dataset& dev,
                        const Dataset& test, const ProbeConfig& cfg);

// PER of a fixed classifier over a dataset (corpus-level: total edit
// distance / total reference length).
double evaluate_probe(const CpcModel<float>& model, const NodePtr<float>& w,
                      const NodePtr<float>& b, const Dataset& data, const ProbeConfig& cfg,
                      std::vector<std::pair<std::string, std::string>>* decodes = nullptr);

}  // namespace cpcx

#endif  // CPCX_PROBE_PROBE_H_
