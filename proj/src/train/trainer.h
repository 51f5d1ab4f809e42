// train/trainer.h

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

#ifndef CPCX_TRAIN_TRAINER_H_
#define CPCX_TRAIN_TRAINER_H_

#include <optional>
#include <string>
#include <vector>

#include "data/checkpoint.h"
#include "data/dataset.h"
#include "model/model.h"
#include "train/adam.h"

namespace cpcx {

struct TrainConfig {
  enum class Mode { kCpc, kSupervised } mode = Mode::kCpc;
  int64_t window_samples = 20480;  // 128 frames
  int64_t batch_size = 8;
  int64_t horizon = 12;  // K
  int64_t n_neg = 128;
  bool shared_negatives_across_k = false;
  AdamConfig adam;
  double clip_norm = 5.0;
  int64_t max_steps = 2000;
  int64_t eval_interval = 500;
  uint64_t seed = 1;

  void validate() const;
};

struct TraceRecord {
  int64_t step = 0;  // 1-based, the step just completed
  double loss = 0;
  std::vector<double> acc;  // per-k positive-top-1 (cpc) or frame accuracy
};

std::string format_trace_line(const TraceRecord& rec);

// Optimization loop for CPC and supervised-frame-classification
// pretraining. Windows are sampled with fresh frame-aligned offsets every
// step; all randomness is a pure function of (seed, step), so a run can
// be resumed from a checkpoint bit-exactly.
class Trainer {
 public:
  // config_text is embedded verbatim in checkpoints so a checkpoint fully
  // describes how to rebuild its model.
  Trainer(CpcModel<float>& model, const Dataset& dataset, const TrainConfig& cfg,
          std::string config_text);

  // One optimization step; throws NumericError (with the offending batch
  // in the message) if the loss goes non-finite.
  TraceRecord step_once();

  // Runs to cfg.max_steps, appending one line per step to trace_path (if
  // non-empty), checkpointing to ckpt_path every eval_interval steps and
  // at the end.
  void run(const std::string& trace_path, const std::string& ckpt_path);

  Checkpoint make_checkpoint() const;
  void save(const std::string& path) const;
  // Restores parameters, optimizer moments and step count.
  void restore(const Checkpoint& ckpt);

  int64_t step() const { return step_; }

 private:
  TraceRecord cpc_step(Rng& sample_rng, Rng& neg_rng, Rng& dropout_rng,
                       std::string* batch_desc);
  TraceRecord supervised_step(Rng& sample_rng, std::string* batch_desc);

  CpcModel<float>& model_;
  const Dataset& dataset_;
  TrainConfig cfg_;
  std::string config_text_;
  Adam<float> adam_;
  std::vector<int64_t> eligible_;  // utterances long enough for a window
  int64_t step_ = 0;
};

// Parameter/moment restore shared with consumers that do not train (probe,
// abx, extract): loads "param/<name>" arrays into the model by name.
void restore_model_params(CpcModel<float>& model, const Checkpoint& ckpt);

}  // namespace cpcx

#endif  // CPCX_TRAIN_TRAINER_H_
