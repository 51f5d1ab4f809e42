// train/trainer.cc

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

#include "train/trainer.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "base/error.h"

namespace cpcx {

void TrainConfig::validate() const {
  if (window_samples % kSamplesPerFrame != 0) {
    throw Error("train config: window_samples must be a multiple of 160");
  }
  if (horizon < 1 || horizon >= window_samples / kSamplesPerFrame) {
    throw Error("train config: need 1 <= K < window_samples/160");
  }
  if (batch_size < 1) throw Error("train config: batch_size must be positive");
  if (n_neg < 1) throw Error("train config: n_neg must be positive");
  if (max_steps < 0) throw Error("train config: max_steps must be non-negative");
}

std::string format_trace_line(const TraceRecord& rec) {
  char buf[64];
  std::string line = std::to_string(rec.step);
  std::snprintf(buf, sizeof(buf), "%.9g", rec.loss);
  line += std::string("\t") + buf;
  for (double a : rec.acc) {
    std::snprintf(buf, sizeof(buf), "%.9g", a);
    line += std::string("\t") + buf;
  }
  line += "\n";
  return line;
}

Trainer::Trainer(CpcModel<float>& model, const Dataset& dataset, const TrainConfig& cfg,
                 std::string config_text)
    : model_(model),
      dataset_(dataset),
      cfg_(cfg),
      config_text_(std::move(config_text)),
      adam_(model.parameters(), cfg.adam) {
  cfg_.validate();
  for (size_t i = 0; i < dataset_.utterances.size(); ++i) {
    const Utterance& u = dataset_.utterances[i];
    if (u.n_samples() >= cfg_.window_samples) eligible_.push_back(static_cast<int64_t>(i));
    if (cfg_.mode == TrainConfig::Mode::kSupervised && !u.has_alignment()) {
      throw DataError("supervised pretraining: utterance " + u.id +
                      " has no frame-aligned labels");
    }
  }
  if (eligible_.empty()) {
    throw DataError("trainer: no utterance is at least one window (" +
                    std::to_string(cfg_.window_samples) + " samples) long");
  }
  if (cfg_.mode == TrainConfig::Mode::kSupervised && model_.n_classes <= 0) {
    throw Error("supervised pretraining needs a model with a classifier head");
  }
}

TraceRecord Trainer::step_once() {
  // All randomness is derived from (seed, step); nothing persists across
  // steps except parameters and moments.
  Rng base(cfg_.seed);
  const uint64_t s = static_cast<uint64_t>(step_);
  Rng sample_rng = base.split(s * 8 + 1);
  Rng neg_rng = base.split(s * 8 + 2);
  Rng dropout_rng = base.split(s * 8 + 3);

  std::string batch_desc;
  TraceRecord rec;
  if (cfg_.mode == TrainConfig::Mode::kCpc) {
    rec = cpc_step(sample_rng, neg_rng, dropout_rng, &batch_desc);
  } else {
    rec = supervised_step(sample_rng, &batch_desc);
  }
  if (!std::isfinite(rec.loss)) {
    throw NumericError("trainer: non-finite loss at step " + std::to_string(step_ + 1) +
                       "; offending batch: " + batch_desc);
  }
  clip_global_norm(adam_.params(), cfg_.clip_norm);
  adam_.step();
  ++step_;
  rec.step = step_;
  return rec;
}

TraceRecord Trainer::cpc_step(Rng& sample_rng, Rng& neg_rng, Rng& dropout_rng,
                              std::string* batch_desc) {
  const int64_t window_frames = cfg_.window_samples / kSamplesPerFrame;

  struct WindowFwd {
    const Utterance* utt;
    int64_t offset;
    NodePtr<float> enc;
    std::vector<NodePtr<float>> preds;
  };
  std::vector<WindowFwd> windows;
  for (int64_t b = 0; b < cfg_.batch_size; ++b) {
    const Utterance& u =
        dataset_.utterances[eligible_[sample_rng.uniform_int(
            static_cast<int64_t>(eligible_.size()))]];
    // Frame-aligned offsets keep label arithmetic exact everywhere else.
    const int64_t max_off = (u.n_samples() - cfg_.window_samples) / kSamplesPerFrame;
    const int64_t offset = kSamplesPerFrame * sample_rng.uniform_int(max_off + 1);
    *batch_desc += (b ? ", " : "") + u.id + "@" + std::to_string(offset);
    WindowFwd w;
    w.utt = &u;
    w.offset = offset;
    w.enc = model_.encode_window(u.samples.data() + offset, cfg_.window_samples);
    auto ctx = model_.context_of(w.enc);
    w.preds = predict(ctx, model_.pred_cfg, model_.predictor, /*training=*/true, dropout_rng);
    windows.push_back(std::move(w));
  }

  // Within-speaker pools across the whole batch.
  std::map<std::string, SpeakerPool<float>> pools;
  std::map<std::string, std::vector<const WindowFwd*>> by_speaker;
  for (const auto& w : windows) by_speaker[w.utt->speaker].push_back(&w);
  std::map<const WindowFwd*, std::pair<const SpeakerPool<float>*, int64_t>> placement;
  for (auto& [speaker, group] : by_speaker) {
    std::vector<NodePtr<float>> parts;
    int64_t rows = 0;
    for (const WindowFwd* w : group) {
      placement[w] = {nullptr, rows};
      parts.push_back(w->enc);
      rows += window_frames;
    }
    SpeakerPool<float>& pool = pools[speaker];
    pool.frames = parts.size() == 1 ? parts[0] : concat_rows(parts);
    pool.rows = rows;
    for (const WindowFwd* w : group) placement[w].first = &pool;
  }

  std::vector<ScoringWindow<float>> scoring;
  for (const auto& w : windows) {
    ScoringWindow<float> sw;
    sw.preds = w.preds;
    sw.pool = placement[&w].first;
    sw.pool_row0 = placement[&w].second;
    sw.frames = window_frames;
    scoring.push_back(std::move(sw));
  }

  auto result = info_nce<float>(scoring, cfg_.horizon, cfg_.n_neg,
                                cfg_.shared_negatives_across_k, neg_rng);
  if (std::isfinite(result.report.loss)) backward(result.loss);

  TraceRecord rec;
  rec.loss = result.report.loss;
  rec.acc = result.report.accuracy_per_k;
  return rec;
}

TraceRecord Trainer::supervised_step(Rng& sample_rng, std::string* batch_desc) {
  const int64_t window_frames = cfg_.window_samples / kSamplesPerFrame;
  std::vector<NodePtr<float>> terms;
  int64_t frames_total = 0, frames_correct = 0;
  for (int64_t b = 0; b < cfg_.batch_size; ++b) {
    const Utterance& u =
        dataset_.utterances[eligible_[sample_rng.uniform_int(
            static_cast<int64_t>(eligible_.size()))]];
    const int64_t max_off = (u.n_samples() - cfg_.window_samples) / kSamplesPerFrame;
    const int64_t offset = kSamplesPerFrame * sample_rng.uniform_int(max_off + 1);
    *batch_desc += (b ? ", " : "") + u.id + "@" + std::to_string(offset);

    auto enc = model_.encode_window(u.samples.data() + offset, cfg_.window_samples);
    auto ctx = model_.context_of(enc);
    auto logits = linear(ctx, model_.head_w, model_.head_b);
    auto lsm = log_softmax_rows(logits);
    const int64_t frame0 = offset / kSamplesPerFrame;
    std::vector<int64_t> labels(static_cast<size_t>(window_frames));
    for (int64_t t = 0; t < window_frames; ++t) {
      labels[t] = u.aligned_labels[frame0 + t];
    }
    // Frame accuracy on the fly.
    for (int64_t t = 0; t < window_frames; ++t) {
      const float* row = lsm->value.data() + t * model_.n_classes;
      int64_t best = 0;
      for (int64_t c = 1; c < model_.n_classes; ++c) {
        if (row[c] > row[best]) best = c;
      }
      ++frames_total;
      if (best == labels[t]) ++frames_correct;
    }
    terms.push_back(sum(pick_per_row(lsm, std::move(labels))));
  }
  auto loss = scale(add_n(terms), -1.0 / static_cast<double>(frames_total));
  if (std::isfinite(static_cast<double>(loss->value[0]))) backward(loss);

  TraceRecord rec;
  rec.loss = loss->value[0];
  rec.acc = {static_cast<double>(frames_correct) / static_cast<double>(frames_total)};
  return rec;
}

void Trainer::run(const std::string& trace_path, const std::string& ckpt_path) {
  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path, std::ios::trunc);
    if (!trace) throw DataError("trainer: cannot open trace file " + trace_path);
  }
  while (step_ < cfg_.max_steps) {
    TraceRecord rec = step_once();
    if (trace.is_open()) {
      trace << format_trace_line(rec);
      trace.flush();
    }
    if (!ckpt_path.empty() && cfg_.eval_interval > 0 && step_ % cfg_.eval_interval == 0) {
      save(ckpt_path);
    }
  }
  if (!ckpt_path.empty()) save(ckpt_path);
}

Checkpoint Trainer::make_checkpoint() const {
  Checkpoint ckpt;
  ckpt.config_text = config_text_;
  const auto params = adam_.params();
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    ckpt.arrays.push_back(NamedArray::from_f32("param/" + p->name, p->shape, p->value));
  }
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    ckpt.arrays.push_back(NamedArray::from_f32("adam/m/" + p->name, p->shape, adam_.slot(i).m));
    ckpt.arrays.push_back(NamedArray::from_f32("adam/v/" + p->name, p->shape, adam_.slot(i).v));
  }
  ckpt.arrays.push_back(NamedArray::from_i64("meta/step", {step_}));
  ckpt.arrays.push_back(NamedArray::from_u64("meta/rng_state", {cfg_.seed}));
  return ckpt;
}

void Trainer::save(const std::string& path) const { save_checkpoint(make_checkpoint(), path); }

void Trainer::restore(const Checkpoint& ckpt) {
  restore_model_params(model_, ckpt);
  const auto params = adam_.params();
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    adam_.slot(i).m = ckpt.require("adam/m/" + p->name).as_f32();
    adam_.slot(i).v = ckpt.require("adam/v/" + p->name).as_f32();
  }
  step_ = ckpt.require("meta/step").as_i64()[0];
  adam_.set_step_count(step_);
}

void restore_model_params(CpcModel<float>& model, const Checkpoint& ckpt) {
  for (const auto& p : model.parameters()) {
    const NamedArray& a = ckpt.require("param/" + p->name);
    if (a.shape != p->shape) {
      throw DataError("checkpoint: array param/" + p->name + " has shape " +
                      shape_str(a.shape) + ", model expects " + shape_str(p->shape));
    }
    p->value = a.as_f32();
    p->zero_grad();
  }
}

}  // namespace cpcx
