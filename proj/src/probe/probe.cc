// probe/probe.cc

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

#include "probe/probe.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iostream>
#include <limits>
#include <unordered_set>

#include "base/error.h"
#include "base/io_util.h"
#include "train/adam.h"

namespace cpcx {

void ProbeConfig::validate() const {
  if (stack < 1) throw Error("probe config: stack must be >= 1");
  if (stride < 1 || stride > stack) throw Error("probe config: need 1 <= stride <= stack");
  if (steps < 0 || finetune_steps < 0) throw Error("probe config: negative step counts");
  if (batch_size < 1) throw Error("probe config: batch_size must be positive");
}

int64_t stacked_len(int64_t t, int64_t n, int64_t stride) {
  if (t < n) return 0;
  return (t - n) / stride + 1;
}

template <typename Real>
NodePtr<Real> stack_frames(const NodePtr<Real>& x, int64_t n, int64_t stride) {
  if (x->shape.size() != 2) {
    throw ShapeError("stack_frames: expected [T x H], got " + shape_str(x->shape));
  }
  const int64_t t = x->shape[0], h = x->shape[1];
  if (t < n) {
    throw DataError("stack_frames: sequence of " + std::to_string(t) +
                    " frames is shorter than the stack size " + std::to_string(n));
  }
  const int64_t u = stacked_len(t, n, stride);
  std::vector<Real> v(static_cast<size_t>(u * n * h));
  for (int64_t i = 0; i < u; ++i) {
    std::memcpy(v.data() + i * n * h, x->value.data() + i * stride * h,
                sizeof(Real) * static_cast<size_t>(n * h));
  }
  auto out = make_node<Real>({u, n * h}, std::move(v), x->requires_grad);
  if (out->requires_grad) {
    out->parents = {x};
    Node<Real>* o = out.get();
    out->backprop = [o, x, n, stride, h, u]() {
      Real* gx = x->grad_data();
      const Real* g = o->grad.data();
      for (int64_t i = 0; i < u; ++i) {
        Real* dst = gx + i * stride * h;
        const Real* src = g + i * n * h;
        for (int64_t j = 0; j < n * h; ++j) dst[j] += src[j];
      }
    };
  }
  return out;
}

namespace {

std::vector<int32_t> ctc_labels(const Utterance& u) {
  std::vector<int32_t> labels;
  labels.reserve(u.transcript.size());
  for (int32_t c : u.transcript) labels.push_back(c + 1);  // shift past the blank
  return labels;
}

struct EvalItem {
  const Utterance* utt;
  FrameSequence feats;
};

double evaluate_cached(const std::vector<EvalItem>& items, const NodePtr<float>& w,
                       const NodePtr<float>& b, const ProbeConfig& cfg,
                       const std::vector<std::string>* inventory,
                       std::vector<std::pair<std::string, std::string>>* decodes) {
  int64_t total_dist = 0, total_ref = 0;
  for (const auto& item : items) {
    std::vector<int32_t> hyp;
    if (item.feats.t >= cfg.stack) {
      auto stacked = stack_frames(frames_to_node<float>(item.feats), cfg.stack, cfg.stride);
      auto logits = linear(stacked, w, b);
      hyp = ctc_greedy_decode(logits->value.data(), logits->shape[0], logits->shape[1]);
      for (auto& c : hyp) c -= 1;  // back to inventory indices
    }
    total_dist += edit_distance(hyp, item.utt->transcript);
    total_ref += static_cast<int64_t>(item.utt->transcript.size());
    if (decodes) {
      std::vector<std::string> syms;
      for (int32_t c : hyp) syms.push_back((*inventory)[c]);
      decodes->push_back({item.utt->id, join(syms, " ")});
    }
  }
  if (total_ref == 0) throw DataError("probe evaluation: empty split");
  return static_cast<double>(total_dist) / static_cast<double>(total_ref);
}

std::vector<EvalItem> compute_features(const CpcModel<float>& model, const Dataset& data) {
  std::vector<EvalItem> items;
  items.reserve(data.utterances.size());
  for (const auto& u : data.utterances) {
    items.push_back({&u, context_features(model, u.samples.data(), u.n_samples())});
  }
  return items;
}

}  // namespace

double evaluate_probe(const CpcModel<float>& model, const NodePtr<float>& w,
                      const NodePtr<float>& b, const Dataset& data, const ProbeConfig& cfg,
                      std::vector<std::pair<std::string, std::string>>* decodes) {
  auto items = compute_features(model, data);
  return evaluate_cached(items, w, b, cfg, &data.inventory, decodes);
}

ProbeResult train_probe(CpcModel<float>& model, const Dataset& train, const Dataset& dev,
                        const Dataset& test, const ProbeConfig& cfg) {
  cfg.validate();
  if (train.utterances.empty() || dev.utterances.empty() || test.utterances.empty()) {
    throw DataError("train_probe: empty split");
  }
  const int64_t n_classes = static_cast<int64_t>(train.inventory.size()) + 1;
  const int64_t input_dim = cfg.stack * model.rec_cfg.hidden;

  // Inventory symbols never seen in training transcripts: warn, don't fail.
  {
    std::unordered_set<int32_t> seen;
    for (const auto& u : train.utterances) seen.insert(u.transcript.begin(), u.transcript.end());
    for (size_t i = 0; i < train.inventory.size(); ++i) {
      if (!seen.count(static_cast<int32_t>(i))) {
        std::cerr << "warning: inventory symbol '" << train.inventory[i]
                  << "' absent from training transcripts\n";
      }
    }
  }

  ProbeResult result;
  Rng init_rng = Rng(cfg.seed).split(101);
  {
    const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
    std::vector<float> wv(static_cast<size_t>(n_classes * input_dim));
    for (auto& v : wv) v = static_cast<float>(init_rng.uniform(-bound, bound));
    result.w = parameter<float>("probe/w", {n_classes, input_dim}, std::move(wv));
    result.b = parameter<float>("probe/b", {n_classes},
                                std::vector<float>(static_cast<size_t>(n_classes), 0.0f));
  }

  // Frozen phase: features are constants, computed once.
  std::vector<EvalItem> train_items = compute_features(model, train);
  std::vector<EvalItem> dev_items = compute_features(model, dev);

  std::vector<const EvalItem*> feasible;
  for (const auto& item : train_items) {
    const int64_t u_frames = stacked_len(item.feats.t, cfg.stack, cfg.stride);
    if (u_frames >= ctc_min_frames(ctc_labels(*item.utt))) {
      feasible.push_back(&item);
    } else {
      ++result.train_skipped_infeasible;
    }
  }
  if (feasible.empty()) {
    throw DataError("train_probe: no training utterance is CTC-feasible at stack=" +
                    std::to_string(cfg.stack) + " stride=" + std::to_string(cfg.stride));
  }

  AdamConfig frozen_adam_cfg;
  frozen_adam_cfg.lr = cfg.lr;
  Adam<float> optimizer({result.w, result.b}, frozen_adam_cfg);

  double best_dev = std::numeric_limits<double>::infinity();
  std::vector<float> best_w = result.w->value, best_b = result.b->value;

  auto eval_dev_and_track = [&]() {
    const double dev_per = evaluate_cached(dev_items, result.w, result.b, cfg, nullptr, nullptr);
    if (dev_per < best_dev) {
      best_dev = dev_per;
      best_w = result.w->value;
      best_b = result.b->value;
    }
    return dev_per;
  };

  for (int64_t step = 0; step < cfg.steps; ++step) {
    Rng rng = Rng(cfg.seed).split(1000 + static_cast<uint64_t>(step));
    std::vector<NodePtr<float>> terms;
    for (int64_t bi = 0; bi < cfg.batch_size; ++bi) {
      const EvalItem* item = feasible[rng.uniform_int(static_cast<int64_t>(feasible.size()))];
      auto stacked = stack_frames(frames_to_node<float>(item->feats), cfg.stack, cfg.stride);
      auto logits = linear(stacked, result.w, result.b);
      terms.push_back(ctc_loss(logits, ctc_labels(*item->utt)));
    }
    auto loss = scale(add_n(terms), 1.0 / static_cast<double>(cfg.batch_size));
    if (!std::isfinite(static_cast<double>(loss->value[0]))) {
      throw NumericError("train_probe: non-finite CTC loss at step " + std::to_string(step));
    }
    backward(loss);
    optimizer.step();
    if (cfg.eval_interval > 0 && (step + 1) % cfg.eval_interval == 0) eval_dev_and_track();
  }
  eval_dev_and_track();

  if (cfg.mode == ProbeConfig::Mode::kFrozen) {
    result.w->value = best_w;
    result.b->value = best_b;
    result.dev_per = best_dev;
    result.test_per = evaluate_probe(model, result.w, result.b, test, cfg, &result.test_decodes);
    return result;
  }

  // Finetune phase: continue from the frozen solution, updating everything.
  result.w->value = best_w;
  result.b->value = best_b;
  std::vector<NodePtr<float>> all_params = model.parameters();
  all_params.push_back(result.w);
  all_params.push_back(result.b);
  AdamConfig ft_cfg;
  ft_cfg.lr = cfg.finetune_lr;
  Adam<float> ft_optimizer(all_params, ft_cfg);

  auto snapshot = [&]() {
    std::vector<std::vector<float>> vals;
    vals.reserve(all_params.size());
    for (const auto& p : all_params) vals.push_back(p->value);
    return vals;
  };
  auto restore = [&](const std::vector<std::vector<float>>& vals) {
    for (size_t i = 0; i < all_params.size(); ++i) all_params[i]->value = vals[i];
  };

  std::vector<std::vector<float>> best_state = snapshot();
  // best_dev carries over from the frozen phase: finetuning must beat it.

  const int64_t ft_batch = std::max<int64_t>(1, cfg.batch_size / 4);
  std::vector<const Utterance*> ft_feasible;
  for (const auto& item : train_items) {
    const int64_t u_frames = stacked_len(item.feats.t, cfg.stack, cfg.stride);
    if (u_frames >= ctc_min_frames(ctc_labels(*item.utt))) ft_feasible.push_back(item.utt);
  }

  for (int64_t step = 0; step < cfg.finetune_steps; ++step) {
    Rng rng = Rng(cfg.seed).split(5000000 + static_cast<uint64_t>(step));
    std::vector<NodePtr<float>> terms;
    for (int64_t bi = 0; bi < ft_batch; ++bi) {
      const Utterance* utt =
          ft_feasible[rng.uniform_int(static_cast<int64_t>(ft_feasible.size()))];
      auto enc = model.encode_window(utt->samples.data(), utt->n_samples());
      auto ctx = model.context_of(enc);
      auto logits = linear(stack_frames(ctx, cfg.stack, cfg.stride), result.w, result.b);
      terms.push_back(ctc_loss(logits, ctc_labels(*utt)));
    }
    auto loss = scale(add_n(terms), 1.0 / static_cast<double>(ft_batch));
    if (!std::isfinite(static_cast<double>(loss->value[0]))) {
      throw NumericError("train_probe: non-finite finetune loss at step " +
                         std::to_string(step));
    }
    backward(loss);
    clip_global_norm(all_params, 5.0);
    ft_optimizer.step();
    if (cfg.eval_interval > 0 &&
        ((step + 1) % cfg.eval_interval == 0 || step + 1 == cfg.finetune_steps)) {
      const double dev_per = evaluate_probe(model, result.w, result.b, dev, cfg, nullptr);
      if (dev_per < best_dev) {
        best_dev = dev_per;
        best_state = snapshot();
      }
    }
  }
  restore(best_state);
  result.dev_per = best_dev;
  result.test_per = evaluate_probe(model, result.w, result.b, test, cfg, &result.test_decodes);
  return result;
}

template NodePtr<float> stack_frames<float>(const NodePtr<float>&, int64_t, int64_t);
template NodePtr<double> stack_frames<double>(const NodePtr<double>&, int64_t, int64_t);

}  // namespace cpcx
