// model/predictor.h

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

#ifndef CPCX_MODEL_PREDICTOR_H_
#define CPCX_MODEL_PREDICTOR_H_

#include <string>
#include <vector>

#include "base/rng.h"
#include "tensor/ops.h"

namespace cpcx {

// Predicts the next K encoder embeddings from context states. Four kinds:
//   linear      one matrix per horizon k (the classic bilinear score)
//   ffd         shared per-timestep 2-layer MLP trunk, K projections
//   conv8       causal width-8 convolution trunk, K projections
//   transformer one causally masked self-attention layer, K projections
// All kinds are causal: prediction at t sees z_1..z_t only.
struct PredictorConfig {
  enum class Kind { kLinear, kFfd, kConv8, kTransformer } kind = Kind::kTransformer;
  int64_t horizon = 12;  // K
  double dropout_rate = 0.1;
  int64_t attention_heads = 4;
  // One shared trunk with K output heads (default), or K fully separate
  // trunks for the transformer kind.
  bool heads_share_trunk = true;

  void validate(int64_t hidden) const;
};

std::string predictor_kind_name(PredictorConfig::Kind kind);
PredictorConfig::Kind predictor_kind_from_name(const std::string& name);

template <typename Real>
struct TransformerTrunk {
  NodePtr<Real> wq, bq, wk, bk, wv, bv, wo, bo;
  NodePtr<Real> ln1_gain, ln1_shift, ln2_gain, ln2_shift;
  NodePtr<Real> ff_w1, ff_b1, ff_w2, ff_b2;  // inner dimension 2H

  void init(const std::string& prefix, int64_t h, Rng& rng);
  void collect(std::vector<NodePtr<Real>>& out) const;
};

template <typename Real>
struct PredictorParams {
  PredictorConfig::Kind kind = PredictorConfig::Kind::kLinear;
  // Output projections [C x H]; bias-free like the bilinear classifiers
  // they generalize. For linear these ARE the predictor.
  std::vector<NodePtr<Real>> heads;
  // ffd trunk
  NodePtr<Real> ffd_w1, ffd_b1, ffd_w2, ffd_b2;
  // conv8 trunk
  NodePtr<Real> conv_kernel, conv_bias;  // [H x H x 8], [H]
  // transformer trunk(s); one if heads_share_trunk else K
  std::vector<TransformerTrunk<Real>> trunks;

  void init(const PredictorConfig& cfg, int64_t embed_dim, int64_t hidden, Rng& rng);
  void collect(std::vector<NodePtr<Real>>& out) const;
};

// preds[k][t] estimates the encoder embedding at t + k + 1 from z_1..z_t.
// Dropout (transformer only) draws from `rng` when training is true.
template <typename Real>
std::vector<NodePtr<Real>> predict(const NodePtr<Real>& z, const PredictorConfig& cfg,
                                   const PredictorParams<Real>& params, bool training,
                                   Rng& rng);

// Sinusoidal position table [T x H], the order signal for attention.
template <typename Real>
NodePtr<Real> position_encoding(int64_t t, int64_t h);

}  // namespace cpcx

#endif  // CPCX_MODEL_PREDICTOR_H_
