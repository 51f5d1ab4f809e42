// model/predictor.cc

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

#include "model/predictor.h"

#include <cmath>

#include "base/error.h"
#include "model/encoder.h"

namespace cpcx {

void PredictorConfig::validate(int64_t hidden) const {
  if (horizon < 1) throw Error("predictor config: horizon K must be >= 1");
  if (dropout_rate < 0 || dropout_rate >= 1) {
    throw Error("predictor config: dropout_rate must lie in [0, 1)");
  }
  if (kind == Kind::kTransformer) {
    if (attention_heads < 1) throw Error("predictor config: attention_heads must be >= 1");
    if (hidden % attention_heads != 0) {
      throw ShapeError("predictor config: hidden size " + std::to_string(hidden) +
                       " not divisible by attention_heads " + std::to_string(attention_heads));
    }
  }
}

std::string predictor_kind_name(PredictorConfig::Kind kind) {
  switch (kind) {
    case PredictorConfig::Kind::kLinear: return "linear";
    case PredictorConfig::Kind::kFfd: return "ffd";
    case PredictorConfig::Kind::kConv8: return "conv8";
    case PredictorConfig::Kind::kTransformer: return "transformer";
  }
  return "?";
}

PredictorConfig::Kind predictor_kind_from_name(const std::string& name) {
  if (name == "linear") return PredictorConfig::Kind::kLinear;
  if (name == "ffd") return PredictorConfig::Kind::kFfd;
  if (name == "conv8") return PredictorConfig::Kind::kConv8;
  if (name == "transformer") return PredictorConfig::Kind::kTransformer;
  throw UsageError("unknown predictor kind: " + name);
}

namespace {

template <typename Real>
NodePtr<Real> uniform_param(const std::string& name, Shape shape, double bound, Rng& rng) {
  std::vector<Real> v(static_cast<size_t>(numel(shape)));
  for (auto& x : v) x = static_cast<Real>(rng.uniform(-bound, bound));
  return parameter<Real>(name, std::move(shape), std::move(v));
}

template <typename Real>
NodePtr<Real> const_param(const std::string& name, Shape shape, Real fill) {
  std::vector<Real> v(static_cast<size_t>(numel(shape)), fill);
  return parameter<Real>(name, std::move(shape), std::move(v));
}

}  // namespace

template <typename Real>
void TransformerTrunk<Real>::init(const std::string& prefix, int64_t h, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(h));
  wq = uniform_param<Real>(prefix + "wq", {h, h}, bound, rng);
  bq = const_param<Real>(prefix + "bq", {h}, Real(0));
  wk = uniform_param<Real>(prefix + "wk", {h, h}, bound, rng);
  bk = const_param<Real>(prefix + "bk", {h}, Real(0));
  wv = uniform_param<Real>(prefix + "wv", {h, h}, bound, rng);
  bv = const_param<Real>(prefix + "bv", {h}, Real(0));
  wo = uniform_param<Real>(prefix + "wo", {h, h}, bound, rng);
  bo = const_param<Real>(prefix + "bo", {h}, Real(0));
  ln1_gain = const_param<Real>(prefix + "ln1_gain", {h}, Real(1));
  ln1_shift = const_param<Real>(prefix + "ln1_shift", {h}, Real(0));
  ln2_gain = const_param<Real>(prefix + "ln2_gain", {h}, Real(1));
  ln2_shift = const_param<Real>(prefix + "ln2_shift", {h}, Real(0));
  ff_w1 = uniform_param<Real>(prefix + "ff_w1", {2 * h, h}, bound, rng);
  ff_b1 = const_param<Real>(prefix + "ff_b1", {2 * h}, Real(0));
  ff_w2 = uniform_param<Real>(prefix + "ff_w2", {h, 2 * h},
                              1.0 / std::sqrt(static_cast<double>(2 * h)), rng);
  ff_b2 = const_param<Real>(prefix + "ff_b2", {h}, Real(0));
}

template <typename Real>
void TransformerTrunk<Real>::collect(std::vector<NodePtr<Real>>& out) const {
  for (const auto& p : {wq, bq, wk, bk, wv, bv, wo, bo, ln1_gain, ln1_shift, ln2_gain,
                        ln2_shift, ff_w1, ff_b1, ff_w2, ff_b2}) {
    out.push_back(p);
  }
}

template <typename Real>
void PredictorParams<Real>::init(const PredictorConfig& cfg, int64_t embed_dim, int64_t hidden,
                                 Rng& rng) {
  cfg.validate(hidden);
  kind = cfg.kind;
  heads.clear();
  trunks.clear();
  const double hbound = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (int64_t k = 0; k < cfg.horizon; ++k) {
    heads.push_back(
        uniform_param<Real>("pred/head" + std::to_string(k), {embed_dim, hidden}, hbound, rng));
  }
  switch (cfg.kind) {
    case PredictorConfig::Kind::kLinear:
      break;
    case PredictorConfig::Kind::kFfd:
      ffd_w1 = uniform_param<Real>("pred/ffd_w1", {hidden, hidden}, hbound, rng);
      ffd_b1 = const_param<Real>("pred/ffd_b1", {hidden}, Real(0));
      ffd_w2 = uniform_param<Real>("pred/ffd_w2", {hidden, hidden}, hbound, rng);
      ffd_b2 = const_param<Real>("pred/ffd_b2", {hidden}, Real(0));
      break;
    case PredictorConfig::Kind::kConv8:
      conv_kernel = uniform_param<Real>("pred/conv_kernel", {hidden, hidden, 8},
                                        1.0 / std::sqrt(static_cast<double>(hidden * 8)), rng);
      conv_bias = const_param<Real>("pred/conv_bias", {hidden}, Real(0));
      break;
    case PredictorConfig::Kind::kTransformer: {
      const int64_t n_trunks = cfg.heads_share_trunk ? 1 : cfg.horizon;
      for (int64_t i = 0; i < n_trunks; ++i) {
        TransformerTrunk<Real> trunk;
        trunk.init("pred/t" + std::to_string(i) + "/", hidden, rng);
        trunks.push_back(std::move(trunk));
      }
      break;
    }
  }
}

template <typename Real>
void PredictorParams<Real>::collect(std::vector<NodePtr<Real>>& out) const {
  for (const auto& h : heads) out.push_back(h);
  switch (kind) {
    case PredictorConfig::Kind::kLinear:
      break;
    case PredictorConfig::Kind::kFfd:
      out.push_back(ffd_w1);
      out.push_back(ffd_b1);
      out.push_back(ffd_w2);
      out.push_back(ffd_b2);
      break;
    case PredictorConfig::Kind::kConv8:
      out.push_back(conv_kernel);
      out.push_back(conv_bias);
      break;
    case PredictorConfig::Kind::kTransformer:
      for (const auto& t : trunks) t.collect(out);
      break;
  }
}

template <typename Real>
NodePtr<Real> position_encoding(int64_t t, int64_t h) {
  std::vector<Real> v(static_cast<size_t>(t * h));
  for (int64_t i = 0; i < t; ++i) {
    for (int64_t j = 0; j < h; j += 2) {
      const double angle =
          static_cast<double>(i) / std::pow(10000.0, static_cast<double>(j) / h);
      v[i * h + j] = static_cast<Real>(std::sin(angle));
      if (j + 1 < h) v[i * h + j + 1] = static_cast<Real>(std::cos(angle));
    }
  }
  return constant<Real>({t, h}, std::move(v));
}

namespace {

template <typename Real>
NodePtr<Real> transformer_layer(const NodePtr<Real>& z, const TransformerTrunk<Real>& trunk,
                                const PredictorConfig& cfg, bool training, Rng& rng) {
  const int64_t t = z->shape[0];
  const int64_t h = z->shape[1];
  const int64_t n_heads = cfg.attention_heads;
  const int64_t dh = h / n_heads;
  auto x = add(z, position_encoding<Real>(t, h));
  auto q = linear(x, trunk.wq, trunk.bq);
  auto k = linear(x, trunk.wk, trunk.bk);
  auto v = linear(x, trunk.wv, trunk.bv);
  std::vector<NodePtr<Real>> head_outputs;
  for (int64_t hh = 0; hh < n_heads; ++hh) {
    auto qh = slice_cols(q, hh * dh, dh);
    auto kh = slice_cols(k, hh * dh, dh);
    auto vh = slice_cols(v, hh * dh, dh);
    auto scores = scale(matmul(qh, transpose(kh)), 1.0 / std::sqrt(static_cast<double>(dh)));
    auto attn = causal_softmax_rows(scores);
    head_outputs.push_back(matmul(attn, vh));
  }
  auto attn_out = linear(concat_cols(head_outputs), trunk.wo, trunk.bo);
  attn_out = dropout(attn_out, cfg.dropout_rate, rng, training);
  auto a1 = channel_norm(add(x, attn_out), trunk.ln1_gain, trunk.ln1_shift, kChannelNormEps);
  auto ff = linear(relu(linear(a1, trunk.ff_w1, trunk.ff_b1)), trunk.ff_w2, trunk.ff_b2);
  ff = dropout(ff, cfg.dropout_rate, rng, training);
  return channel_norm(add(a1, ff), trunk.ln2_gain, trunk.ln2_shift, kChannelNormEps);
}

}  // namespace

template <typename Real>
std::vector<NodePtr<Real>> predict(const NodePtr<Real>& z, const PredictorConfig& cfg,
                                   const PredictorParams<Real>& params, bool training,
                                   Rng& rng) {
  if (z->shape.size() != 2 || z->shape[0] < 1) {
    throw ShapeError("predict: expected non-empty [T x H] context, got " + shape_str(z->shape));
  }
  const int64_t t = z->shape[0];
  const int64_t h = z->shape[1];
  std::vector<NodePtr<Real>> preds;
  preds.reserve(static_cast<size_t>(cfg.horizon));
  switch (cfg.kind) {
    case PredictorConfig::Kind::kLinear: {
      for (int64_t k = 0; k < cfg.horizon; ++k) {
        preds.push_back(matmul(z, transpose(params.heads[k])));
      }
      break;
    }
    case PredictorConfig::Kind::kFfd: {
      auto trunk =
          linear(relu(linear(z, params.ffd_w1, params.ffd_b1)), params.ffd_w2, params.ffd_b2);
      for (int64_t k = 0; k < cfg.horizon; ++k) {
        preds.push_back(matmul(trunk, transpose(params.heads[k])));
      }
      break;
    }
    case PredictorConfig::Kind::kConv8: {
      // Left padding with 7 zero frames makes the convolution causal:
      // output at t=1 sees z_1 only.
      auto padded = concat_rows<Real>({zeros<Real>({7, h}), z});
      auto trunk = conv1d(padded, params.conv_kernel, params.conv_bias, 1, 0);
      for (int64_t k = 0; k < cfg.horizon; ++k) {
        preds.push_back(matmul(trunk, transpose(params.heads[k])));
      }
      break;
    }
    case PredictorConfig::Kind::kTransformer: {
      if (cfg.heads_share_trunk) {
        auto trunk = transformer_layer(z, params.trunks[0], cfg, training, rng);
        for (int64_t k = 0; k < cfg.horizon; ++k) {
          preds.push_back(matmul(trunk, transpose(params.heads[k])));
        }
      } else {
        for (int64_t k = 0; k < cfg.horizon; ++k) {
          auto trunk = transformer_layer(z, params.trunks[k], cfg, training, rng);
          preds.push_back(matmul(trunk, transpose(params.heads[k])));
        }
      }
      break;
    }
  }
  (void)t;
  return preds;
}

template struct TransformerTrunk<float>;
template struct TransformerTrunk<double>;
template struct PredictorParams<float>;
template struct PredictorParams<double>;
template NodePtr<float> position_encoding<float>(int64_t, int64_t);
template NodePtr<double> position_encoding<double>(int64_t, int64_t);
template std::vector<NodePtr<float>> predict<float>(const NodePtr<float>&,
                                                    const PredictorConfig&,
                                                    const PredictorParams<float>&, bool, Rng&);
template std::vector<NodePtr<double>> predict<double>(const NodePtr<double>&,
                                                      const PredictorConfig&,
                                                      const PredictorParams<double>&, bool,
                                                      Rng&);

}  // namespace cpcx
