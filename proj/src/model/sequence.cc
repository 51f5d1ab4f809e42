// model/sequence.cc

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

#include "model/sequence.h"

#include <cmath>

#include "base/error.h"

namespace cpcx {

void RecurrenceConfig::validate() const {
  if (hidden <= 0) throw Error("recurrence config: hidden must be positive");
  if (layers != 1) throw Error("recurrence config: exactly one layer is supported");
}

namespace {

// Stacked matrix of `blocks` orthogonal [H x H] blocks (Gram-Schmidt on
// random normal vectors). Standard stabilizer for recurrent weights.
template <typename Real>
NodePtr<Real> orthogonal_param(const std::string& name, int64_t blocks, int64_t h, Rng& rng) {
  std::vector<Real> out(static_cast<size_t>(blocks * h * h));
  std::vector<double> block(static_cast<size_t>(h * h));
  for (int64_t bidx = 0; bidx < blocks; ++bidx) {
    for (auto& v : block) v = rng.normal();
    // Orthonormalize rows.
    for (int64_t i = 0; i < h; ++i) {
      double* ri = block.data() + i * h;
      for (int64_t j = 0; j < i; ++j) {
        const double* rj = block.data() + j * h;
        double dot = 0;
        for (int64_t k = 0; k < h; ++k) dot += ri[k] * rj[k];
        for (int64_t k = 0; k < h; ++k) ri[k] -= dot * rj[k];
      }
      double norm = 0;
      for (int64_t k = 0; k < h; ++k) norm += ri[k] * ri[k];
      norm = std::sqrt(norm);
      if (norm < 1e-12) norm = 1;  // astronomically unlikely degenerate draw
      for (int64_t k = 0; k < h; ++k) ri[k] /= norm;
    }
    for (int64_t i = 0; i < h * h; ++i) {
      out[bidx * h * h + i] = static_cast<Real>(block[i]);
    }
  }
  return parameter<Real>(name, {blocks * h, h}, std::move(out));
}

template <typename Real>
NodePtr<Real> uniform_param(const std::string& name, Shape shape, double bound, Rng& rng) {
  std::vector<Real> v(static_cast<size_t>(numel(shape)));
  for (auto& x : v) x = static_cast<Real>(rng.uniform(-bound, bound));
  return parameter<Real>(name, std::move(shape), std::move(v));
}

}  // namespace

template <typename Real>
void SequenceParams<Real>::init(const RecurrenceConfig& cfg, int64_t input_dim, Rng& rng) {
  cfg.validate();
  kind = cfg.kind;
  const int64_t h = cfg.hidden;
  const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  if (kind == RecurrenceConfig::Kind::kLstm) {
    wx = uniform_param<Real>("seq/wx", {4 * h, input_dim}, bound, rng);
    wh = orthogonal_param<Real>("seq/wh", 4, h, rng);
    std::vector<Real> bias(static_cast<size_t>(4 * h), Real(0));
    for (int64_t i = h; i < 2 * h; ++i) bias[i] = Real(1);  // forget gate open at start
    b = parameter<Real>("seq/b", {4 * h}, std::move(bias));
  } else {
    wx_zr = uniform_param<Real>("seq/wx_zr", {2 * h, input_dim}, bound, rng);
    wh_zr = orthogonal_param<Real>("seq/wh_zr", 2, h, rng);
    b_zr = parameter<Real>("seq/b_zr", {2 * h},
                           std::vector<Real>(static_cast<size_t>(2 * h), Real(0)));
    wx_n = uniform_param<Real>("seq/wx_n", {h, input_dim}, bound, rng);
    wh_n = orthogonal_param<Real>("seq/wh_n", 1, h, rng);
    b_n =
        parameter<Real>("seq/b_n", {h}, std::vector<Real>(static_cast<size_t>(h), Real(0)));
  }
}

template <typename Real>
void SequenceParams<Real>::collect(std::vector<NodePtr<Real>>& out) const {
  if (kind == RecurrenceConfig::Kind::kLstm) {
    out.push_back(wx);
    out.push_back(wh);
    out.push_back(b);
  } else {
    out.push_back(wx_zr);
    out.push_back(wh_zr);
    out.push_back(b_zr);
    out.push_back(wx_n);
    out.push_back(wh_n);
    out.push_back(b_n);
  }
}

template <typename Real>
std::pair<NodePtr<Real>, NodePtr<Real>> lstm_step(const NodePtr<Real>& x,
                                                  const NodePtr<Real>& h,
                                                  const NodePtr<Real>& c,
                                                  const SequenceParams<Real>& params) {
  const int64_t hs = h->shape[0];
  auto pre = add(linear(x, params.wx, params.b), linear(h, params.wh, NodePtr<Real>()));
  auto gi = sigmoid(slice(pre, 0, hs));
  auto gf = sigmoid(slice(pre, hs, hs));
  auto gc = vtanh(slice(pre, 2 * hs, hs));
  auto go = sigmoid(slice(pre, 3 * hs, hs));
  auto c_next = add(mul(gf, c), mul(gi, gc));
  auto h_next = mul(go, vtanh(c_next));
  return {h_next, c_next};
}

template <typename Real>
NodePtr<Real> gru_step(const NodePtr<Real>& x, const NodePtr<Real>& h,
                       const SequenceParams<Real>& params) {
  const int64_t hs = h->shape[0];
  auto zr = add(linear(x, params.wx_zr, params.b_zr), linear(h, params.wh_zr, NodePtr<Real>()));
  auto z = sigmoid(slice(zr, 0, hs));
  auto r = sigmoid(slice(zr, hs, hs));
  auto n = vtanh(
      add(linear(x, params.wx_n, params.b_n), linear(mul(r, h), params.wh_n, NodePtr<Real>())));
  // h' = z * h + (1 - z) * n
  auto one = constant<Real>({1}, {Real(1)});
  return add(mul(z, h), mul(add(one, scale(z, -1.0)), n));
}

template <typename Real>
NodePtr<Real> context(const NodePtr<Real>& frames, const RecurrenceConfig& cfg,
                      const SequenceParams<Real>& params) {
  cfg.validate();
  if (frames->shape.size() != 2 || frames->shape[0] < 1) {
    throw ShapeError("context: expected non-empty [T x C] frames, got " +
                     shape_str(frames->shape));
  }
  const int64_t t = frames->shape[0];
  const int64_t h = cfg.hidden;
  NodePtr<Real> hidden = zeros<Real>({h});
  NodePtr<Real> cell = zeros<Real>({h});
  std::vector<NodePtr<Real>> steps;
  steps.reserve(static_cast<size_t>(t));
  for (int64_t i = 0; i < t; ++i) {
    auto x = as_row(frames, i);
    if (cfg.kind == RecurrenceConfig::Kind::kLstm) {
      auto hc = lstm_step(x, hidden, cell, params);
      hidden = hc.first;
      cell = hc.second;
    } else {
      hidden = gru_step(x, hidden, params);
    }
    steps.push_back(hidden);
  }
  return stack_rows(steps);
}

template struct SequenceParams<float>;
template struct SequenceParams<double>;
#define CPCX_INSTANTIATE_SEQ(Real)                                                          \
  template std::pair<NodePtr<Real>, NodePtr<Real>> lstm_step<Real>(                         \
      const NodePtr<Real>&, const NodePtr<Real>&, const NodePtr<Real>&,                     \
      const SequenceParams<Real>&);                                                         \
  template NodePtr<Real> gru_step<Real>(const NodePtr<Real>&, const NodePtr<Real>&,         \
                                        const SequenceParams<Real>&);                       \
  template NodePtr<Real> context<Real>(const NodePtr<Real>&, const RecurrenceConfig&,       \
                                       const SequenceParams<Real>&);
CPCX_INSTANTIATE_SEQ(float)
CPCX_INSTANTIATE_SEQ(double)
#undef CPCX_INSTANTIATE_SEQ

}  // namespace cpcx
