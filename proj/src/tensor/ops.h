// tensor/ops.h

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

#ifndef CPCX_TENSOR_OPS_H_
#define CPCX_TENSOR_OPS_H_

#include <vector>

#include "base/rng.h"
#include "tensor/tensor.h"

namespace cpcx {

// Elementwise. add/mul broadcast only between identical shapes or
// array-vs-scalar (a scalar is shape [1]); anything else is a ShapeError.
template <typename Real> NodePtr<Real> add(const NodePtr<Real>& a, const NodePtr<Real>& b);
template <typename Real> NodePtr<Real> mul(const NodePtr<Real>& a, const NodePtr<Real>& b);
template <typename Real> NodePtr<Real> scale(const NodePtr<Real>& a, double c);
template <typename Real> NodePtr<Real> vtanh(const NodePtr<Real>& a);
template <typename Real> NodePtr<Real> sigmoid(const NodePtr<Real>& a);
template <typename Real> NodePtr<Real> relu(const NodePtr<Real>& a);
// n-ary elementwise sum of same-shaped nodes; one node instead of a chain.
template <typename Real> NodePtr<Real> add_n(const std::vector<NodePtr<Real>>& xs);

// Reductions.
template <typename Real> NodePtr<Real> sum(const NodePtr<Real>& a);  // -> [1]

// Linear algebra.
template <typename Real> NodePtr<Real> matmul(const NodePtr<Real>& a, const NodePtr<Real>& b);
template <typename Real> NodePtr<Real> matvec(const NodePtr<Real>& a, const NodePtr<Real>& x);
template <typename Real> NodePtr<Real> transpose(const NodePtr<Real>& a);
// Row-wise affine map: out[t] = W x[t] + b. x may be [T x Cin] or [Cin];
// b may be null (no bias).
template <typename Real>
NodePtr<Real> linear(const NodePtr<Real>& x, const NodePtr<Real>& w, const NodePtr<Real>& b);

// Softmax family. log_softmax uses max-subtraction; outputs exponentiate
// to a distribution for any finite input.
template <typename Real> NodePtr<Real> log_softmax(const NodePtr<Real>& x);       // [N]
template <typename Real> NodePtr<Real> log_softmax_rows(const NodePtr<Real>& x);  // [M x N]
// Row i is a softmax over columns 0..i; columns above the diagonal are
// exactly zero. Structural causality for attention: entries j > i never
// touch the output, in forward or backward.
template <typename Real> NodePtr<Real> causal_softmax_rows(const NodePtr<Real>& x);  // [T x T]

// 1-D convolution over time. input [T_in x C_in] (time-major), kernel
// [C_out x C_in x k], optional bias [C_out]. Zero padding of `pad` frames
// on both sides; T_out = floor((T_in + 2*pad - k)/stride) + 1.
template <typename Real>
NodePtr<Real> conv1d(const NodePtr<Real>& input, const NodePtr<Real>& kernel,
                     const NodePtr<Real>& bias, int64_t stride, int64_t pad);

int64_t conv1d_out_len(int64_t t_in, int64_t k, int64_t stride, int64_t pad);

// Per-timestep standardization over the channel axis with learned affine:
// out_t = gain * (x_t - mean(x_t)) / sqrt(var(x_t) + eps) + bias.
// No statistic crosses time steps or sequences. C must be >= 2.
template <typename Real>
NodePtr<Real> channel_norm(const NodePtr<Real>& x, const NodePtr<Real>& gain,
                           const NodePtr<Real>& bias, double eps = 1e-5);

// Inverted dropout: scales kept entries by 1/(1-rate) so the mask
// expectation is the identity. Identity when training is false.
template <typename Real>
NodePtr<Real> dropout(const NodePtr<Real>& x, double rate, Rng& rng, bool training);

// Structure: slicing, concatenation, gathering. All make copies; backward
// scatters adjoints to the source.
template <typename Real> NodePtr<Real> slice(const NodePtr<Real>& x, int64_t start, int64_t len);
template <typename Real> NodePtr<Real> slice_rows(const NodePtr<Real>& x, int64_t r0, int64_t n);
template <typename Real> NodePtr<Real> slice_cols(const NodePtr<Real>& x, int64_t c0, int64_t n);
template <typename Real> NodePtr<Real> concat_rows(const std::vector<NodePtr<Real>>& xs);
template <typename Real> NodePtr<Real> concat_cols(const std::vector<NodePtr<Real>>& xs);
template <typename Real> NodePtr<Real> stack_rows(const std::vector<NodePtr<Real>>& xs);
template <typename Real>
NodePtr<Real> gather_rows(const NodePtr<Real>& x, std::vector<int64_t> idx);
template <typename Real> NodePtr<Real> pick(const NodePtr<Real>& x, int64_t i);  // [N] -> [1]
template <typename Real>
NodePtr<Real> pick_per_row(const NodePtr<Real>& x, std::vector<int64_t> idx);  // [M x N] -> [M]
template <typename Real> NodePtr<Real> reshape(const NodePtr<Real>& x, Shape shape);
template <typename Real> NodePtr<Real> as_row(const NodePtr<Real>& x, int64_t r);  // row r -> [C]

// Convenience: mean over all entries -> [1].
template <typename Real> NodePtr<Real> mean(const NodePtr<Real>& a);

}  // namespace cpcx

#endif  // CPCX_TENSOR_OPS_H_
