// train/adam.cc

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

#include "train/adam.h"

#include <cmath>

#include "base/error.h"

namespace cpcx {

template <typename Real>
void adam_step(Real* values, const Real* grads, int64_t n, AdamSlot<Real>& slot,
               const AdamConfig& cfg, int64_t step_t) {
  if (slot.m.size() != static_cast<size_t>(n)) slot.m.assign(static_cast<size_t>(n), Real(0));
  if (slot.v.size() != static_cast<size_t>(n)) slot.v.assign(static_cast<size_t>(n), Real(0));
  for (int64_t i = 0; i < n; ++i) {
    if (!std::isfinite(static_cast<double>(grads[i]))) {
      throw NumericError("adam: non-finite gradient at index " + std::to_string(i));
    }
  }
  const double b1 = cfg.beta1, b2 = cfg.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step_t));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step_t));
  for (int64_t i = 0; i < n; ++i) {
    const double g = static_cast<double>(grads[i]);
    const double m = b1 * static_cast<double>(slot.m[i]) + (1.0 - b1) * g;
    const double v = b2 * static_cast<double>(slot.v[i]) + (1.0 - b2) * g * g;
    slot.m[i] = static_cast<Real>(m);
    slot.v[i] = static_cast<Real>(v);
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    values[i] = static_cast<Real>(static_cast<double>(values[i]) -
                                  cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps));
  }
}

template <typename Real>
Adam<Real>::Adam(std::vector<NodePtr<Real>> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  slots_.resize(params_.size());
  for (size_t i = 0; i < params_.size(); ++i) {
    const size_t n = params_[i]->value.size();
    slots_[i].m.assign(n, Real(0));
    slots_[i].v.assign(n, Real(0));
  }
}

template <typename Real>
void Adam<Real>::step() {
  ++t_;
  for (size_t i = 0; i < params_.size(); ++i) {
    NodePtr<Real>& p = params_[i];
    adam_step(p->value.data(), p->grad_data(), p->size(), slots_[i], cfg_, t_);
    p->zero_grad();
  }
}

template <typename Real>
double clip_global_norm(const std::vector<NodePtr<Real>>& params, double max_norm) {
  double sq = 0;
  for (const auto& p : params) {
    const Real* g = p->grad_data();
    for (int64_t i = 0; i < p->size(); ++i) {
      sq += static_cast<double>(g[i]) * static_cast<double>(g[i]);
    }
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0) {
    const double s = max_norm / norm;
    for (const auto& p : params) {
      Real* g = p->grad_data();
      for (int64_t i = 0; i < p->size(); ++i) g[i] = static_cast<Real>(g[i] * s);
    }
  }
  return norm;
}

template void adam_step<float>(float*, const float*, int64_t, AdamSlot<float>&,
                               const AdamConfig&, int64_t);
template void adam_step<double>(double*, const double*, int64_t, AdamSlot<double>&,
                                const AdamConfig&, int64_t);
template class Adam<float>;
template class Adam<double>;
template double clip_global_norm<float>(const std::vector<NodePtr<float>>&, double);
template double clip_global_norm<double>(const std::vector<NodePtr<double>>&, double);

}  // namespace cpcx
