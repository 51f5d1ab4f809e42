// train/adam.h

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

#ifndef CPCX_TRAIN_ADAM_H_
#define CPCX_TRAIN_ADAM_H_

#include <cstdint>
#include <vector>

#include "tensor/tensor.h"

namespace cpcx {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename Real>
struct AdamSlot {
  std::vector<Real> m, v;
};

// Standard bias-corrected update of one parameter array in place.
// step_t is 1-based. Non-finite gradients are rejected.
template <typename Real>
void adam_step(Real* values, const Real* grads, int64_t n, AdamSlot<Real>& slot,
               const AdamConfig& cfg, int64_t step_t);

// Optimizer state over a fixed parameter list. Steps consume and then
// clear the parameters' accumulated adjoints.
template <typename Real>
class Adam {
 public:
  Adam(std::vector<NodePtr<Real>> params, AdamConfig cfg);

  void step();
  int64_t step_count() const { return t_; }
  void set_step_count(int64_t t) { t_ = t; }

  const std::vector<NodePtr<Real>>& params() const { return params_; }
  AdamSlot<Real>& slot(size_t i) { return slots_[i]; }
  const AdamSlot<Real>& slot(size_t i) const { return slots_[i]; }

 private:
  std::vector<NodePtr<Real>> params_;
  std::vector<AdamSlot<Real>> slots_;
  AdamConfig cfg_;
  int64_t t_ = 0;
};

// Scales all adjoints so their global L2 norm is at most max_norm.
// Returns the pre-clipping norm.
template <typename Real>
double clip_global_norm(const std::vector<NodePtr<Real>>& params, double max_norm);

}  // namespace cpcx

#endif  // CPCX_TRAIN_ADAM_H_
