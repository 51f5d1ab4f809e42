// tensor/grad_check.h

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

#ifndef CPCX_TENSOR_GRAD_CHECK_H_
#define CPCX_TENSOR_GRAD_CHECK_H_

#include <functional>
#include <string>
#include <vector>

#include "tensor/tensor.h"

namespace cpcx {

struct GradCheckEntry {
  std::string param;
  double max_rel_err = 0;
  int64_t worst_index = -1;
  double analytic = 0;  // at the worst index
  double numeric = 0;
  bool flagged = false;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_err = 0;
  double tolerance = 0;

  bool ok() const {
    for (const auto& e : entries) {
      if (e.flagged) return false;
    }
    return true;
  }
  std::string to_string() const;
};

// Compares reverse-mode adjoints against central finite differences
// (f(p+eps) - f(p-eps)) / (2 eps), rebuilding the graph for every probe.
// Double precision only. The relative error of one entry is
// |analytic - numeric| / max(|analytic|, |numeric|, 1), so tiny gradients
// are compared absolutely. Entries above `tolerance` are flagged.
//
// `build` must construct a fresh scalar graph from the current values of
// `params` each time it is called.
GradCheckReport grad_check(const std::function<NodePtr<double>()>& build,
                           const std::vector<NodePtr<double>>& params, double epsilon = 1e-5,
                           double tolerance = 1e-6);

}  // namespace cpcx

#endif  // CPCX_TENSOR_GRAD_CHECK_H_
