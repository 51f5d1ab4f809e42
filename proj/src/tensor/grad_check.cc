// tensor/grad_check.cc

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

#include "tensor/grad_check.h"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace cpcx {

std::string GradCheckReport::to_string() const {
  std::ostringstream ss;
  char buf[256];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof(buf), "%-32s max_rel_err=%.3e (analytic=% .6e numeric=% .6e)%s",
                  e.param.c_str(), e.max_rel_err, e.analytic, e.numeric,
                  e.flagged ? "  FLAGGED" : "");
    ss << buf << "\n";
  }
  std::snprintf(buf, sizeof(buf), "overall max_rel_err=%.3e tolerance=%.1e -> %s", max_rel_err,
                tolerance, ok() ? "ok" : "FAILED");
  ss << buf;
  return ss.str();
}

GradCheckReport grad_check(const std::function<NodePtr<double>()>& build,
                           const std::vector<NodePtr<double>>& params, double epsilon,
                           double tolerance) {
  GradCheckReport report;
  report.tolerance = tolerance;

  // Analytic pass.
  for (const auto& p : params) p->zero_grad();
  NodePtr<double> root = build();
  if (root->size() != 1) {
    throw ShapeError("grad_check: objective must be scalar, got " + shape_str(root->shape));
  }
  backward(root);
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) {
    p->grad_data();  // make sure untouched parameters read as zero
    analytic.push_back(p->grad);
    p->zero_grad();
  }

  for (size_t pi = 0; pi < params.size(); ++pi) {
    const NodePtr<double>& p = params[pi];
    GradCheckEntry entry;
    entry.param = p->name.empty() ? ("param" + std::to_string(pi)) : p->name;
    for (int64_t i = 0; i < p->size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + epsilon;
      const double f_plus = build()->value[0];
      p->value[i] = saved - epsilon;
      const double f_minus = build()->value[0];
      p->value[i] = saved;
      const double numeric = (f_plus - f_minus) / (2 * epsilon);
      const double a = analytic[pi][i];
      const double rel =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1.0});
      if (rel > entry.max_rel_err) {
        entry.max_rel_err = rel;
        entry.worst_index = i;
        entry.analytic = a;
        entry.numeric = numeric;
      }
    }
    entry.flagged = entry.max_rel_err > tolerance;
    report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace cpcx
