// probe/ctc.cc

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

#include "probe/ctc.h"

#include <cmath>
#include <limits>

#include "base/error.h"

namespace cpcx {

namespace {

template <typename Real>
Real neg_inf() {
  return -std::numeric_limits<Real>::infinity();
}

template <typename Real>
Real log_add(Real a, Real b) {
  if (a == neg_inf<Real>()) return b;
  if (b == neg_inf<Real>()) return a;
  const Real mx = std::max(a, b);
  return mx + std::log(std::exp(a - mx) + std::exp(b - mx));
}

}  // namespace

int64_t ctc_min_frames(const std::vector<int32_t>& labels) {
  int64_t min_u = static_cast<int64_t>(labels.size());
  for (size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] == labels[i - 1]) ++min_u;  // a blank must separate repeats
  }
  return min_u;
}

template <typename Real>
NodePtr<Real> ctc_loss(const NodePtr<Real>& logits, const std::vector<int32_t>& labels) {
  if (logits->shape.size() != 2) {
    throw ShapeError("ctc_loss: logits must be [U x (P+1)], got " + shape_str(logits->shape));
  }
  if (labels.empty()) throw DataError("ctc_loss: empty label sequence");
  const int64_t u_len = logits->shape[0];
  const int64_t n_classes = logits->shape[1];
  for (int32_t l : labels) {
    if (l <= 0 || l >= n_classes) {
      throw DataError("ctc_loss: label " + std::to_string(l) + " outside 1.." +
                      std::to_string(n_classes - 1));
    }
  }
  const int64_t min_u = ctc_min_frames(labels);
  if (u_len < min_u) {
    throw CtcInfeasibleError("ctc_loss: " + std::to_string(u_len) + " frames cannot carry " +
                             std::to_string(labels.size()) + " labels (needs at least " +
                             std::to_string(min_u) + " frames counting repeat separators)");
  }

  auto lp = log_softmax_rows(logits);

  // Blank-augmented target: blank l1 blank l2 ... lL blank.
  const int64_t m = 2 * static_cast<int64_t>(labels.size()) + 1;
  auto lab = [&](int64_t s) -> int32_t {
    return (s % 2 == 0) ? kCtcBlank : labels[static_cast<size_t>(s / 2)];
  };
  auto can_skip = [&](int64_t s) {
    // The s-2 -> s transition exists for label states whose label differs
    // from the one two states back.
    return s >= 2 && s % 2 == 1 && lab(s) != lab(s - 2);
  };

  const Real ninf = neg_inf<Real>();
  std::vector<Real> alpha(static_cast<size_t>(u_len * m), ninf);
  const Real* p = lp->value.data();
  alpha[0] = p[kCtcBlank];
  if (m > 1) alpha[1] = p[lab(1)];
  for (int64_t u = 1; u < u_len; ++u) {
    for (int64_t s = 0; s < m; ++s) {
      Real best = alpha[(u - 1) * m + s];
      if (s >= 1) best = log_add(best, alpha[(u - 1) * m + s - 1]);
      if (can_skip(s)) best = log_add(best, alpha[(u - 1) * m + s - 2]);
      if (best == ninf) continue;
      alpha[u * m + s] = best + p[u * n_classes + lab(s)];
    }
  }
  Real total = log_add(alpha[(u_len - 1) * m + m - 1],
                       m > 1 ? alpha[(u_len - 1) * m + m - 2] : ninf);
  if (total == ninf) {
    throw NumericError("ctc_loss: no feasible alignment path (unexpected)");
  }

  auto out = make_node<Real>({1}, {-total}, lp->requires_grad);
  if (out->requires_grad) {
    out->parents = {lp};
    Node<Real>* o = out.get();
    std::vector<int32_t> labels_copy = labels;
    out->backprop = [o, lp, alpha = std::move(alpha), labels_copy, u_len, m, n_classes,
                     total]() {
      const Real ninf_l = neg_inf<Real>();
      auto lab_l = [&](int64_t s) -> int32_t {
        return (s % 2 == 0) ? kCtcBlank : labels_copy[static_cast<size_t>(s / 2)];
      };
      auto can_skip_l = [&](int64_t s) {
        return s >= 2 && s % 2 == 1 && lab_l(s) != lab_l(s - 2);
      };
      const Real g = o->grad[0];
      const Real* p = lp->value.data();
      Real* gp = lp->grad_data();
      // Adjoints of the DP cells, swept backwards.
      std::vector<Real> adj(static_cast<size_t>(u_len * m), Real(0));
      adj[(u_len - 1) * m + m - 1] =
          alpha[(u_len - 1) * m + m - 1] == ninf_l
              ? Real(0)
              : -g * std::exp(alpha[(u_len - 1) * m + m - 1] - total);
      if (m > 1) {
        adj[(u_len - 1) * m + m - 2] =
            alpha[(u_len - 1) * m + m - 2] == ninf_l
                ? Real(0)
                : -g * std::exp(alpha[(u_len - 1) * m + m - 2] - total);
      }
      for (int64_t u = u_len - 1; u >= 1; --u) {
        for (int64_t s = 0; s < m; ++s) {
          const Real a = adj[u * m + s];
          if (a == Real(0) || alpha[u * m + s] == ninf_l) continue;
          gp[u * n_classes + lab_l(s)] += a;
          // alpha[u][s] = lse_pre + lp[u][lab(s)], so lse_pre recovers from
          // the stored value.
          const Real lse_pre = alpha[u * m + s] - p[u * n_classes + lab_l(s)];
          const Real a0 = alpha[(u - 1) * m + s];
          if (a0 != ninf_l) adj[(u - 1) * m + s] += a * std::exp(a0 - lse_pre);
          if (s >= 1) {
            const Real a1 = alpha[(u - 1) * m + s - 1];
            if (a1 != ninf_l) adj[(u - 1) * m + s - 1] += a * std::exp(a1 - lse_pre);
          }
          if (can_skip_l(s)) {
            const Real a2 = alpha[(u - 1) * m + s - 2];
            if (a2 != ninf_l) adj[(u - 1) * m + s - 2] += a * std::exp(a2 - lse_pre);
          }
        }
      }
      for (int64_t s = 0; s < m && s < 2; ++s) {
        if (adj[s] != Real(0)) gp[lab_l(s)] += adj[s];
      }
    };
  }
  return out;
}

std::vector<int32_t> ctc_greedy_decode(const float* logits, int64_t u, int64_t n_classes) {
  std::vector<int32_t> out;
  int32_t prev = -1;
  for (int64_t t = 0; t < u; ++t) {
    const float* row = logits + t * n_classes;
    int32_t best = 0;
    for (int64_t c = 1; c < n_classes; ++c) {
      if (row[c] > row[best]) best = static_cast<int32_t>(c);
    }
    if (best != prev && best != kCtcBlank) out.push_back(best);
    prev = best;
  }
  return out;
}

int64_t edit_distance(const std::vector<int32_t>& a, const std::vector<int32_t>& b) {
  const size_t n = a.size(), m = b.size();
  std::vector<int64_t> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int64_t>(j);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int64_t>(i);
    for (size_t j = 1; j <= m; ++j) {
      const int64_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double per(const std::vector<int32_t>& hyp, const std::vector<int32_t>& ref) {
  if (ref.empty()) throw DataError("per: empty reference sequence");
  return static_cast<double>(edit_distance(hyp, ref)) / static_cast<double>(ref.size());
}

template NodePtr<float> ctc_loss<float>(const NodePtr<float>&, const std::vector<int32_t>&);
template NodePtr<double> ctc_loss<double>(const NodePtr<double>&, const std::vector<int32_t>&);

}  // namespace cpcx
