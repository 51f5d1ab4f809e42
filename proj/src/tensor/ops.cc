// tensor/ops.cc

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

#include "tensor/ops.h"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace cpcx {

namespace {

template <typename Real>
bool any_requires_grad(const std::vector<NodePtr<Real>>& parents) {
  for (const auto& p : parents) {
    if (p && p->requires_grad) return true;
  }
  return false;
}

template <typename Real>
void check_same_shape(const NodePtr<Real>& a, const NodePtr<Real>& b, const char* op) {
  if (!same_shape(a->shape, b->shape)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a->shape) + " vs " +
                     shape_str(b->shape));
  }
}

template <typename Real>
bool is_scalar(const NodePtr<Real>& a) {
  return a->size() == 1;
}

}  // namespace

int64_t conv1d_out_len(int64_t t_in, int64_t k, int64_t stride, int64_t pad) {
  return (t_in + 2 * pad - k) / stride + 1;
}

// ---------------------------------------------------------------------------
// Elementwise
// ---------------------------------------------------------------------------

template <typename Real>
NodePtr<Real> add(const NodePtr<Real>& a, const NodePtr<Real>& b) {
  const bool sa = is_scalar(a), sb = is_scalar(b);
  if (!sa && !sb) check_same_shape(a, b, "add");
  const NodePtr<Real>& big = sa && !sb ? b : a;
  const int64_t n = big->size();
  std::vector<Real> v(static_cast<size_t>(n));
  if (sa && !sb) {
    const Real av = a->value[0];
    for (int64_t i = 0; i < n; ++i) v[i] = av + b->value[i];
  } else if (sb && !sa) {
    const Real bv = b->value[0];
    for (int64_t i = 0; i < n; ++i) v[i] = a->value[i] + bv;
  } else {
    for (int64_t i = 0; i < n; ++i) v[i] = a->value[i] + b->value[i];
  }
  auto out = make_node<Real>(big->shape, std::move(v), any_requires_grad<Real>({a, b}));
  if (out->requires_grad) {
    out->parents = {a, b};
    Node<Real>* o = out.get();
    out->backprop = [o, a, b, sa, sb, n]() {
      const Real* g = o->grad.data();
      if (a->requires_grad) {
        if (sa && !sb) {
          Real s = 0;
          for (int64_t i = 0; i < n; ++i) s += g[i];
          a->grad_data()[0] += s;
        } else {
          a->add_grad(g, n);
        }
      }
      if (b->requires_grad) {
        if (sb && !sa) {
          Real s = 0;
          for (int64_t i = 0; i < n; ++i) s += g[i];
          b->grad_data()[0] += s;
        } else {
          b->add_grad(g, n);
        }
      }
    };
  }
  return out;
}

template <typename Real>
NodePtr<Real> mul(const NodePtr<Real>& a, const NodePtr<Real>& b) {
  const bool sa = is_scalar(a), sb = is_scalar(b);
  if (!sa && !sb) check_same_shape(a, b, "mul");
  const NodePtr<Real>& big = sa && !sb ? b : a;
  const int64_t n = big->size();
  std::vector<Real> v(static_cast<size_t>(n));
  if (sa && !sb) {
    const Real av = a->value[0];
    for (int64_t i = 0; i < n; ++i) v[i] = av * b->value[i];
  } else if (sb && !sa) {
    const Real bv = b->value[0];
    for (int64_t i = 0; i < n; ++i) v[i] = a->value[i] * bv;
  } else {
    for (int64_t i = 0; i < n; ++i) v[i] = a->value[i] * b->value[i];
  }
  auto out = make_node<Real>(big->shape, std::move(v), any_requires_grad<Real>({a, b}));
  if (out->requires_grad) {
    out->parents = {a, b};
    Node<Real>* o = out.get();
    out->backprop = [o, a, b, sa, sb, n]() {
      const Real* g = o->grad.data();
      if (a->requires_grad) {
        if (sa && !sb) {
          Real s = 0;
          for (int64_t i = 0; i < n; ++i) s += g[i] * b->value[i];
          a->grad_data()[0] += s;
        } else if (sb && !sa) {
          Real* ga = a->grad_data();
          const Real bv = b->value[0];
          for (int64_t i = 0; i < n; ++i) ga[i] += g[i] * bv;
        } else {
          Real* ga = a->grad_data();
          for (int64_t i = 0; i < n; ++i) ga[i] += g[i] * b->value[i];
        }
      }
      if (b->requires_grad) {
        if (sb && !sa) {
          Real s = 0;
          for (int64_t i = 0; i < n; ++i) s += g[i] * a->value[i];
          b->grad_data()[0] += s;
        } else if (sa && !sb) {
          Real* gb = b->grad_data();
          const Real av = a->value[0];
          for (int64_t i = 0; i < n; ++i) gb[i] += g[i] * av;
        } else {
          Real* gb = b->grad_data();
          for (int64_t i = 0; i < n; ++i) gb[i] += g[i] * a->value[i];
        }
      }
    };
  }
  return out;
}

template <typename Real>
NodePtr<Real> scale(const NodePtr<Real>& a, double c) {
  const int64_t n = a->size();
  const Real cc = static_cast<Real>(c);
  std::vector<Real> v(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) v[i] = a->value[i] * cc;
  auto out = make_node<Real>(a->shape, std::move(v), a->requires_grad);
  if (out->requires_grad) {
    out->parents = {a};
    Node<Real>* o = out.get();
    out->backprop = [o, a, cc, n]() {
      Real* ga = a->grad_data();
      const Real* g = o->grad.data();
      for (int64_t i = 0; i < n; ++i) ga[i] += g[i] * cc;
    };
  }
  return out;
}

namespace {

template <typename Real, typename FwdFn, typename DerivFromOutFn>
NodePtr<Real> unary_pointwise(const NodePtr<Real>& a, FwdFn fwd, DerivFromOutFn dydx) {
  const int64_t n = a->size();
  std::vector<Real> v(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) v[i] = fwd(a->value[i]);
  auto out = make_node<Real>(a->shape, std::move(v), a->requires_grad);
  if (out->requires_grad) {
    out->parents = {a};
    Node<Real>* o = out.get();
    out->backprop = [o, a, dydx, n]() {
      Real* ga = a->grad_data();
      const Real* g = o->grad.data();
      for (int64_t i = 0; i < n; ++i) ga[i] += g[i] * dydx(a->value[i], o->value[i]);
    };
  }
  return out;
}

}  // namespace

template <typename Real>
NodePtr<Real> vtanh(const NodePtr<Real>& a) {
  return unary_pointwise<Real>(
      a, [](Real x) { return std::tanh(x); },
      [](Real, Real y) { return Real(1) - y * y; });
}

template <typename Real>
NodePtr<Real> sigmoid(const NodePtr<Real>& a) {
  return unary_pointwise<Real>(
      a,
      [](Real x) {
        // Split on sign to avoid overflow in exp.
        return x >= 0 ? Real(1) / (Real(1) + std::exp(-x))
                      : std::exp(x) / (Real(1) + std::exp(x));
      },
      [](Real, Real y) { return y * (Real(1) - y); });
}

template <typename Real>
NodePtr<Real> relu(const NodePtr<Real>& a) {
  return unary_pointwise<Real>(
      a, [](Real x) { return x > 0 ? x : Real(0); },
      [](Real x, Real) { return x > 0 ? Real(1) : Real(0); });
}

template <typename Real>
NodePtr<Real> add_n(const std::vector<NodePtr<Real>>& xs) {
  if (xs.empty()) throw Error("add_n: empty input list");
  for (const auto& x : xs) check_same_shape(xs[0], x, "add_n");
  const int64_t n = xs[0]->size();
  std::vector<Real> v(static_cast<size_t>(n), Real(0));
  for (const auto& x : xs) {
    for (int64_t i = 0; i < n; ++i) v[i] += x->value[i];
  }
  auto out = make_node<Real>(xs[0]->shape, std::move(v), any_requires_grad(xs));
  if (out->requires_grad) {
    out->parents = xs;
    Node<Real>* o = out.get();
    out->backprop = [o, n]() {
      for (auto& p : o->parents) {
        if (p->requires_grad) p->add_grad(o->grad.data(), n);
      }
    };
  }
  return out;
}

template <typename Real>
NodePtr<Real> sum(const NodePtr<Real>& a) {
  const int64_t n = a->size();
  Real s = 0;
  for (int64_t i = 0; i < n; ++i) s += a->value[i];
  auto out = make_node<Real>({1}, {s}, a->requires_grad);
  if (out->requires_grad) {
    out->parents = {a};
    Node<Real>* o = out.get();
    out->backprop = [o, a, n]() {
      const Real g = o->grad[0];
      Real* ga = a->grad_data();
      for (int64_t i = 0; i < n; ++i) ga[i] += g;
    };
  }
  return out;
}

template <typename Real>
NodePtr<Real> mean(const NodePtr<Real>& a) {
  return scale(sum(a), 1.0 / static_cast<double>(a->size()));
}

// ---------------------------------------------------------------------------
// Linear algebra
// ---------------------------------------------------------------------------

template <typename Real>
NodePtr<Real> matmul(const NodePtr<Real>& a, const NodePtr<Real>& b) {
  if (a->shape.size() != 2 || b->shape.size() != 2) {
    throw ShapeError("matmul: expected 2-D operands, got " + shape_str(a->shape) + " and " +
                     shape_str(b->shape));
  }
  const int64_t m = a->shape[0], k = a->shape[1];
  const int64_t k2 = b->shape[0], n = b->shape[1];
  if (k != k2) {
    throw ShapeError("matmul: inner dimensions disagree, " + shape_str(a->shape) + " x " +
                     shape_str(b->shape));
  }
  std::vector<Real> v(static_cast<size_t>(m * n), Real(0));
  {
    const Real* pa = a->value.data();
    const Real* pb = b->value.data();
    for (int64_t i = 0; i < m; ++i) {
      Real* vo = v.data() + i * n;
      for (int64_t kk = 0; kk < k; ++kk) {
        const Real av = pa[i * k + kk];
        const Real* br = pb + kk * n;
        for (int64_t j = 0; j < n; ++j) vo[j] += av * br[j];
      }
    }
  }
  auto out = make_node<Real>({m, n}, std::move(v), any_requires_grad<Real>({a, b}));
  if (out->requires_grad) {
    out->parents = {a, b};
    Node<Real>* o = out.get();
    out->backprop = [o, a, b, m, k, n]() {
      const Real* g = o->grad.data();
      if (a->requires_grad) {
        // da = g b^T
        Real* ga = a->grad_data();
        const Real* pb = b->value.data();
        for (int64_t i = 0; i < m; ++i) {
          for (int64_t kk = 0; kk < k; ++kk) {
            Real s = 0;
            const Real* gr = g + i * n;
            const Real* br = pb + kk * n;
            for (int64_t j = 0; j < n; ++j) s += gr[j] * br[j];
            ga[i * k + kk] += s;
          }
        }
      }
      if (b->requires_grad) {
        // db = a^T g
        Real* gb = b->grad_data();
        const Real* pa = a->value.data();
        for (int64_t i = 0; i < m; ++i) {
          const Real* gr = g + i * n;
          for (int64_t kk = 0; kk < k; ++kk) {
            const Real av = pa[i * k + kk];
            Real* br = gb + kk * n;
            for (int64_t j = 0; j < n; ++j) br[j] += av * gr[j];
          }
        }
      }
    };
  }
  return out;
}

template <typename Real>
NodePtr<Real> matvec(const NodePtr<Real>& a, const NodePtr<Real>& x) {
  if (a->shape.size() != 2 || x->shape.size() != 1) {
    throw ShapeError("matvec: expected [M x K] and [K], got " + shape_str(a->shape) + " and " +
                     shape_str(x->shape));
  }
  const int64_t m = a->shape[0], k = a->shape[1];
  if (x->shape[0] != k) {
    throw ShapeError("matvec: inner dimensions disagree, " + shape_str(a->shape) + " x " +
                     shape_str(x->shape));
  }
  std::vector<Real> v(static_cast<size_t>(m));
  for (int64_t i = 0; i < m; ++i) {
    const Real* ar = a->value.data() + i * k;
    Real s = 0;
    for (int64_t j = 0; j < k; ++j) s += ar[j] * x->value[j];
    v[i] = s;
  }
  auto out = make_node<Real>({m}, std::move(v), any_requires_grad<Real>({a, x}));
  if (out->requires_grad) {
    out->parents = {a, x};
    Node<Real>* o = out.get();
    out->backprop = [o, a, x, m, k]() {
      const Real* g = o->grad.data();
      if (a->requires_grad) {
        Real* ga = a->grad_data();
        for (int64_t i = 0; i < m; ++i) {
          const Real gi = g[i];
          Real* gr = ga + i * k;
          for (int64_t j = 0; j < k; ++j) gr[j] += gi * x->value[j];
        }
      }
      if (x->requires_grad) {
        Real* gx = x->grad_data();
        for (int64_t i = 0; i < m; ++i) {
          const Real gi = g[i];
          const Real* ar = a->value.data() + i * k;
          for (int64_t j = 0; j < k; ++j) gx[j] += gi * ar[j];
        }
      }
    };
  }
  return out;
}

template <typename Real>
NodePtr<Real> transpose(const NodePtr<Real>& a) {
  if (a->shape.size() != 2) {
    throw ShapeError("transpose: expected 2-D, got " + shape_str(a->shape));
  }
  const int64_t m = a->shape[0], n = a->shape[1];
  std::vector<Real> v(static_cast<size_t>(m * n));
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) v[j * m + i] = a->value[i * n + j];
  }
  auto out = make_node<Real>({n, m}, std::move(v), a->requires_grad);
  if (out->requires_grad) {
    out->parents = {a};
    Node<Real>* o = out.get();
    out->backprop = [o, a, m, n]() {
      Real* ga = a->grad_data();
      const Real* g = o->grad.data();
      for (int64_t i = 0; i < m; ++i) {
        for (int64_t j = 0; j < n; ++j) ga[i * n + j] += g[j * m + i];
      }
    };
  }
  return out;
}

template <typename Real>
NodePtr<Real> linear(const NodePtr<Real>& x, const NodePtr<Real>& w, const NodePtr<Real>& b) {
  if (w->shape.size() != 2) {
    throw ShapeError("linear: weight must be 2-D, got " + shape_str(w->shape));
  }
  const int64_t cout = w->shape[0], cin = w->shape[1];
  const bool vec = x->shape.size() == 1;
  if ((vec && x->shape[0] != cin) || (!vec && (x->shape.size() != 2 || x->shape[1] != cin))) {
    throw ShapeError("linear: input " + shape_str(x->shape) + " incompatible with weight " +
                     shape_str(w->shape));
  }
  if (b && (b->shape.size() != 1 || b->shape[0] != cout)) {
    throw ShapeError("linear: bias " + shape_str(b->shape) + " incompatible with weight " +
                     shape_str(w->shape));
  }
  const int64_t t = vec ? 1 : x->shape[0];
  std::vector<Real> v(static_cast<size_t>(t * cout));
  for (int64_t r = 0; r < t; ++r) {
    const Real* xr = x->value.data() + r * cin;
    Real* vr = v.data() + r * cout;
    for (int64_t o = 0; o < cout; ++o) {
      const Real* wr = w->value.data() + o * cin;
      Real s = b ? b->value[o] : Real(0);
      for (int64_t j = 0; j < cin; ++j) s += wr[j] * xr[j];
      vr[o] = s;
    }
  }
  Shape out_shape = vec ? Shape{cout} : Shape{t, cout};
  std::vector<NodePtr<Real>> parents = {x, w};
  if (b) parents.push_back(b);
  auto out = make_node<Real>(std::move(out_shape), std::move(v), any_requires_grad(parents));
  if (out->requires_grad) {
    out->parents = parents;
    Node<Real>* o = out.get();
    NodePtr<Real> bb = b;
    out->backprop = [o, x, w, bb, t, cin, cout]() {
      const Real* g = o->grad.data();
      if (x->requires_grad) {
        Real* gx = x->grad_data();
        for (int64_t r = 0; r < t; ++r) {
          const Real* gr = g + r * cout;
          Real* xr = gx + r * cin;
          for (int64_t oo = 0; oo < cout; ++oo) {
            const Real gv = gr[oo];
            const Real* wr = w->value.data() + oo * cin;
            for (int64_t j = 0; j < cin; ++j) xr[j] += gv * wr[j];
          }
        }
      }
      if (w->requires_grad) {
        Real* gw = w->grad_data();
        for (int64_t r = 0; r < t; ++r) {
          const Real* gr = g + r * cout;
          const Real* xr = x->value.data() + r * cin;
          for (int64_t oo = 0; oo < cout; ++oo) {
            const Real gv = gr[oo];
            Real* wr = gw + oo * cin;
            for (int64_t j = 0; j < cin; ++j) wr[j] += gv * xr[j];
          }
        }
      }
      if (bb && bb->requires_grad) {
        Real* gb = bb->grad_data();
        for (int64_t r = 0; r < t; ++r) {
          const Real* gr = g + r * cout;
          for (int64_t oo = 0; oo < cout; ++oo) gb[oo] += gr[oo];
        }
      }
    };
  }
  return out;
}

// ---------------------------------------------------------------------------
// Softmax family
// ---------------------------------------------------------------------------

namespace {

// One row of log-softmax into dst, returning nothing. n >= 1.
template <typename Real>
void log_softmax_row(const Real* src, Real* dst, int64_t n) {
  Real mx = src[0];
  for (int64_t i = 1; i < n; ++i) mx = std::max(mx, src[i]);
  Real se = 0;
  for (int64_t i = 0; i < n; ++i) se += std::exp(src[i] - mx);
  const Real lse = mx + std::log(se);
  for (int64_t i = 0; i < n; ++i) dst[i] = src[i] - lse;
}

// Adjoint of one log-softmax row: gx = g - softmax * sum(g).
template <typename Real>
void log_softmax_row_backward(const Real* y, const Real* g, Real* gx, int64_t n) {
  Real gsum = 0;
  for (int64_t i = 0; i < n; ++i) gsum += g[i];
  for (int64_t i = 0; i < n; ++i) gx[i] += g[i] - std::exp(y[i]) * gsum;
}

}  // namespace

template <typename Real>
NodePtr<Real> log_softmax(const NodePtr<Real>& x) {
  if (x->shape.size() != 1 || x->shape[0] < 1) {
    throw ShapeError("log_softmax: expected non-empty 1-D input, got " + shape_str(x->shape));
  }
  const int64_t n = x->shape[0];
  std::vector<Real> v(static_cast<size_t>(n));
  log_softmax_row(x->value.data(), v.data(), n);
  auto out = make_node<Real>(x->shape, std::move(v), x->requires_grad);
  if (out->requires_grad) {
    out->parents = {x};
    Node<Real>* o = out.get();
    out->backprop = [o, x, n]() {
      log_softmax_row_backward(o->value.data(), o->grad.data(), x->grad_data(), n);
    };
  }
  return out;
}

template <typename Real>
NodePtr<Real> log_softmax_rows(const NodePtr<Real>& x) {
  if (x->shape.size() != 2) {
    throw ShapeError("log_softmax_rows: expected 2-D input, got " + shape_str(x->shape));
  }
  const int64_t m = x->shape[0], n = x->shape[1];
  std::vector<Real> v(static_cast<size_t>(m * n));
  for (int64_t r = 0; r < m; ++r) log_softmax_row(x->value.data() + r * n, v.data() + r * n, n);
  auto out = make_node<Real>(x->shape, std::move(v), x->requires_grad);
  if (out->requires_grad) {
    out->parents = {x};
    Node<Real>* o = out.get();
    out->backprop = [o, x, m, n]() {
      Real* gx = x->grad_data();
      for (int64_t r = 0; r < m; ++r) {
        log_softmax_row_backward(o->value.data() + r * n, o->grad.data() + r * n, gx + r * n, n);
      }
    };
  }
  return out;
}

template <typename Real>
NodePtr<Real> causal_softmax_rows(const NodePtr<Real>& x) {
  if (x->shape.size() != 2 || x->shape[0] != x->shape[1]) {
    throw ShapeError("causal_softmax_rows: expected square 2-D input, got " +
                     shape_str(x->shape));
  }
  const int64_t t = x->shape[0];
  std::vector<Real> v(static_cast<size_t>(t * t), Real(0));
  for (int64_t i = 0; i < t; ++i) {
    const Real* sr = x->value.data() + i * t;
    Real* vr = v.data() + i * t;
    Real mx = sr[0];
    for (int64_t j = 1; j <= i; ++j) mx = std::max(mx, sr[j]);
    Real se = 0;
    for (int64_t j = 0; j <= i; ++j) {
      vr[j] = std::exp(sr[j] - mx);
      se += vr[j];
    }
    for (int64_t j = 0; j <= i; ++j) vr[j] /= se;
  }
  auto out = make_node<Real>(x->shape, std::move(v), x->requires_grad);
  if (out->requires_grad) {
    out->parents = {x};
    Node<Real>* o = out.get();
    out->backprop = [o, x, t]() {
      Real* gx = x->grad_data();
      for (int64_t i = 0; i < t; ++i) {
        const Real* y = o->value.data() + i * t;
        const Real* g = o->grad.data() + i * t;
        Real dot = 0;
        for (int64_t j = 0; j <= i; ++j) dot += g[j] * y[j];
        Real* gr = gx + i * t;
        for (int64_t j = 0; j <= i; ++j) gr[j] += y[j] * (g[j] - dot);
      }
    };
  }
  return out;
}

// ---------------------------------------------------------------------------
// Convolution
// ---------------------------------------------------------------------------

template <typename Real>
NodePtr<Real> conv1d(const NodePtr<Real>& input, const NodePtr<Real>& kernel,
                     const NodePtr<Real>& bias, int64_t stride, int64_t pad) {
  if (input->shape.size() != 2) {
    throw ShapeError("conv1d: input must be [T_in x C_in], got " + shape_str(input->shape));
  }
  if (kernel->shape.size() != 3) {
    throw ShapeError("conv1d: kernel must be [C_out x C_in x k], got " +
                     shape_str(kernel->shape));
  }
  const int64_t t_in = input->shape[0], c_in = input->shape[1];
  const int64_t c_out = kernel->shape[0], kc_in = kernel->shape[1], kw = kernel->shape[2];
  if (kc_in != c_in) {
    throw ShapeError("conv1d: kernel C_in (" + std::to_string(kc_in) +
                     ") does not match input C_in (" + std::to_string(c_in) + ")");
  }
  if (stride < 1) throw ShapeError("conv1d: stride must be positive");
  if (pad < 0) throw ShapeError("conv1d: pad must be non-negative");
  if (kw > t_in + 2 * pad) {
    throw ShapeError("conv1d: kernel width " + std::to_string(kw) +
                     " exceeds padded input length " + std::to_string(t_in + 2 * pad));
  }
  if (bias && (bias->shape.size() != 1 || bias->shape[0] != c_out)) {
    throw ShapeError("conv1d: bias " + shape_str(bias->shape) + " must be [C_out]");
  }
  const int64_t t_out = conv1d_out_len(t_in, kw, stride, pad);

  // Tap-major copy of the kernel, kt[j][co][ci], so the inner products below
  // run over contiguous memory.
  std::vector<Real> kt(static_cast<size_t>(kw * c_out * c_in));
  for (int64_t co = 0; co < c_out; ++co) {
    for (int64_t ci = 0; ci < c_in; ++ci) {
      for (int64_t j = 0; j < kw; ++j) {
        kt[(j * c_out + co) * c_in + ci] = kernel->value[(co * c_in + ci) * kw + j];
      }
    }
  }

  std::vector<Real> v(static_cast<size_t>(t_out * c_out), Real(0));
  const Real* px = input->value.data();
  for (int64_t t = 0; t < t_out; ++t) {
    Real* vr = v.data() + t * c_out;
    if (bias) {
      for (int64_t co = 0; co < c_out; ++co) vr[co] = bias->value[co];
    }
    const int64_t t0 = t * stride - pad;
    const int64_t jlo = std::max<int64_t>(0, -t0);
    const int64_t jhi = std::min<int64_t>(kw, t_in - t0);
    for (int64_t j = jlo; j < jhi; ++j) {
      const Real* xr = px + (t0 + j) * c_in;
      const Real* kj = kt.data() + j * c_out * c_in;
      for (int64_t co = 0; co < c_out; ++co) {
        const Real* krow = kj + co * c_in;
        Real s = 0;
        for (int64_t ci = 0; ci < c_in; ++ci) s += krow[ci] * xr[ci];
        vr[co] += s;
      }
    }
  }

  std::vector<NodePtr<Real>> parents = {input, kernel};
  if (bias) parents.push_back(bias);
  auto out = make_node<Real>({t_out, c_out}, std::move(v), any_requires_grad(parents));
  if (out->requires_grad) {
    out->parents = parents;
    Node<Real>* o = out.get();
    NodePtr<Real> bb = bias;
    out->backprop = [o, input, kernel, bb, kt = std::move(kt), t_in, c_in, c_out, kw, stride,
                     pad, t_out]() {
      const Real* g = o->grad.data();
      if (input->requires_grad) {
        Real* gx = input->grad_data();
        for (int64_t t = 0; t < t_out; ++t) {
          const Real* gr = g + t * c_out;
          const int64_t t0 = t * stride - pad;
          const int64_t jlo = std::max<int64_t>(0, -t0);
          const int64_t jhi = std::min<int64_t>(kw, t_in - t0);
          for (int64_t j = jlo; j < jhi; ++j) {
            Real* xr = gx + (t0 + j) * c_in;
            const Real* kj = kt.data() + j * c_out * c_in;
            for (int64_t co = 0; co < c_out; ++co) {
              const Real gv = gr[co];
              const Real* krow = kj + co * c_in;
              for (int64_t ci = 0; ci < c_in; ++ci) xr[ci] += gv * krow[ci];
            }
          }
        }
      }
      if (kernel->requires_grad) {
        // Accumulate tap-major, then scatter into the kernel layout.
        std::vector<Real> gkt(static_cast<size_t>(kw * c_out * c_in), Real(0));
        const Real* px = input->value.data();
        for (int64_t t = 0; t < t_out; ++t) {
          const Real* gr = g + t * c_out;
          const int64_t t0 = t * stride - pad;
          const int64_t jlo = std::max<int64_t>(0, -t0);
          const int64_t jhi = std::min<int64_t>(kw, t_in - t0);
          for (int64_t j = jlo; j < jhi; ++j) {
            const Real* xr = px + (t0 + j) * c_in;
            Real* kj = gkt.data() + j * c_out * c_in;
            for (int64_t co = 0; co < c_out; ++co) {
              const Real gv = gr[co];
              Real* krow = kj + co * c_in;
              for (int64_t ci = 0; ci < c_in; ++ci) krow[ci] += gv * xr[ci];
            }
          }
        }
        Real* gk = kernel->grad_data();
        for (int64_t co = 0; co < c_out; ++co) {
          for (int64_t ci = 0; ci < c_in; ++ci) {
            for (int64_t j = 0; j < kw; ++j) {
              gk[(co * c_in + ci) * kw + j] += gkt[(j * c_out + co) * c_in + ci];
            }
          }
        }
      }
      if (bb && bb->requires_grad) {
        Real* gb = bb->grad_data();
        for (int64_t t = 0; t < t_out; ++t) {
          const Real* gr = g + t * c_out;
          for (int64_t co = 0; co < c_out; ++co) gb[co] += gr[co];
        }
      }
    };
  }
  return out;
}

// ---------------------------------------------------------------------------
// Normalization, dropout
// ---------------------------------------------------------------------------

template <typename Real>
NodePtr<Real> channel_norm(const NodePtr<Real>& x, const NodePtr<Real>& gain,
                           const NodePtr<Real>& bias, double eps) {
  if (x->shape.size() != 2) {
    throw ShapeError("channel_norm: expected [T x C], got " + shape_str(x->shape));
  }
  const int64_t t = x->shape[0], c = x->shape[1];
  if (c < 2) {
    throw ShapeError("channel_norm: needs C >= 2 channels (zero-variance degenerate), got C=" +
                     std::to_string(c));
  }
  if (gain->shape != Shape{c} || bias->shape != Shape{c}) {
    throw ShapeError("channel_norm: gain " + shape_str(gain->shape) + " / bias " +
                     shape_str(bias->shape) + " must be [C]=" + std::to_string(c));
  }
  std::vector<Real> v(static_cast<size_t>(t * c));
  std::vector<Real> xhat(static_cast<size_t>(t * c));
  std::vector<Real> inv_std(static_cast<size_t>(t));
  const Real repc = Real(1) / static_cast<Real>(c);
  for (int64_t r = 0; r < t; ++r) {
    const Real* xr = x->value.data() + r * c;
    Real mu = 0;
    for (int64_t i = 0; i < c; ++i) mu += xr[i];
    mu *= repc;
    Real var = 0;
    for (int64_t i = 0; i < c; ++i) {
      const Real d = xr[i] - mu;
      var += d * d;
    }
    var *= repc;
    const Real is = Real(1) / std::sqrt(var + static_cast<Real>(eps));
    inv_std[r] = is;
    Real* hr = xhat.data() + r * c;
    Real* vr = v.data() + r * c;
    for (int64_t i = 0; i < c; ++i) {
      hr[i] = (xr[i] - mu) * is;
      vr[i] = gain->value[i] * hr[i] + bias->value[i];
    }
  }
  auto out =
      make_node<Real>(x->shape, std::move(v), any_requires_grad<Real>({x, gain, bias}));
  if (out->requires_grad) {
    out->parents = {x, gain, bias};
    Node<Real>* o = out.get();
    out->backprop = [o, x, gain, bias, xhat = std::move(xhat), inv_std = std::move(inv_std), t,
                     c, repc]() {
      const Real* g = o->grad.data();
      if (gain->requires_grad) {
        Real* gg = gain->grad_data();
        for (int64_t r = 0; r < t; ++r) {
          const Real* gr = g + r * c;
          const Real* hr = xhat.data() + r * c;
          for (int64_t i = 0; i < c; ++i) gg[i] += gr[i] * hr[i];
        }
      }
      if (bias->requires_grad) {
        Real* gb = bias->grad_data();
        for (int64_t r = 0; r < t; ++r) {
          const Real* gr = g + r * c;
          for (int64_t i = 0; i < c; ++i) gb[i] += gr[i];
        }
      }
      if (x->requires_grad) {
        Real* gx = x->grad_data();
        for (int64_t r = 0; r < t; ++r) {
          const Real* gr = g + r * c;
          const Real* hr = xhat.data() + r * c;
          Real h_mean = 0, hx_mean = 0;
          for (int64_t i = 0; i < c; ++i) {
            const Real hi = gr[i] * gain->value[i];
            h_mean += hi;
            hx_mean += hi * hr[i];
          }
          h_mean *= repc;
          hx_mean *= repc;
          Real* xr = gx + r * c;
          for (int64_t i = 0; i < c; ++i) {
            const Real hi = gr[i] * gain->value[i];
            xr[i] += inv_std[r] * (hi - h_mean - hr[i] * hx_mean);
          }
        }
      }
    };
  }
  return out;
}

template <typename Real>
NodePtr<Real> dropout(const NodePtr<Real>& x, double rate, Rng& rng, bool training) {
  if (rate < 0 || rate >= 1) throw Error("dropout: rate must lie in [0, 1)");
  if (!training || rate == 0) return x;
  const int64_t n = x->size();
  const Real inv_keep = static_cast<Real>(1.0 / (1.0 - rate));
  std::vector<uint8_t> mask(static_cast<size_t>(n));
  std::vector<Real> v(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    mask[i] = rng.uniform() >= rate ? 1 : 0;
    v[i] = mask[i] ? x->value[i] * inv_keep : Real(0);
  }
  auto out = make_node<Real>(x->shape, std::move(v), x->requires_grad);
  if (out->requires_grad) {
    out->parents = {x};
    Node<Real>* o = out.get();
    out->backprop = [o, x, mask = std::move(mask), inv_keep, n]() {
      Real* gx = x->grad_data();
      const Real* g = o->grad.data();
      for (int64_t i = 0; i < n; ++i) {
        if (mask[i]) gx[i] += g[i] * inv_keep;
      }
    };
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structural ops
// ---------------------------------------------------------------------------

template <typename Real>
NodePtr<Real> slice(const NodePtr<Real>& x, int64_t start, int64_t len) {
  if (x->shape.size() != 1) throw ShapeError("slice: expected 1-D, got " + shape_str(x->shape));
  if (start < 0 || len < 0 || start + len > x->shape[0]) {
    throw ShapeError("slice: range [" + std::to_string(start) + ", " +
                     std::to_string(start + len) + ") out of bounds for " + shape_str(x->shape));
  }
  std::vector<Real> v(x->value.begin() + start, x->value.begin() + start + len);
  auto out = make_node<Real>({len}, std::move(v), x->requires_grad);
  if (out->requires_grad) {
    out->parents = {x};
    Node<Real>* o = out.get();
    out->backprop = [o, x, start, len]() {
      Real* gx = x->grad_data();
      const Real* g = o->grad.data();
      for (int64_t i = 0; i < len; ++i) gx[start + i] += g[i];
    };
  }
  return out;
}

template <typename Real>
NodePtr<Real> slice_rows(const NodePtr<Real>& x, int64_t r0, int64_t n) {
  if (x->shape.size() != 2) {
    throw ShapeError("slice_rows: expected 2-D, got " + shape_str(x->shape));
  }
  const int64_t c = x->shape[1];
  if (r0 < 0 || n < 0 || r0 + n > x->shape[0]) {
    throw ShapeError("slice_rows: rows [" + std::to_string(r0) + ", " + std::to_string(r0 + n) +
                     ") out of bounds for " + shape_str(x->shape));
  }
  std::vector<Real> v(x->value.begin() + r0 * c, x->value.begin() + (r0 + n) * c);
  auto out = make_node<Real>({n, c}, std::move(v), x->requires_grad);
  if (out->requires_grad) {
    out->parents = {x};
    Node<Real>* o = out.get();
    out->backprop = [o, x, r0, n, c]() {
      Real* gx = x->grad_data() + r0 * c;
      const Real* g = o->grad.data();
      for (int64_t i = 0; i < n * c; ++i) gx[i] += g[i];
    };
  }
  return out;
}

template <typename Real>
NodePtr<Real> slice_cols(const NodePtr<Real>& x, int64_t c0, int64_t n) {
  if (x->shape.size() != 2) {
    throw ShapeError("slice_cols: expected 2-D, got " + shape_str(x->shape));
  }
  const int64_t rows = x->shape[0], c = x->shape[1];
  if (c0 < 0 || n < 0 || c0 + n > c) {
    throw ShapeError("slice_cols: cols [" + std::to_string(c0) + ", " + std::to_string(c0 + n) +
                     ") out of bounds for " + shape_str(x->shape));
  }
  std::vector<Real> v(static_cast<size_t>(rows * n));
  for (int64_t r = 0; r < rows; ++r) {
    std::memcpy(v.data() + r * n, x->value.data() + r * c + c0, sizeof(Real) * n);
  }
  auto out = make_node<Real>({rows, n}, std::move(v), x->requires_grad);
  if (out->requires_grad) {
    out->parents = {x};
    Node<Real>* o = out.get();
    out->backprop = [o, x, c0, n, rows, c]() {
      Real* gx = x->grad_data();
      const Real* g = o->grad.data();
      for (int64_t r = 0; r < rows; ++r) {
        for (int64_t i = 0; i < n; ++i) gx[r * c + c0 + i] += g[r * n + i];
      }
    };
  }
  return out;
}

template <typename Real>
NodePtr<Real> concat_rows(const std::vector<NodePtr<Real>>& xs) {
  if (xs.empty()) throw Error("concat_rows: empty input list");
  const int64_t c = xs[0]->shape.size() == 2 ? xs[0]->shape[1] : -1;
  if (c < 0) throw ShapeError("concat_rows: expected 2-D inputs");
  int64_t rows = 0;
  for (const auto& x : xs) {
    if (x->shape.size() != 2 || x->shape[1] != c) {
      throw ShapeError("concat_rows: column mismatch, " + shape_str(xs[0]->shape) + " vs " +
                       shape_str(x->shape));
    }
    rows += x->shape[0];
  }
  std::vector<Real> v;
  v.reserve(static_cast<size_t>(rows * c));
  for (const auto& x : xs) v.insert(v.end(), x->value.begin(), x->value.end());
  auto out = make_node<Real>({rows, c}, std::move(v), any_requires_grad(xs));
  if (out->requires_grad) {
    out->parents = xs;
    Node<Real>* o = out.get();
    out->backprop = [o, c]() {
      int64_t off = 0;
      for (auto& p : o->parents) {
        const int64_t n = p->size();
        if (p->requires_grad) p->add_grad(o->grad.data() + off, n);
        off += n;
      }
    };
  }
  return out;
}

template <typename Real>
NodePtr<Real> concat_cols(const std::vector<NodePtr<Real>>& xs) {
  if (xs.empty()) throw Error("concat_cols: empty input list");
  const int64_t rows = xs[0]->shape.size() == 2 ? xs[0]->shape[0] : -1;
  if (rows < 0) throw ShapeError("concat_cols: expected 2-D inputs");
  int64_t c = 0;
  for (const auto& x : xs) {
    if (x->shape.size() != 2 || x->shape[0] != rows) {
      throw ShapeError("concat_cols: row mismatch, " + shape_str(xs[0]->shape) + " vs " +
                       shape_str(x->shape));
    }
    c += x->shape[1];
  }
  std::vector<Real> v(static_cast<size_t>(rows * c));
  int64_t off = 0;
  for (const auto& x : xs) {
    const int64_t xc = x->shape[1];
    for (int64_t r = 0; r < rows; ++r) {
      std::memcpy(v.data() + r * c + off, x->value.data() + r * xc, sizeof(Real) * xc);
    }
    off += xc;
  }
  auto out = make_node<Real>({rows, c}, std::move(v), any_requires_grad(xs));
  if (out->requires_grad) {
    out->parents = xs;
    Node<Real>* o = out.get();
    out->backprop = [o, rows, c]() {
      int64_t off = 0;
      for (auto& p : o->parents) {
        const int64_t xc = p->shape[1];
        if (p->requires_grad) {
          Real* gp = p->grad_data();
          for (int64_t r = 0; r < rows; ++r) {
            const Real* g = o->grad.data() + r * c + off;
            for (int64_t i = 0; i < xc; ++i) gp[r * xc + i] += g[i];
          }
        }
        off += xc;
      }
    };
  }
  return out;
}

template <typename Real>
NodePtr<Real> stack_rows(const std::vector<NodePtr<Real>>& xs) {
  if (xs.empty()) throw Error("stack_rows: empty input list");
  const int64_t c = xs[0]->shape.size() == 1 ? xs[0]->shape[0] : -1;
  if (c < 0) throw ShapeError("stack_rows: expected 1-D inputs");
  for (const auto& x : xs) {
    if (x->shape.size() != 1 || x->shape[0] != c) {
      throw ShapeError("stack_rows: length mismatch, " + shape_str(xs[0]->shape) + " vs " +
                       shape_str(x->shape));
    }
  }
  const int64_t rows = static_cast<int64_t>(xs.size());
  std::vector<Real> v;
  v.reserve(static_cast<size_t>(rows * c));
  for (const auto& x : xs) v.insert(v.end(), x->value.begin(), x->value.end());
  auto out = make_node<Real>({rows, c}, std::move(v), any_requires_grad(xs));
  if (out->requires_grad) {
    out->parents = xs;
    Node<Real>* o = out.get();
    out->backprop = [o, c]() {
      int64_t off = 0;
      for (auto& p : o->parents) {
        if (p->requires_grad) p->add_grad(o->grad.data() + off, c);
        off += c;
      }
    };
  }
  return out;
}

template <typename Real>
NodePtr<Real> gather_rows(const NodePtr<Real>& x, std::vector<int64_t> idx) {
  if (x->shape.size() != 2) {
    throw ShapeError("gather_rows: expected 2-D, got " + shape_str(x->shape));
  }
  const int64_t rows = x->shape[0], c = x->shape[1];
  for (int64_t i : idx) {
    if (i < 0 || i >= rows) {
      throw ShapeError("gather_rows: index " + std::to_string(i) + " out of bounds for " +
                       shape_str(x->shape));
    }
  }
  const int64_t n = static_cast<int64_t>(idx.size());
  std::vector<Real> v(static_cast<size_t>(n * c));
  for (int64_t i = 0; i < n; ++i) {
    std::memcpy(v.data() + i * c, x->value.data() + idx[i] * c, sizeof(Real) * c);
  }
  auto out = make_node<Real>({n, c}, std::move(v), x->requires_grad);
  if (out->requires_grad) {
    out->parents = {x};
    Node<Real>* o = out.get();
    out->backprop = [o, x, idx = std::move(idx), n, c]() {
      Real* gx = x->grad_data();
      const Real* g = o->grad.data();
      for (int64_t i = 0; i < n; ++i) {
        Real* dst = gx + idx[i] * c;
        const Real* src = g + i * c;
        for (int64_t j = 0; j < c; ++j) dst[j] += src[j];
      }
    };
  }
  return out;
}

template <typename Real>
NodePtr<Real> pick(const NodePtr<Real>& x, int64_t i) {
  if (x->shape.size() != 1) throw ShapeError("pick: expected 1-D, got " + shape_str(x->shape));
  if (i < 0 || i >= x->shape[0]) {
    throw ShapeError("pick: index " + std::to_string(i) + " out of bounds for " +
                     shape_str(x->shape));
  }
  auto out = make_node<Real>({1}, {x->value[i]}, x->requires_grad);
  if (out->requires_grad) {
    out->parents = {x};
    Node<Real>* o = out.get();
    out->backprop = [o, x, i]() { x->grad_data()[i] += o->grad[0]; };
  }
  return out;
}

template <typename Real>
NodePtr<Real> pick_per_row(const NodePtr<Real>& x, std::vector<int64_t> idx) {
  if (x->shape.size() != 2) {
    throw ShapeError("pick_per_row: expected 2-D, got " + shape_str(x->shape));
  }
  const int64_t m = x->shape[0], n = x->shape[1];
  if (static_cast<int64_t>(idx.size()) != m) {
    throw ShapeError("pick_per_row: need one index per row, got " + std::to_string(idx.size()) +
                     " for " + shape_str(x->shape));
  }
  std::vector<Real> v(static_cast<size_t>(m));
  for (int64_t r = 0; r < m; ++r) {
    if (idx[r] < 0 || idx[r] >= n) {
      throw ShapeError("pick_per_row: index " + std::to_string(idx[r]) +
                       " out of bounds in row " + std::to_string(r));
    }
    v[r] = x->value[r * n + idx[r]];
  }
  auto out = make_node<Real>({m}, std::move(v), x->requires_grad);
  if (out->requires_grad) {
    out->parents = {x};
    Node<Real>* o = out.get();
    out->backprop = [o, x, idx = std::move(idx), m, n]() {
      Real* gx = x->grad_data();
      for (int64_t r = 0; r < m; ++r) gx[r * n + idx[r]] += o->grad[r];
    };
  }
  return out;
}

template <typename Real>
NodePtr<Real> reshape(const NodePtr<Real>& x, Shape shape) {
  if (numel(shape) != x->size()) {
    throw ShapeError("reshape: cannot view " + shape_str(x->shape) + " as " + shape_str(shape));
  }
  auto out = make_node<Real>(std::move(shape), x->value, x->requires_grad);
  if (out->requires_grad) {
    out->parents = {x};
    Node<Real>* o = out.get();
    out->backprop = [o, x]() { x->add_grad(o->grad.data(), o->size()); };
  }
  return out;
}

template <typename Real>
NodePtr<Real> as_row(const NodePtr<Real>& x, int64_t r) {
  return reshape(slice_rows(x, r, 1), {x->shape[1]});
}

// ---------------------------------------------------------------------------
// Explicit instantiations
// ---------------------------------------------------------------------------

#define CPCX_INSTANTIATE_OPS(Real)                                                             \
  template NodePtr<Real> add<Real>(const NodePtr<Real>&, const NodePtr<Real>&);               \
  template NodePtr<Real> mul<Real>(const NodePtr<Real>&, const NodePtr<Real>&);               \
  template NodePtr<Real> scale<Real>(const NodePtr<Real>&, double);                           \
  template NodePtr<Real> vtanh<Real>(const NodePtr<Real>&);                                   \
  template NodePtr<Real> sigmoid<Real>(const NodePtr<Real>&);                                 \
  template NodePtr<Real> relu<Real>(const NodePtr<Real>&);                                    \
  template NodePtr<Real> add_n<Real>(const std::vector<NodePtr<Real>>&);                      \
  template NodePtr<Real> sum<Real>(const NodePtr<Real>&);                                     \
  template NodePtr<Real> mean<Real>(const NodePtr<Real>&);                                    \
  template NodePtr<Real> matmul<Real>(const NodePtr<Real>&, const NodePtr<Real>&);            \
  template NodePtr<Real> matvec<Real>(const NodePtr<Real>&, const NodePtr<Real>&);            \
  template NodePtr<Real> transpose<Real>(const NodePtr<Real>&);                               \
  template NodePtr<Real> linear<Real>(const NodePtr<Real>&, const NodePtr<Real>&,             \
                                      const NodePtr<Real>&);                                  \
  template NodePtr<Real> log_softmax<Real>(const NodePtr<Real>&);                             \
  template NodePtr<Real> log_softmax_rows<Real>(const NodePtr<Real>&);                        \
  template NodePtr<Real> causal_softmax_rows<Real>(const NodePtr<Real>&);                     \
  template NodePtr<Real> conv1d<Real>(const NodePtr<Real>&, const NodePtr<Real>&,             \
                                      const NodePtr<Real>&, int64_t, int64_t);                \
  template NodePtr<Real> channel_norm<Real>(const NodePtr<Real>&, const NodePtr<Real>&,       \
                                            const NodePtr<Real>&, double);                    \
  template NodePtr<Real> dropout<Real>(const NodePtr<Real>&, double, Rng&, bool);             \
  template NodePtr<Real> slice<Real>(const NodePtr<Real>&, int64_t, int64_t);                 \
  template NodePtr<Real> slice_rows<Real>(const NodePtr<Real>&, int64_t, int64_t);            \
  template NodePtr<Real> slice_cols<Real>(const NodePtr<Real>&, int64_t, int64_t);            \
  template NodePtr<Real> concat_rows<Real>(const std::vector<NodePtr<Real>>&);                \
  template NodePtr<Real> concat_cols<Real>(const std::vector<NodePtr<Real>>&);                \
  template NodePtr<Real> stack_rows<Real>(const std::vector<NodePtr<Real>>&);                 \
  template NodePtr<Real> gather_rows<Real>(const NodePtr<Real>&, std::vector<int64_t>);       \
  template NodePtr<Real> pick<Real>(const NodePtr<Real>&, int64_t);                           \
  template NodePtr<Real> pick_per_row<Real>(const NodePtr<Real>&, std::vector<int64_t>);      \
  template NodePtr<Real> reshape<Real>(const NodePtr<Real>&, Shape);                          \
  template NodePtr<Real> as_row<Real>(const NodePtr<Real>&, int64_t);

CPCX_INSTANTIATE_OPS(float)
CPCX_INSTANTIATE_OPS(double)

#undef CPCX_INSTANTIATE_OPS

}  // namespace cpcx
