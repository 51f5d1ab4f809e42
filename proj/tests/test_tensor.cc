// tests/test_tensor.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "base/rng.h"
#include "tensor/grad_check.h"
#include "tensor/ops.h"
#include "tensor/tensor.h"

using namespace cpcx;

namespace {

NodePtr<double> rand_param(const std::string& name, Shape shape, Rng& rng, double lo = -1,
                           double hi = 1) {
  std::vector<double> v(static_cast<size_t>(numel(shape)));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return parameter<double>(name, std::move(shape), std::move(v));
}

}  // namespace

TEST_CASE("conv1d output length formula") {
  CHECK(conv1d_out_len(16000, 10, 5, 3) == 3200);
  // Randomized sweep of the length contract.
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int64_t k = 1 + rng.uniform_int(12);
    const int64_t stride = 1 + rng.uniform_int(6);
    const int64_t pad = rng.uniform_int(5);
    const int64_t t_in = k + rng.uniform_int(64);
    auto x = rand_param("x", {t_in, 2}, rng);
    auto w = rand_param("w", {3, 2, k}, rng);
    auto b = rand_param("b", {3}, rng);
    auto y = conv1d(x, w, b, stride, pad);
    CHECK(y->shape[0] == (t_in + 2 * pad - k) / stride + 1);
    CHECK(y->shape[1] == 3);
  }
}

TEST_CASE("conv1d identity kernel over one channel") {
  Rng rng(3);
  std::vector<double> data(10);
  for (auto& v : data) v = rng.uniform(-1, 1);
  auto x = constant<double>({10, 1}, data);
  auto w = constant<double>({1, 1, 1}, {1.0});
  auto y = conv1d(x, w, NodePtr<double>(), 1, 0);
  REQUIRE(y->shape == Shape{10, 1});
  for (int i = 0; i < 10; ++i) CHECK(y->value[i] == data[i]);
}

TEST_CASE("conv1d rejects channel mismatch naming both sides") {
  auto x = zeros<double>({8, 2});
  auto w = zeros<double>({4, 3, 3});
  CHECK_THROWS_WITH_AS(conv1d(x, w, NodePtr<double>(), 1, 0),
                       doctest::Contains("kernel C_in (3)"), ShapeError);
}

TEST_CASE("conv1d gradient vs finite differences") {
  Rng rng(11);
  auto x = rand_param("input", {8, 2}, rng);
  auto w = rand_param("kernel", {3, 2, 4}, rng);
  auto b = rand_param("bias", {3}, rng);
  auto report = grad_check(
      [&]() {
        // A nonlinearity keeps the objective non-quadratic in every input.
        return sum(vtanh(conv1d(x, w, b, 2, 1)));
      },
      {x, w, b});
  INFO(report.to_string());
  CHECK(report.ok());
  CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("matmul basics and gradient") {
  auto id = constant<double>({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Rng rng(5);
  auto b3 = rand_param("b3", {3, 2}, rng);
  auto y = matmul(id, b3);
  for (int i = 0; i < 6; ++i) CHECK(y->value[i] == b3->value[i]);

  auto a = constant<double>({2, 2}, {1, 2, 3, 4});
  auto onecol = constant<double>({2, 1}, {1, 1});
  auto p = matmul(a, onecol);
  CHECK(p->value[0] == doctest::Approx(3));
  CHECK(p->value[1] == doctest::Approx(7));

  auto ga = rand_param("a", {4, 5}, rng);
  auto gb = rand_param("b", {5, 3}, rng);
  auto report = grad_check([&]() { return sum(vtanh(matmul(ga, gb))); }, {ga, gb});
  INFO(report.to_string());
  CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("matmul rejects dimension mismatch") {
  CHECK_THROWS_AS(matmul(zeros<double>({2, 3}), zeros<double>({4, 2})), ShapeError);
}

TEST_CASE("pointwise trivial values") {
  auto z = constant<double>({1}, {0.0});
  CHECK(vtanh(z)->value[0] == 0.0);
  CHECK(sigmoid(z)->value[0] == 0.5);
  CHECK(relu(z)->value[0] == 0.0);
}

TEST_CASE("pointwise gradients vs finite differences across shapes") {
  Rng rng(13);
  for (Shape shape : {Shape{4}, Shape{3, 5}, Shape{2, 2}}) {
    auto x = rand_param("x", shape, rng);
    auto y = rand_param("y", shape, rng);
    auto s = rand_param("s", {1}, rng);
    struct NamedBuild {
      const char* name;
      std::function<NodePtr<double>()> build;
    };
    std::vector<NamedBuild> cases = {
        {"tanh", [&]() { return sum(vtanh(x)); }},
        {"sigmoid", [&]() { return sum(sigmoid(x)); }},
        {"relu", [&]() { return sum(relu(x)); }},
        {"add", [&]() { return sum(vtanh(add(x, y))); }},
        {"mul", [&]() { return sum(vtanh(mul(x, y))); }},
        {"scale", [&]() { return sum(vtanh(scale(x, 0.7))); }},
        {"add scalar broadcast", [&]() { return sum(vtanh(add(x, s))); }},
        {"mul scalar broadcast", [&]() { return sum(vtanh(mul(s, x))); }},
    };
    for (auto& c : cases) {
      auto report = grad_check(c.build, {x, y, s});
      INFO("op=" << c.name << " shape=" << shape_str(shape) << "\n" << report.to_string());
      CHECK(report.max_rel_err < 1e-6);
    }
  }
}

TEST_CASE("pointwise shape mismatch rejected") {
  CHECK_THROWS_AS(add(zeros<double>({3}), zeros<double>({4})), ShapeError);
  CHECK_THROWS_AS(mul(zeros<double>({2, 2}), zeros<double>({4})), ShapeError);
}

TEST_CASE("log_softmax uniform scores") {
  auto x = constant<double>({4}, {2.5, 2.5, 2.5, 2.5});
  auto y = log_softmax(x);
  for (int i = 0; i < 4; ++i) CHECK(y->value[i] == doctest::Approx(-std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("log_softmax stability under large scores") {
  auto x = constant<double>({2}, {1000.0, 0.0});
  auto y = log_softmax(x);
  CHECK(std::isfinite(y->value[0]));
  CHECK(std::isfinite(y->value[1]));
  CHECK(y->value[0] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("log_softmax shift invariance") {
  Rng rng(17);
  std::vector<double> raw(7);
  for (auto& v : raw) v = rng.uniform(-3, 3);
  auto y0 = log_softmax(constant<double>({7}, raw));
  for (double c : {-42.0, 1.7, 1e6}) {
    std::vector<double> shifted = raw;
    for (auto& v : shifted) v += c;
    auto y1 = log_softmax(constant<double>({7}, shifted));
    for (int i = 0; i < 7; ++i) {
      CHECK(std::abs(y0->value[i] - y1->value[i]) < (std::abs(c) > 1e3 ? 1e-9 : 1e-12));
    }
  }
}

TEST_CASE("log_softmax gradient") {
  Rng rng(19);
  auto x = rand_param("scores", {7}, rng, -2, 2);
  auto w = rand_param("weights", {7}, rng);
  auto report = grad_check([&]() { return sum(mul(w, log_softmax(x))); }, {x});
  INFO(report.to_string());
  CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("backward on sum gives all-ones adjoint") {
  Rng rng(23);
  auto x = rand_param("x", {5}, rng);
  auto root = sum(x);
  backward(root);
  for (int i = 0; i < 5; ++i) CHECK(x->grad[i] == 1.0);
}

TEST_CASE("backward on scalar product gives the other factor") {
  Rng rng(29);
  auto x = rand_param("x", {6}, rng);
  auto y = rand_param("y", {6}, rng);
  backward(sum(mul(x, y)));
  for (int i = 0; i < 6; ++i) {
    CHECK(x->grad[i] == y->value[i]);
    CHECK(y->grad[i] == x->value[i]);
  }
}

TEST_CASE("backward rejects non-scalar root") {
  auto x = zeros<double>({3}, true);
  CHECK_THROWS_AS(backward(x), ShapeError);
}

TEST_CASE("repeated backward accumulates leaf adjoints") {
  Rng rng(31);
  auto x = rand_param("x", {4}, rng);
  auto root = sum(mul(x, x));
  backward(root);
  std::vector<double> once = x->grad;
  backward(root);
  for (int i = 0; i < 4; ++i) CHECK(x->grad[i] == doctest::Approx(2 * once[i]).epsilon(1e-15));
}

TEST_CASE("fan-out sums both adjoint contributions") {
  // x feeds two consumers; d/dx sum(tanh(x) + x*x) must match FD.
  Rng rng(37);
  auto x = rand_param("x", {5}, rng);
  auto report = grad_check([&]() { return sum(add(vtanh(x), mul(x, x))); }, {x});
  INFO(report.to_string());
  CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("structural ops gradients") {
  Rng rng(41);
  auto x = rand_param("x", {6, 4}, rng);
  auto v = rand_param("v", {8}, rng);
  struct NamedBuild {
    const char* name;
    std::function<NodePtr<double>()> build;
  };
  std::vector<NamedBuild> cases = {
      {"slice_rows", [&]() { return sum(vtanh(slice_rows(x, 1, 3))); }},
      {"slice_cols", [&]() { return sum(vtanh(slice_cols(x, 1, 2))); }},
      {"slice", [&]() { return sum(vtanh(slice(v, 2, 5))); }},
      {"transpose", [&]() { return sum(vtanh(transpose(x))); }},
      {"gather_rows", [&]() { return sum(vtanh(gather_rows(x, {0, 5, 5, 2}))); }},
      {"pick", [&]() { return vtanh(pick(v, 3)); }},
      {"pick_per_row",
       [&]() { return sum(vtanh(pick_per_row(x, {1, 0, 3, 2, 2, 0}))); }},
      {"reshape", [&]() { return sum(vtanh(reshape(x, {4, 6}))); }},
      {"concat_rows", [&]() {
         return sum(vtanh(concat_rows<double>({slice_rows(x, 0, 2), slice_rows(x, 3, 3)})));
       }},
      {"concat_cols", [&]() {
         return sum(vtanh(concat_cols<double>({slice_cols(x, 0, 1), slice_cols(x, 2, 2)})));
       }},
      {"stack_rows", [&]() {
         return sum(vtanh(stack_rows<double>({as_row(x, 0), as_row(x, 4)})));
       }},
      {"linear no bias",
       [&]() { return sum(vtanh(linear(x, reshape(v, {2, 4}), NodePtr<double>()))); }},
      {"matvec", [&]() { return sum(vtanh(matvec(x, slice(v, 0, 4)))); }},
      {"add_n", [&]() { return sum(vtanh(add_n<double>({x, x, scale(x, 0.5)}))); }},
      {"causal_softmax", [&]() {
         return sum(vtanh(matmul(causal_softmax_rows(matmul(x, transpose(x))), x)));
       }},
      {"log_softmax_rows", [&]() { return sum(mul(x, log_softmax_rows(x))); }},
  };
  for (auto& c : cases) {
    auto report = grad_check(c.build, {x, v});
    INFO("op=" << c.name << "\n" << report.to_string());
    CHECK(report.max_rel_err < 1e-6);
  }
}

TEST_CASE("causal softmax ignores entries above the diagonal") {
  Rng rng(43);
  std::vector<double> s(16);
  for (auto& x : s) x = rng.uniform(-2, 2);
  auto a = constant<double>({4, 4}, s);
  auto y0 = causal_softmax_rows(a);
  // Perturb strictly-upper entries; output must be bit-identical.
  std::vector<double> s2 = s;
  s2[1] += 100;
  s2[7] -= 3;
  auto y1 = causal_softmax_rows(constant<double>({4, 4}, s2));
  for (int i = 0; i < 16; ++i) CHECK(y0->value[i] == y1->value[i]);
  // Rows sum to one over the causal prefix.
  for (int i = 0; i < 4; ++i) {
    double rs = 0;
    for (int j = 0; j < 4; ++j) rs += y0->value[i * 4 + j];
    CHECK(rs == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("channel_norm constant row maps to bias") {
  auto x = constant<double>({1, 4}, {5, 5, 5, 5});
  auto g = constant<double>({4}, {1, 1, 1, 1});
  auto b = constant<double>({4}, {0, 0, 0, 0});
  auto y = channel_norm(x, g, b);
  for (int i = 0; i < 4; ++i) CHECK(y->value[i] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("channel_norm gradient") {
  Rng rng(47);
  auto x = rand_param("x", {5, 6}, rng);
  auto g = rand_param("gain", {6}, rng, 0.5, 1.5);
  auto b = rand_param("bias", {6}, rng);
  auto report = grad_check([&]() { return sum(vtanh(channel_norm(x, g, b))); }, {x, g, b});
  INFO(report.to_string());
  CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("grad_check quadratic exactness") {
  Rng rng(53);
  auto x = rand_param("x", {6}, rng);
  auto report = grad_check([&]() { return sum(mul(x, x)); }, {x}, 1e-5, 1e-8);
  INFO(report.to_string());
  CHECK(report.ok());
  CHECK(report.max_rel_err < 1e-8);
}

TEST_CASE("grad_check flags a broken gradient") {
  // A deliberately wrong closure must be caught.
  Rng rng(59);
  auto x = rand_param("x", {3}, rng);
  auto build = [&]() {
    auto y = make_node<double>(x->shape, x->value, true);
    for (auto& v : y->value) v = v * v;
    y->parents = {x};
    Node<double>* o = y.get();
    y->backprop = [o, &x]() {
      for (int64_t i = 0; i < 3; ++i) x->grad_data()[i] += o->grad[i];  // missing 2x factor
    };
    return sum(y);
  };
  auto report = grad_check(build, {x});
  CHECK(!report.ok());
}

TEST_CASE("dropout expectation matches identity") {
  Rng rng(61);
  const int64_t n = 64;
  std::vector<double> ones(n, 1.0);
  auto x = constant<double>({n}, ones);
  const double rate = 0.3;
  std::vector<double> acc(n, 0.0);
  const int draws = 10000;
  for (int d = 0; d < draws; ++d) {
    auto y = dropout(x, rate, rng, true);
    for (int64_t i = 0; i < n; ++i) acc[i] += y->value[i];
  }
  double m = 0;
  for (int64_t i = 0; i < n; ++i) m += acc[i] / draws;
  m /= n;
  CHECK(std::abs(m - 1.0) < 0.02);
  // Eval mode is the identity node.
  auto y = dropout(x, rate, rng, false);
  CHECK(y.get() == x.get());
}
