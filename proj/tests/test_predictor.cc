// tests/test_predictor.cc

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

#include "base/rng.h"
#include "model/predictor.h"
#include "tensor/grad_check.h"

using namespace cpcx;

namespace {

template <typename Real>
NodePtr<Real> random_ctx(int64_t t, int64_t h, uint64_t seed) {
  Rng rng(seed);
  std::vector<Real> v(static_cast<size_t>(t * h));
  for (auto& x : v) x = static_cast<Real>(rng.uniform(-1, 1));
  return constant<Real>({t, h}, std::move(v));
}

template <typename Real>
PredictorParams<Real> make_params(const PredictorConfig& cfg, int64_t c, int64_t h,
                                  uint64_t seed) {
  Rng rng(seed);
  PredictorParams<Real> p;
  p.init(cfg, c, h, rng);
  return p;
}

PredictorConfig config_of(PredictorConfig::Kind kind, int64_t k = 3) {
  PredictorConfig cfg;
  cfg.kind = kind;
  cfg.horizon = k;
  cfg.attention_heads = 2;
  return cfg;
}

const PredictorConfig::Kind kAllKinds[] = {
    PredictorConfig::Kind::kLinear, PredictorConfig::Kind::kFfd, PredictorConfig::Kind::kConv8,
    PredictorConfig::Kind::kTransformer};

}  // namespace

TEST_CASE("linear predictor with identity matrices reproduces z") {
  PredictorConfig cfg = config_of(PredictorConfig::Kind::kLinear, 2);
  const int64_t h = 4;
  auto p = make_params<double>(cfg, h, h, 3);
  for (auto& head : p.heads) {
    std::fill(head->value.begin(), head->value.end(), 0.0);
    for (int64_t i = 0; i < h; ++i) head->value[i * h + i] = 1.0;
  }
  auto z = random_ctx<double>(5, h, 5);
  Rng rng(1);
  auto preds = predict(z, cfg, p, false, rng);
  REQUIRE(preds.size() == 2);
  for (const auto& pk : preds) {
    for (int64_t i = 0; i < z->size(); ++i) CHECK(pk->value[i] == z->value[i]);
  }
}

TEST_CASE("linear predictor hand-checked matrix") {
  PredictorConfig cfg = config_of(PredictorConfig::Kind::kLinear, 1);
  auto p = make_params<double>(cfg, 2, 2, 7);
  // A = [[1,2],[3,4]] applied to z = (1, 0) picks the first column.
  p.heads[0]->value = {1, 2, 3, 4};
  auto z = constant<double>({1, 2}, {1, 0});
  Rng rng(1);
  auto preds = predict(z, cfg, p, false, rng);
  CHECK(preds[0]->value[0] == doctest::Approx(1.0));
  CHECK(preds[0]->value[1] == doctest::Approx(3.0));
}

TEST_CASE("ffd with zero weights broadcasts the bias") {
  PredictorConfig cfg = config_of(PredictorConfig::Kind::kFfd, 2);
  const int64_t h = 4;
  auto p = make_params<double>(cfg, h, h, 9);
  std::fill(p.ffd_w1->value.begin(), p.ffd_w1->value.end(), 0.0);
  std::fill(p.ffd_w2->value.begin(), p.ffd_w2->value.end(), 0.0);
  for (int64_t i = 0; i < h; ++i) p.ffd_b2->value[i] = 0.5 + i;
  auto z = random_ctx<double>(6, h, 11);
  Rng rng(1);
  auto preds = predict(z, cfg, p, false, rng);
  // Every timestep sees head_k * b2.
  for (const auto& pk : preds) {
    for (int64_t t = 1; t < 6; ++t) {
      for (int64_t i = 0; i < h; ++i) CHECK(pk->value[t * h + i] == pk->value[i]);
    }
  }
}

TEST_CASE("conv8 at t=1 sees only z_1") {
  PredictorConfig cfg = config_of(PredictorConfig::Kind::kConv8, 1);
  const int64_t h = 4;
  auto p = make_params<float>(cfg, h, h, 13);
  auto z = random_ctx<float>(10, h, 15);
  Rng rng(1);
  auto base = predict(z, cfg, p, false, rng)[0];
  // Change everything except the first frame; prediction at t=1 is fixed.
  std::vector<float> data = z->value;
  for (int64_t i = h; i < z->size(); ++i) data[i] += 1.0f;
  auto moved = predict(constant<float>({10, h}, data), cfg, p, false, rng)[0];
  for (int64_t i = 0; i < h; ++i) CHECK(base->value[i] == moved->value[i]);
}

TEST_CASE("transformer single token reduces to feedforward projection") {
  PredictorConfig cfg = config_of(PredictorConfig::Kind::kTransformer, 2);
  const int64_t h = 4;
  auto p = make_params<double>(cfg, h, h, 17);
  auto z = random_ctx<double>(1, h, 19);
  Rng rng(1);
  auto preds = predict(z, cfg, p, false, rng);
  REQUIRE(preds.size() == 2);
  CHECK(preds[0]->shape == Shape{1, h});
}

TEST_CASE("causality for all predictor kinds in eval mode") {
  const int64_t h = 4, t_len = 7;
  for (auto kind : kAllKinds) {
    PredictorConfig cfg = config_of(kind);
    auto p = make_params<float>(cfg, h, h, 21);
    auto z = random_ctx<float>(t_len, h, 23);
    Rng rng(1);
    auto base = predict(z, cfg, p, false, rng);
    const int64_t cut = 4;  // perturb frames with index >= cut
    std::vector<float> data = z->value;
    for (int64_t i = cut * h; i < z->size(); ++i) data[i] -= 2.5f;
    Rng rng2(1);
    auto moved = predict(constant<float>({t_len, h}, data), cfg, p, false, rng2);
    for (size_t k = 0; k < base.size(); ++k) {
      for (int64_t tt = 0; tt < cut; ++tt) {
        for (int64_t i = 0; i < h; ++i) {
          INFO("kind=" << predictor_kind_name(kind) << " k=" << k << " t=" << tt);
          CHECK(base[k]->value[tt * h + i] == moved[k]->value[tt * h + i]);
        }
      }
    }
  }
}

TEST_CASE("eval mode determinism with dropout configured") {
  PredictorConfig cfg = config_of(PredictorConfig::Kind::kTransformer);
  cfg.dropout_rate = 0.5;
  const int64_t h = 4;
  auto p = make_params<float>(cfg, h, h, 27);
  auto z = random_ctx<float>(6, h, 29);
  Rng rng_a(77), rng_b(99);
  auto a = predict(z, cfg, p, false, rng_a);
  auto b = predict(z, cfg, p, false, rng_b);
  for (size_t k = 0; k < a.size(); ++k) {
    for (int64_t i = 0; i < a[k]->size(); ++i) CHECK(a[k]->value[i] == b[k]->value[i]);
  }
}

TEST_CASE("unshared trunks give k-dependent predictions") {
  PredictorConfig cfg = config_of(PredictorConfig::Kind::kTransformer, 2);
  cfg.heads_share_trunk = false;
  const int64_t h = 4;
  auto p = make_params<float>(cfg, h, h, 31);
  CHECK(p.trunks.size() == 2);
  auto z = random_ctx<float>(4, h, 33);
  Rng rng(1);
  auto preds = predict(z, cfg, p, false, rng);
  CHECK(preds.size() == 2);
}

TEST_CASE("transformer rejects indivisible head count") {
  PredictorConfig cfg = config_of(PredictorConfig::Kind::kTransformer);
  cfg.attention_heads = 3;
  CHECK_THROWS_AS(cfg.validate(6 + 1), ShapeError);
}

TEST_CASE("gradients through every predictor kind") {
  const int64_t h = 4, c = 3, t_len = 5;
  for (auto kind : kAllKinds) {
    PredictorConfig cfg = config_of(kind);
    auto p = make_params<double>(cfg, c, h, 35);
    auto z = random_ctx<double>(t_len, h, 37);
    std::vector<NodePtr<double>> leaves;
    p.collect(leaves);
    Rng rng(1);
    const double tol = kind == PredictorConfig::Kind::kTransformer ? 1e-4 : 1e-5;
    auto report = grad_check(
        [&]() {
          auto preds = predict(z, cfg, p, false, rng);
          std::vector<NodePtr<double>> sums;
          for (auto& pk : preds) sums.push_back(sum(vtanh(pk)));
          return sum(add_n(sums));
        },
        leaves, 1e-5, tol);
    INFO("kind=" << predictor_kind_name(kind) << "\n" << report.to_string());
    CHECK(report.ok());
  }
}

TEST_CASE("dropout mask expectation is the identity within 2 percent") {
  // The predictor applies inverted dropout; over many masks the expected
  // output equals the input.
  Rng rng(41);
  const int64_t n = 32;
  std::vector<float> base(n, 2.0f);
  auto x = constant<float>({n}, base);
  double acc = 0;
  const int draws = 10000;
  for (int d = 0; d < draws; ++d) {
    auto y = dropout(x, 0.1, rng, true);
    for (int64_t i = 0; i < n; ++i) acc += y->value[i];
  }
  acc /= static_cast<double>(draws) * n;
  CHECK(std::abs(acc / 2.0 - 1.0) < 0.02);
}
