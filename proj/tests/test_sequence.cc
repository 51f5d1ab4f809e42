// tests/test_sequence.cc

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
#include "model/sequence.h"
#include "tensor/grad_check.h"

using namespace cpcx;

namespace {

template <typename Real>
NodePtr<Real> random_frames(int64_t t, int64_t c, uint64_t seed) {
  Rng rng(seed);
  std::vector<Real> v(static_cast<size_t>(t * c));
  for (auto& x : v) x = static_cast<Real>(rng.uniform(-1, 1));
  return constant<Real>({t, c}, std::move(v));
}

template <typename Real>
SequenceParams<Real> make_params(RecurrenceConfig cfg, int64_t input_dim, uint64_t seed) {
  Rng rng(seed);
  SequenceParams<Real> p;
  p.init(cfg, input_dim, rng);
  return p;
}

}  // namespace

TEST_CASE("lstm step collapses to zero on zero everything") {
  RecurrenceConfig cfg;
  cfg.hidden = 4;
  SequenceParams<double> p;
  p.kind = RecurrenceConfig::Kind::kLstm;
  p.wx = zeros<double>({16, 3}, true);
  p.wh = zeros<double>({16, 4}, true);
  p.b = zeros<double>({16}, true);
  auto x = zeros<double>({3});
  auto h = zeros<double>({4});
  auto c = zeros<double>({4});
  auto hc = lstm_step(x, h, c, p);
  for (double v : hc.first->value) CHECK(v == 0.0);
  for (double v : hc.second->value) CHECK(v == 0.0);
}

TEST_CASE("gru saturated update gate copies the state") {
  RecurrenceConfig cfg;
  cfg.kind = RecurrenceConfig::Kind::kGru;
  cfg.hidden = 4;
  auto p = make_params<double>(cfg, 3, 7);
  // Huge bias on the update gate saturates z to 1 -> h' ~ h.
  for (int64_t i = 0; i < 4; ++i) p.b_zr->value[i] = 50.0;
  Rng rng(9);
  std::vector<double> hv(4), xv(3);
  for (auto& v : hv) v = rng.uniform(-1, 1);
  for (auto& v : xv) v = rng.uniform(-1, 1);
  auto h = constant<double>({4}, hv);
  auto x = constant<double>({3}, xv);
  auto h2 = gru_step(x, h, p);
  for (int64_t i = 0; i < 4; ++i) CHECK(h2->value[i] == doctest::Approx(hv[i]).epsilon(1e-9));
}

TEST_CASE("context single step from zero state") {
  RecurrenceConfig cfg;
  cfg.hidden = 5;
  auto p = make_params<double>(cfg, 3, 11);
  auto frames = random_frames<double>(1, 3, 13);
  auto z = context(frames, cfg, p);
  REQUIRE(z->shape == Shape{1, 5});
  auto hc = lstm_step(as_row(frames, 0), zeros<double>({5}), zeros<double>({5}), p);
  for (int64_t i = 0; i < 5; ++i) CHECK(z->value[i] == hc.first->value[i]);
}

TEST_CASE("context causality is bit-exact") {
  for (auto kind : {RecurrenceConfig::Kind::kLstm, RecurrenceConfig::Kind::kGru}) {
    RecurrenceConfig cfg;
    cfg.kind = kind;
    cfg.hidden = 6;
    auto p = make_params<float>(cfg, 4, 17);
    auto frames = random_frames<float>(20, 4, 19);
    auto z0 = context(frames, cfg, p);
    // Perturb frame 10 (1-based) = index 9; z_1..z_9 must not move.
    std::vector<float> data = frames->value;
    for (int64_t i = 0; i < 4; ++i) data[9 * 4 + i] += 0.25f;
    auto z1 = context(constant<float>({20, 4}, data), cfg, p);
    for (int64_t t = 0; t < 9; ++t) {
      for (int64_t i = 0; i < 6; ++i) CHECK(z0->value[t * 6 + i] == z1->value[t * 6 + i]);
    }
    // Later states generally move.
    bool changed = false;
    for (int64_t t = 9; t < 20 && !changed; ++t) {
      for (int64_t i = 0; i < 6; ++i) {
        if (z0->value[t * 6 + i] != z1->value[t * 6 + i]) changed = true;
      }
    }
    CHECK(changed);
  }
}

TEST_CASE("lstm context stays in (-1, 1)") {
  RecurrenceConfig cfg;
  cfg.hidden = 8;
  auto p = make_params<float>(cfg, 4, 23);
  auto frames = random_frames<float>(64, 4, 29);
  auto z = context(frames, cfg, p);
  for (float v : z->value) {
    CHECK(v > -1.0f);
    CHECK(v < 1.0f);
  }
}

TEST_CASE("context is deterministic") {
  RecurrenceConfig cfg;
  cfg.hidden = 6;
  auto p = make_params<float>(cfg, 4, 31);
  auto frames = random_frames<float>(12, 4, 37);
  auto z0 = context(frames, cfg, p);
  auto z1 = context(frames, cfg, p);
  for (int64_t i = 0; i < z0->size(); ++i) CHECK(z0->value[i] == z1->value[i]);
}

TEST_CASE("lstm and gru step gradients") {
  for (auto kind : {RecurrenceConfig::Kind::kLstm, RecurrenceConfig::Kind::kGru}) {
    RecurrenceConfig cfg;
    cfg.kind = kind;
    cfg.hidden = 4;
    auto p = make_params<double>(cfg, 3, 41);
    Rng rng(43);
    std::vector<double> xv(3), hv(4), cv(4);
    for (auto& v : xv) v = rng.uniform(-1, 1);
    for (auto& v : hv) v = rng.uniform(-1, 1);
    for (auto& v : cv) v = rng.uniform(-1, 1);
    auto x = parameter<double>("x", {3}, xv);
    auto h = parameter<double>("h", {4}, hv);
    auto c = parameter<double>("c", {4}, cv);
    std::vector<NodePtr<double>> leaves = {x, h, c};
    p.collect(leaves);
    auto report = grad_check(
        [&]() {
          if (kind == RecurrenceConfig::Kind::kLstm) {
            auto hc = lstm_step(x, h, c, p);
            return sum(add(hc.first, hc.second));
          }
          return sum(gru_step(x, h, p));
        },
        leaves, 1e-5, 1e-6);
    INFO(report.to_string());
    CHECK(report.ok());
  }
}

TEST_CASE("full recurrence gradient through time") {
  RecurrenceConfig cfg;
  cfg.hidden = 4;
  auto p = make_params<double>(cfg, 3, 47);
  auto frames = random_frames<double>(6, 3, 53);
  std::vector<NodePtr<double>> leaves;
  p.collect(leaves);
  auto report = grad_check([&]() { return sum(context(frames, cfg, p)); }, leaves, 1e-5, 1e-5);
  INFO(report.to_string());
  CHECK(report.ok());
}

TEST_CASE("multi-layer recurrence rejected") {
  RecurrenceConfig cfg;
  cfg.layers = 2;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
