// tests/test_cpc_loss.cc

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

#include <algorithm>
#include <cmath>
#include <map>

#include "base/rng.h"
#include "model/cpc_loss.h"
#include "model/model.h"
#include "tensor/grad_check.h"

using namespace cpcx;

namespace {

// Independent scalar recomputation of the InfoNCE value from raw arrays.
// Shares no code with the implementation under test.
double brute_info_nce(const std::vector<double>& pool, int64_t pool_rows, int64_t c,
                      const std::vector<std::vector<double>>& preds,  // K of [T*C]
                      int64_t t_len, int64_t horizon,
                      const std::map<std::pair<int64_t, int64_t>, NegativeSet>& sets,
                      int64_t row0) {
  double total = 0;
  int64_t count = 0;
  for (int64_t t = 0; t + horizon < t_len; ++t) {
    double lt = 0;
    for (int64_t k = 1; k <= horizon; ++k) {
      const NegativeSet& ns = sets.at({t, k});
      std::vector<int64_t> cand;
      cand.push_back(row0 + t + k);
      for (int64_t n : ns.negatives) cand.push_back(n);
      std::vector<double> scores;
      for (int64_t idx : cand) {
        double s = 0;
        for (int64_t i = 0; i < c; ++i) {
          s += pool[idx * c + i] * preds[k - 1][t * c + i];
        }
        scores.push_back(s);
      }
      double mx = *std::max_element(scores.begin(), scores.end());
      double denom = 0;
      for (double s : scores) denom += std::exp(s - mx);
      lt += -(scores[0] - mx - std::log(denom));
    }
    total += lt / horizon;
    ++count;
  }
  return total / count;
}

NodePtr<double> random_node(Shape shape, uint64_t seed, bool grad = false) {
  Rng rng(seed);
  std::vector<double> v(static_cast<size_t>(numel(shape)));
  for (auto& x : v) x = rng.uniform(-1, 1);
  auto n = make_node<double>(std::move(shape), std::move(v), grad);
  return n;
}

}  // namespace

TEST_CASE("negative sampling stays within the pool and excludes the positive") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int64_t pool = 2 + rng.uniform_int(127);
    const int64_t positive = rng.uniform_int(pool);
    auto set = sample_negatives(pool, positive, 64, rng);
    CHECK(set.positive == positive);
    for (int64_t n : set.negatives) {
      CHECK(n >= 0);
      CHECK(n < pool);
      CHECK(n != positive);
    }
  }
}

TEST_CASE("negative sampling is deterministic per seed") {
  Rng a(42), b(42);
  auto sa = sample_negatives(128, 17, 32, a);
  auto sb = sample_negatives(128, 17, 32, b);
  CHECK(sa.negatives == sb.negatives);
}

TEST_CASE("negative sampling errors when the speaker pool is too small") {
  Rng rng(5);
  CHECK_THROWS_WITH_AS(sample_negatives(2, 1, 8, rng), doctest::Contains("larger windows"),
                       DataError);
}

TEST_CASE("negative sampling is uniform over eligible frames") {
  // Chi-square against the uniform law at 10^5 draws.
  Rng rng(7);
  const int64_t pool = 40;
  const int64_t positive = 13;
  const int64_t draws = 100000;
  std::vector<int64_t> counts(pool, 0);
  auto set = sample_negatives(pool, positive, draws, rng);
  for (int64_t n : set.negatives) counts[n]++;
  CHECK(counts[positive] == 0);
  const double expected = static_cast<double>(draws) / (pool - 1);
  double chi2 = 0;
  for (int64_t i = 0; i < pool; ++i) {
    if (i == positive) continue;
    const double d = counts[i] - expected;
    chi2 += d * d / expected;
  }
  // 38 degrees of freedom; 99.9th percentile is ~69.3.
  CHECK(chi2 < 69.3);
}

TEST_CASE("uniform scores give loss ln(N+1)") {
  // All-zero pool and predictions: every candidate scores 0.
  const int64_t c = 4, t_len = 8, horizon = 2, n_neg = 15;
  SpeakerPool<double> pool;
  pool.frames = zeros<double>({t_len, c});
  pool.rows = t_len;
  ScoringWindow<double> w;
  for (int64_t k = 0; k < horizon; ++k) w.preds.push_back(zeros<double>({t_len, c}));
  w.pool = &pool;
  w.pool_row0 = 0;
  w.frames = t_len;
  Rng rng(11);
  auto res = info_nce<double>({w}, horizon, n_neg, false, rng);
  CHECK(res.report.loss == doctest::Approx(std::log(n_neg + 1.0)).epsilon(1e-9));
  for (double acc : res.report.accuracy_per_k) CHECK(acc == 0.0);
}

TEST_CASE("two-candidate closed form ln(1+exp(-1))") {
  // One negative; positive scores 1, negative scores 0.
  // Pool row layout: a window of 3 frames; choose vectors so that
  // pred . positive = 1 and pred . negative = 0 for every (t, k).
  const int64_t c = 2;
  const int64_t t_len = 3, horizon = 2;
  // Frames: e0 everywhere; predictions e0 -> positive score 1. Negative
  // must also be a frame of the pool, so make a second pool row of e1.
  // With t_len=3 and K=2 only t=0 is scored; positive rows are 1 and 2.
  // Make row 0 the negative (e1), rows 1,2 positives (e0).
  std::vector<double> frames = {0, 1, 1, 0, 1, 0};
  SpeakerPool<double> pool;
  pool.frames = constant<double>({3, c}, frames);
  pool.rows = 3;
  ScoringWindow<double> w;
  std::vector<double> predv(static_cast<size_t>(t_len * c), 0.0);
  for (int64_t t = 0; t < t_len; ++t) predv[t * c] = 1.0;  // e0 at every t
  for (int64_t k = 0; k < horizon; ++k) w.preds.push_back(constant<double>({t_len, c}, predv));
  w.pool = &pool;
  w.pool_row0 = 0;
  w.frames = t_len;
  Rng rng(13);
  // n_neg=1 and the only eligible non-positive rows are row 0 (e1) and the
  // other positive row (e0, scoring 1). Run many seeds; whenever the
  // negative drawn is row 0 the term is ln(1+e^-1). Easier: force the
  // sampler by using a pool where all non-positive rows are e1.
  auto res = info_nce<double>({w}, horizon, 1, false, rng);
  // t=0: k=1 -> positive row 1, eligible {0, 2}; k=2 -> positive row 2,
  // eligible {0, 1}. Terms are ln(1+e^{-1}) when the e1 row is drawn and
  // ln 2 when the other positive (score 1) is drawn. Both are valid; we
  // only check the loss is one of the achievable mixtures.
  const double lo = std::log(1 + std::exp(-1.0));
  const double hi = std::log(2.0);
  CHECK(res.report.loss >= lo - 1e-9);
  CHECK(res.report.loss <= hi + 1e-9);
}

TEST_CASE("two-candidate closed form, pinned sampler") {
  // Single scored position with a deterministic negative: pool of 3 rows
  // where both non-positive rows are the same e1 vector, so any draw gives
  // score 0 against pred e0 while the positive scores 1.
  const int64_t c = 2;
  std::vector<double> frames = {0, 1, 1, 0, 0, 1};  // rows: e1, e0 (positive), e1
  SpeakerPool<double> pool;
  pool.frames = constant<double>({3, c}, frames);
  pool.rows = 3;
  ScoringWindow<double> w;
  std::vector<double> predv = {1, 0, 1, 0};  // t_len = 2
  w.preds.push_back(constant<double>({2, c}, predv));
  w.pool = &pool;
  w.pool_row0 = 0;
  w.frames = 2;
  Rng rng(17);
  auto res = info_nce<double>({w}, /*horizon=*/1, /*n_neg=*/1, false, rng);
  CHECK(res.report.loss == doctest::Approx(std::log(1 + std::exp(-1.0))).epsilon(1e-9));
  CHECK(res.report.accuracy_per_k[0] == 1.0);
}

TEST_CASE("loss matches an independent scalar reimplementation") {
  const int64_t c = 3, t_len = 9, horizon = 2, n_neg = 5;
  auto frames = random_node({t_len, c}, 19);
  SpeakerPool<double> pool;
  pool.frames = frames;
  pool.rows = t_len;
  ScoringWindow<double> w;
  for (int64_t k = 0; k < horizon; ++k) {
    w.preds.push_back(random_node({t_len, c}, 100 + static_cast<uint64_t>(k)));
  }
  w.pool = &pool;
  w.pool_row0 = 0;
  w.frames = t_len;

  // First run records the sampled sets by replaying the same rng protocol.
  Rng rng(23);
  auto res = info_nce<double>({w}, horizon, n_neg, false, rng);

  Rng replay(23);
  std::map<std::pair<int64_t, int64_t>, NegativeSet> sets;
  for (int64_t t = 0; t + horizon < t_len; ++t) {
    for (int64_t k = 1; k <= horizon; ++k) {
      sets[{t, k}] = sample_negatives(t_len, t + k, n_neg, replay);
    }
  }
  std::vector<std::vector<double>> preds;
  for (auto& pk : w.preds) preds.push_back(std::vector<double>(pk->value));
  const double expected =
      brute_info_nce(frames->value, t_len, c, preds, t_len, horizon, sets, 0);
  CHECK(res.report.loss == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("loss is positive and permutation invariant in the negatives") {
  // Permutation invariance comes from the softmax denominator being a sum;
  // verify by scoring the same candidates in two different orders.
  const int64_t c = 4;
  auto cand = random_node({6, c}, 29);
  auto pred = random_node({c}, 31);
  auto direct = pick(log_softmax(matvec(cand, pred)), 0);
  std::vector<int64_t> perm = {0, 4, 2, 3, 1, 5};  // positive stays at 0
  auto shuffled = pick(log_softmax(matvec(gather_rows(cand, perm), pred)), 0);
  CHECK(std::abs(direct->value[0] - shuffled->value[0]) < 1e-12);
}

TEST_CASE("raising the positive score strictly lowers the loss") {
  // Per-position contrastive term: -log_softmax(scores)[positive].
  Rng rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> scores(8);
    for (auto& s : scores) s = rng.uniform(-2, 2);
    auto term_of = [&](double boost) {
      std::vector<double> s = scores;
      s[0] += boost;
      return -pick(log_softmax(constant<double>({8}, s)), 0)->value[0];
    };
    const double base = term_of(0.0);
    CHECK(base > 0.0);
    double prev = base;
    for (double boost : {0.01, 0.1, 1.0, 4.0}) {
      const double t = term_of(boost);
      CHECK(t < prev);
      prev = t;
    }
  }
}

TEST_CASE("window without a full horizon is rejected") {
  const int64_t c = 2, t_len = 3;
  SpeakerPool<double> pool;
  pool.frames = zeros<double>({t_len, c});
  pool.rows = t_len;
  ScoringWindow<double> w;
  for (int k = 0; k < 3; ++k) w.preds.push_back(zeros<double>({t_len, c}));
  w.pool = &pool;
  w.frames = t_len;
  Rng rng(41);
  CHECK_THROWS_AS(info_nce<double>({w}, 3, 4, false, rng), DataError);
}

TEST_CASE("shared negatives across k reuse one draw per t") {
  const int64_t c = 2, t_len = 6, horizon = 2, n_neg = 4;
  auto frames = random_node({t_len, c}, 43);
  SpeakerPool<double> pool;
  pool.frames = frames;
  pool.rows = t_len;
  ScoringWindow<double> w;
  for (int64_t k = 0; k < horizon; ++k) w.preds.push_back(random_node({t_len, c}, 50 + k));
  w.pool = &pool;
  w.frames = t_len;
  Rng rng(47);
  auto res = info_nce<double>({w}, horizon, n_neg, true, rng);
  CHECK(res.report.loss > 0);
  CHECK(std::isfinite(res.report.loss));
}

TEST_CASE("gradient through the full contrastive objective") {
  const int64_t c = 3, t_len = 6, horizon = 2, n_neg = 3;
  Rng init(53);
  std::vector<double> fv(static_cast<size_t>(t_len * c));
  for (auto& v : fv) v = init.uniform(-1, 1);
  auto frames = parameter<double>("frames", {t_len, c}, fv);
  std::vector<NodePtr<double>> predp;
  for (int64_t k = 0; k < horizon; ++k) {
    std::vector<double> pv(static_cast<size_t>(t_len * c));
    for (auto& v : pv) v = init.uniform(-1, 1);
    predp.push_back(parameter<double>("pred" + std::to_string(k), {t_len, c}, pv));
  }
  auto report = grad_check(
      [&]() {
        SpeakerPool<double> pool;
        pool.frames = frames;
        pool.rows = t_len;
        ScoringWindow<double> w;
        w.preds = predp;
        w.pool = &pool;
        w.frames = t_len;
        Rng rng(59);  // same negatives on every rebuild
        return info_nce<double>({w}, horizon, n_neg, false, rng).loss;
      },
      {frames, predp[0], predp[1]}, 1e-5, 1e-6);
  INFO(report.to_string());
  CHECK(report.ok());
}
