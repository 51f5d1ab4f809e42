// tests/test_encoder.cc

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
#include "model/encoder.h"
#include "tensor/grad_check.h"

using namespace cpcx;

namespace {

std::vector<float> random_wave(int64_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<float> w(static_cast<size_t>(n));
  for (auto& v : w) v = static_cast<float>(rng.uniform(-1, 1));
  return w;
}

EncoderConfig tiny_cfg(int64_t channels = 6) {
  EncoderConfig cfg;
  cfg.channels = channels;
  return cfg;
}

}  // namespace

TEST_CASE("channel_norm constant row is zeroed") {
  auto x = constant<double>({1, 4}, {5, 5, 5, 5});
  auto g = constant<double>({4}, {1, 1, 1, 1});
  auto b = constant<double>({4}, {0, 0, 0, 0});
  auto y = channel_norm(x, g, b);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(y->value[i]) < 1e-9);
}

TEST_CASE("channel_norm two-point standardization") {
  auto x = constant<double>({1, 2}, {1, -1});
  auto g = constant<double>({2}, {1, 1});
  auto b = constant<double>({2}, {0, 0});
  auto y = channel_norm(x, g, b, 1e-12);
  CHECK(y->value[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(y->value[1] == doctest::Approx(-1.0).epsilon(1e-5));
}

TEST_CASE("channel_norm rejects single channel") {
  auto x = constant<double>({3, 1}, {1, 2, 3});
  auto g = constant<double>({1}, {1});
  auto b = constant<double>({1}, {0});
  CHECK_THROWS_AS(channel_norm(x, g, b), ShapeError);
}

TEST_CASE("channel_norm temporal locality is bit-exact") {
  Rng rng(101);
  const int64_t t = 8, c = 5;
  std::vector<double> base(static_cast<size_t>(t * c));
  for (auto& v : base) v = rng.uniform(-2, 2);
  std::vector<double> gain(c), bias(c);
  for (auto& v : gain) v = rng.uniform(0.5, 1.5);
  for (auto& v : bias) v = rng.uniform(-0.5, 0.5);
  auto y0 = channel_norm(constant<double>({t, c}, base), constant<double>({c}, gain),
                         constant<double>({c}, bias));
  std::vector<double> perturbed = base;
  const int64_t tp = 3;
  for (int64_t i = 0; i < c; ++i) perturbed[tp * c + i] += rng.uniform(-1, 1);
  auto y1 = channel_norm(constant<double>({t, c}, perturbed), constant<double>({c}, gain),
                         constant<double>({c}, bias));
  for (int64_t r = 0; r < t; ++r) {
    for (int64_t i = 0; i < c; ++i) {
      if (r == tp) continue;
      CHECK(y0->value[r * c + i] == y1->value[r * c + i]);
    }
  }
}

TEST_CASE("channel_norm statistics after normalization") {
  Rng rng(103);
  const int64_t t = 16, c = 12;
  std::vector<double> data(static_cast<size_t>(t * c));
  for (auto& v : data) v = rng.uniform(-3, 3);
  std::vector<double> ones(c, 1.0), zero(c, 0.0);
  auto y = channel_norm(constant<double>({t, c}, data), constant<double>({c}, ones),
                        constant<double>({c}, zero));
  for (int64_t r = 0; r < t; ++r) {
    double mu = 0;
    for (int64_t i = 0; i < c; ++i) mu += y->value[r * c + i];
    mu /= c;
    double var = 0;
    for (int64_t i = 0; i < c; ++i) {
      const double d = y->value[r * c + i] - mu;
      var += d * d;
    }
    var /= c;
    CHECK(std::abs(mu) < 1e-6);
    CHECK(std::abs(var - 1.0) < 1e-4);
  }
}

TEST_CASE("encode downsampling exactness") {
  EncoderConfig cfg = tiny_cfg();
  EncoderParams<float> params;
  Rng rng(5);
  params.init(cfg, rng);
  for (int64_t n : {160L, 320L, 16000L, 20480L}) {
    auto wave = random_wave(n, 7 + static_cast<uint64_t>(n));
    auto out = encode(waveform_node<float>(wave.data(), n), cfg, params);
    CHECK(out->shape[0] == n / 160);
    CHECK(out->shape[1] == cfg.channels);
    CHECK(encoded_len(cfg, n) == n / 160);
  }
}

TEST_CASE("encode 1 second gives 100 frames") {
  EncoderConfig cfg = tiny_cfg();
  CHECK(encoded_len(cfg, 16000) == 100);
  CHECK(encoded_len(cfg, 160) == 1);
}

TEST_CASE("encode rejects sub-frame input") {
  EncoderConfig cfg = tiny_cfg();
  EncoderParams<float> params;
  Rng rng(5);
  params.init(cfg, rng);
  auto wave = random_wave(100, 9);
  CHECK_THROWS_AS(encode(waveform_node<float>(wave.data(), 100), cfg, params), DataError);
}

TEST_CASE("encode all-zero waveform stays finite") {
  EncoderConfig cfg = tiny_cfg();
  EncoderParams<float> params;
  Rng rng(5);
  params.init(cfg, rng);
  std::vector<float> wave(1600, 0.0f);
  auto out = encode(waveform_node<float>(wave.data(), 1600), cfg, params);
  for (float v : out->value) CHECK(std::isfinite(v));
}

TEST_CASE("encode is independent of batch composition") {
  // Encoding an utterance alone equals encoding it after others with the
  // same parameters: no cross-sequence statistic exists anywhere.
  EncoderConfig cfg = tiny_cfg();
  EncoderParams<float> params;
  Rng rng(11);
  params.init(cfg, rng);
  auto wave_a = random_wave(1600, 21);
  auto wave_b = random_wave(3200, 22);
  auto alone = encode(waveform_node<float>(wave_a.data(), 1600), cfg, params);
  auto other = encode(waveform_node<float>(wave_b.data(), 3200), cfg, params);
  auto again = encode(waveform_node<float>(wave_a.data(), 1600), cfg, params);
  for (int64_t i = 0; i < alone->size(); ++i) CHECK(alone->value[i] == again->value[i]);
}

TEST_CASE("encode receptive field is 465 samples") {
  // Frame t depends on samples [160 t - 153, 160 t - 153 + 464] only.
  EncoderConfig cfg = tiny_cfg(4);
  EncoderParams<float> params;
  Rng rng(13);
  params.init(cfg, rng);
  const int64_t n = 3200;
  auto wave = random_wave(n, 31);
  auto base = encode(waveform_node<float>(wave.data(), n), cfg, params);
  const int64_t t = 10;  // interior frame
  const int64_t lo = 160 * t - 153;
  const int64_t hi = lo + 465;  // exclusive
  REQUIRE(lo >= 0);
  REQUIRE(hi <= n);

  auto frame_changed = [&](const std::vector<float>& w) {
    auto out = encode(waveform_node<float>(w.data(), n), cfg, params);
    for (int64_t i = 0; i < cfg.channels; ++i) {
      if (out->value[t * cfg.channels + i] != base->value[t * cfg.channels + i]) return true;
    }
    return false;
  };

  std::vector<float> w1 = wave;
  w1[lo - 1] += 0.5f;
  CHECK(!frame_changed(w1));
  std::vector<float> w2 = wave;
  w2[hi] += 0.5f;
  CHECK(!frame_changed(w2));
  std::vector<float> w3 = wave;
  w3[lo] += 0.5f;
  std::vector<float> w4 = wave;
  w4[hi - 1] += 0.5f;
  CHECK((frame_changed(w3) || frame_changed(w4)));
  std::vector<float> w5 = wave;
  w5[160 * t] += 0.5f;  // center certainly inside
  CHECK(frame_changed(w5));
}

TEST_CASE("encoder end-to-end gradient") {
  EncoderConfig cfg;
  cfg.channels = 4;
  EncoderParams<double> params;
  Rng rng(17);
  params.init(cfg, rng);
  auto wave = random_wave(480, 41);
  std::vector<NodePtr<double>> leaves;
  params.collect(leaves);
  auto report = grad_check(
      [&]() { return mean(encode(waveform_node<double>(wave.data(), 480), cfg, params)); },
      leaves, 1e-5, 1e-6);
  INFO(report.to_string());
  CHECK(report.ok());
}
