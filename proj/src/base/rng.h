// base/rng.h

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

#ifndef CPCX_BASE_RNG_H_
#define CPCX_BASE_RNG_H_

#include <cstdint>

namespace cpcx {

// 64-bit mixing (murmur3 finalizer). Used both inside the generator and to
// derive independent child streams.
inline uint64_t mix64(uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

// Deterministic splitmix64 generator. All randomness in the project flows
// from one seed through explicit Rng instances; there is no global state.
// The standard library distributions are avoided on purpose: their output
// is implementation-defined and would break bit-exact reproducibility of
// traces and checkpoints across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), state_(mix64(seed + 0x9e3779b97f4a7c15ULL)) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be positive. Modulo bias is below
  // n / 2^64 and irrelevant for the pool sizes used here.
  int64_t uniform_int(int64_t n) {
    return static_cast<int64_t>(next_u64() % static_cast<uint64_t>(n));
  }

  // Standard normal via Box-Muller (no cached spare, to keep the state a
  // pure function of the draw count).
  double normal();

  // Independent child stream. Children with distinct ids are decorrelated
  // from the parent and from each other.
  Rng split(uint64_t stream_id) const { return Rng(mix64(seed_ ^ mix64(stream_id + 1))); }

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  uint64_t state_;
};

}  // namespace cpcx

#endif  // CPCX_BASE_RNG_H_
