// data/synth.h

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

#ifndef CPCX_DATA_SYNTH_H_
#define CPCX_DATA_SYNTH_H_

#include <cstdint>
#include <string>

#include "data/dataset.h"

namespace cpcx {

// Synthetic speech stand-in with exact ground truth. Each "phoneme" class
// is a narrow-band template at a class-specific base frequency; every
// speaker applies a fixed pitch offset and spectral tilt; utterances are
// random class sequences with 800-1600 samples (5-10 frames) per unit plus
// white noise at the configured SNR.
struct SynthConfig {
  int64_t n_speakers = 4;
  int64_t n_classes = 8;
  int64_t utterances_per_speaker = 50;
  int64_t units_per_utterance = 70;
  int64_t min_unit_samples = 800;
  int64_t max_unit_samples = 1600;
  double snr_db = 20.0;
  uint64_t seed = 1;

  void validate() const;
};

// Base frequency of a class before the speaker's pitch factor.
double synth_class_frequency(int64_t cls);

// Generates one dataset in memory (ids speaker-major: spk<j>_utt<i>).
Dataset synth_dataset(const SynthConfig& cfg);

// Writes wav/, txt/, ali/ files plus all.tsv and phones.txt under out_dir
// and returns the manifest. Byte-identical for identical configs.
Manifest write_synth_dataset(const SynthConfig& cfg, const std::string& out_dir);

}  // namespace cpcx

#endif  // CPCX_DATA_SYNTH_H_
