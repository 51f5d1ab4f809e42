// data/dataset.h

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

#ifndef CPCX_DATA_DATASET_H_
#define CPCX_DATA_DATASET_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "base/rng.h"

namespace cpcx {

// Raw waveform plus labels. aligned_labels (one inventory index per 10 ms
// frame) is empty when no alignment is available.
struct Utterance {
  std::string id;
  std::string speaker;
  std::vector<float> samples;
  std::vector<int32_t> transcript;       // inventory indices, non-aligned
  std::vector<int32_t> aligned_labels;   // length floor(samples/160) or empty

  int64_t n_samples() const { return static_cast<int64_t>(samples.size()); }
  int64_t n_frames() const { return n_samples() / 160; }
  bool has_alignment() const { return !aligned_labels.empty(); }
};

struct ManifestRecord {
  std::string audio;       // path relative to the manifest's directory
  std::string speaker;
  std::string transcript;  // path
  std::string alignment;   // path or "-" when absent
};

struct Manifest {
  std::string dir;  // directory the record paths are relative to
  std::vector<ManifestRecord> records;
};

Manifest read_manifest(const std::string& path);
void write_manifest(const std::string& path, const Manifest& manifest);

// Phoneme inventory: one symbol per line, order significant. The CTC blank
// is NOT part of the inventory; it implicitly occupies class index 0 in
// probe logits, inventory symbol i maps to class i+1.
std::vector<std::string> read_inventory(const std::string& path);
void write_inventory(const std::string& path, const std::vector<std::string>& symbols);

struct Dataset {
  std::vector<Utterance> utterances;
  std::vector<std::string> inventory;

  int64_t total_samples() const;
  std::vector<std::string> speakers() const;  // unique, in first-seen order
};

// Loads audio and labels for every manifest record. Transcript files hold
// one line of space-separated symbols; alignment files hold one symbol per
// frame. Alignment length must equal floor(samples/160).
Dataset load_dataset(const Manifest& manifest, const std::vector<std::string>& inventory);

// Partitions SPEAKERS (never utterances) into train/dev/test by the given
// ratios, deterministically per seed. Needs at least 3 speakers.
std::array<Manifest, 3> make_splits(const Manifest& manifest, const std::array<double, 3>& ratios,
                                    uint64_t seed);

}  // namespace cpcx

#endif  // CPCX_DATA_DATASET_H_
