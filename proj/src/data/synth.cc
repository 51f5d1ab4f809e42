// data/synth.cc

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

#include "data/synth.h"

#include <cmath>
#include <filesystem>

#include "base/error.h"
#include "base/io_util.h"
#include "data/wav.h"
#include "model/frame_sequence.h"

namespace cpcx {

void SynthConfig::validate() const {
  if (n_classes < 2) throw DataError("synth: need at least 2 classes");
  if (n_speakers < 1) throw DataError("synth: need at least 1 speaker");
  if (min_unit_samples < 160 || max_unit_samples < min_unit_samples) {
    throw DataError("synth: bad unit length range");
  }
}

double synth_class_frequency(int64_t cls) {
  // Geometric spacing keeps classes separable under per-speaker pitch
  // factors of up to +-8%.
  return 420.0 * std::pow(1.32, static_cast<double>(cls));
}

namespace {

constexpr double kNyquistGuardHz = 7600.0;
constexpr int64_t kFadeSamples = 80;
constexpr int kMaxHarmonics = 3;

struct SpeakerVoice {
  double pitch_factor;  // multiplies every class frequency
  double tilt;          // harmonic m scaled by tilt^(m-1)
  double level;         // overall amplitude
};

SpeakerVoice voice_of(int64_t speaker, uint64_t seed) {
  Rng rng = Rng(seed).split(0x7001ULL + static_cast<uint64_t>(speaker));
  SpeakerVoice v;
  v.pitch_factor = rng.uniform(0.92, 1.08);
  v.tilt = rng.uniform(0.45, 0.85);
  v.level = rng.uniform(0.22, 0.3);
  return v;
}

Utterance synth_utterance(const SynthConfig& cfg, int64_t spk, int64_t ui) {
  const SpeakerVoice voice = voice_of(spk, cfg.seed);
  // Stream id is a function of (speaker, utterance) so regeneration order
  // never matters.
  Rng rng = Rng(cfg.seed).split(mix64(static_cast<uint64_t>(spk) * 1000003ULL +
                                      static_cast<uint64_t>(ui) + 17ULL));
  Utterance u;
  u.id = "spk" + std::to_string(spk) + "_utt" + std::to_string(ui);
  u.speaker = "spk" + std::to_string(spk);

  std::vector<int64_t> unit_start;
  for (int64_t k = 0; k < cfg.units_per_utterance; ++k) {
    const int32_t cls = static_cast<int32_t>(rng.uniform_int(cfg.n_classes));
    const int64_t len =
        cfg.min_unit_samples + rng.uniform_int(cfg.max_unit_samples - cfg.min_unit_samples + 1);
    const double freq = synth_class_frequency(cls) * voice.pitch_factor;
    const double amp_scale = voice.level * rng.uniform(0.85, 1.15);
    double phases[kMaxHarmonics];
    for (int m = 0; m < kMaxHarmonics; ++m) phases[m] = rng.uniform(0, 2 * M_PI);

    unit_start.push_back(u.n_samples());
    u.transcript.push_back(cls);
    const int64_t base = u.n_samples();
    u.samples.resize(static_cast<size_t>(base + len), 0.0f);
    for (int m = 1; m <= kMaxHarmonics; ++m) {
      const double f = freq * m;
      if (f >= kNyquistGuardHz) break;
      const double amp = amp_scale * std::pow(voice.tilt, m - 1);
      const double w = 2 * M_PI * f / static_cast<double>(kSampleRate);
      const double phase = phases[m - 1];
      for (int64_t i = 0; i < len; ++i) {
        u.samples[base + i] += static_cast<float>(amp * std::sin(w * i + phase));
      }
    }
    // Short linear fades remove clicks at unit boundaries.
    for (int64_t i = 0; i < kFadeSamples && i < len; ++i) {
      const float g = static_cast<float>(i) / kFadeSamples;
      u.samples[base + i] *= g;
      u.samples[base + len - 1 - i] *= g;
    }
  }

  // Additive noise at the configured SNR relative to the utterance RMS.
  double energy = 0;
  for (float s : u.samples) energy += static_cast<double>(s) * s;
  const double rms = std::sqrt(energy / static_cast<double>(u.samples.size()));
  const double noise_std = rms / std::pow(10.0, cfg.snr_db / 20.0);
  for (auto& s : u.samples) {
    double v = s + noise_std * rng.normal();
    if (v > 0.99) v = 0.99;
    if (v < -0.99) v = -0.99;
    s = static_cast<float>(v);
  }

  // Frame i is labeled by the unit owning its center sample.
  const int64_t frames = u.n_frames();
  u.aligned_labels.resize(static_cast<size_t>(frames));
  int64_t unit = 0;
  for (int64_t i = 0; i < frames; ++i) {
    const int64_t center = i * kSamplesPerFrame + kSamplesPerFrame / 2;
    while (unit + 1 < static_cast<int64_t>(unit_start.size()) &&
           unit_start[unit + 1] <= center) {
      ++unit;
    }
    u.aligned_labels[i] = u.transcript[unit];
  }
  return u;
}

}  // namespace

Dataset synth_dataset(const SynthConfig& cfg) {
  cfg.validate();
  Dataset ds;
  for (int64_t c = 0; c < cfg.n_classes; ++c) ds.inventory.push_back("c" + std::to_string(c));
  for (int64_t spk = 0; spk < cfg.n_speakers; ++spk) {
    for (int64_t ui = 0; ui < cfg.utterances_per_speaker; ++ui) {
      ds.utterances.push_back(synth_utterance(cfg, spk, ui));
    }
  }
  return ds;
}

Manifest write_synth_dataset(const SynthConfig& cfg, const std::string& out_dir) {
  Dataset ds = synth_dataset(cfg);
  namespace fs = std::filesystem;
  fs::create_directories(out_dir + "/wav");
  fs::create_directories(out_dir + "/txt");
  fs::create_directories(out_dir + "/ali");

  Manifest manifest;
  manifest.dir = out_dir;
  for (const auto& u : ds.utterances) {
    const std::string wav_rel = "wav/" + u.id + ".wav";
    const std::string txt_rel = "txt/" + u.id + ".txt";
    const std::string ali_rel = "ali/" + u.id + ".ali";
    write_wav(path_join(out_dir, wav_rel), u.samples);
    std::vector<std::string> tsyms, asyms;
    for (int32_t c : u.transcript) tsyms.push_back(ds.inventory[c]);
    for (int32_t c : u.aligned_labels) asyms.push_back(ds.inventory[c]);
    write_text_file(path_join(out_dir, txt_rel), join(tsyms, " ") + "\n");
    write_text_file(path_join(out_dir, ali_rel), join(asyms, " ") + "\n");
    manifest.records.push_back({wav_rel, u.speaker, txt_rel, ali_rel});
  }
  write_manifest(path_join(out_dir, "all.tsv"), manifest);
  write_inventory(path_join(out_dir, "phones.txt"), ds.inventory);
  return manifest;
}

}  // namespace cpcx
