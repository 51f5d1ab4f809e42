// data/dataset.cc

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

#include "data/dataset.h"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "base/error.h"
#include "base/io_util.h"
#include "data/wav.h"

namespace cpcx {

Manifest read_manifest(const std::string& path) {
  Manifest m;
  m.dir = dirname(path);
  for (const std::string& line : read_lines(path)) {
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 4) {
      throw DataError("manifest: expected 4 tab-separated fields, got " +
                      std::to_string(fields.size()) + " in line: " + line);
    }
    m.records.push_back({fields[0], fields[1], fields[2], fields[3]});
  }
  return m;
}

void write_manifest(const std::string& path, const Manifest& manifest) {
  std::string out;
  for (const auto& r : manifest.records) {
    out += r.audio + "\t" + r.speaker + "\t" + r.transcript + "\t" + r.alignment + "\n";
  }
  write_text_file(path, out);
}

std::vector<std::string> read_inventory(const std::string& path) {
  std::vector<std::string> symbols;
  for (const std::string& line : read_lines(path)) {
    if (line.empty()) continue;
    symbols.push_back(line);
  }
  if (symbols.empty()) throw DataError("inventory: no symbols in " + path);
  return symbols;
}

void write_inventory(const std::string& path, const std::vector<std::string>& symbols) {
  std::string out;
  for (const auto& s : symbols) out += s + "\n";
  write_text_file(path, out);
}

int64_t Dataset::total_samples() const {
  int64_t n = 0;
  for (const auto& u : utterances) n += u.n_samples();
  return n;
}

std::vector<std::string> Dataset::speakers() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& u : utterances) {
    if (seen.insert(u.speaker).second) out.push_back(u.speaker);
  }
  return out;
}

Dataset load_dataset(const Manifest& manifest, const std::vector<std::string>& inventory) {
  Dataset ds;
  ds.inventory = inventory;
  std::unordered_map<std::string, int32_t> index;
  for (size_t i = 0; i < inventory.size(); ++i) index[inventory[i]] = static_cast<int32_t>(i);

  auto to_indices = [&](const std::vector<std::string>& symbols, const std::string& what,
                        const std::string& utt) {
    std::vector<int32_t> out;
    out.reserve(symbols.size());
    for (const auto& s : symbols) {
      auto it = index.find(s);
      if (it == index.end()) {
        throw DataError(what + " of " + utt + " uses symbol '" + s +
                        "' absent from the inventory");
      }
      out.push_back(it->second);
    }
    return out;
  };

  for (const auto& r : manifest.records) {
    Utterance u;
    u.id = basename_no_ext(r.audio);
    u.speaker = r.speaker;
    if (u.speaker.empty()) throw DataError("manifest: empty speaker id for " + r.audio);
    u.samples = read_wav(path_join(manifest.dir, r.audio));
    const auto lines = read_lines(path_join(manifest.dir, r.transcript));
    if (lines.empty()) throw DataError("transcript file empty: " + r.transcript);
    u.transcript = to_indices(split_ws(lines[0]), "transcript", u.id);
    if (u.transcript.empty()) throw DataError("transcript of " + u.id + " is empty");
    if (r.alignment != "-" && !r.alignment.empty()) {
      const auto ali_lines = read_lines(path_join(manifest.dir, r.alignment));
      if (ali_lines.empty()) throw DataError("alignment file empty: " + r.alignment);
      u.aligned_labels = to_indices(split_ws(ali_lines[0]), "alignment", u.id);
      if (static_cast<int64_t>(u.aligned_labels.size()) != u.n_frames()) {
        throw DataError("alignment of " + u.id + " has " +
                        std::to_string(u.aligned_labels.size()) + " labels for " +
                        std::to_string(u.n_frames()) + " frames");
      }
    }
    ds.utterances.push_back(std::move(u));
  }
  return ds;
}

std::array<Manifest, 3> make_splits(const Manifest& manifest,
                                    const std::array<double, 3>& ratios, uint64_t seed) {
  std::vector<std::string> speakers;
  std::unordered_set<std::string> seen;
  for (const auto& r : manifest.records) {
    if (seen.insert(r.speaker).second) speakers.push_back(r.speaker);
  }
  if (speakers.size() < 3) {
    throw DataError("make_splits: need at least 3 speakers, got " +
                    std::to_string(speakers.size()));
  }
  double ratio_sum = ratios[0] + ratios[1] + ratios[2];
  if (ratio_sum <= 0) throw DataError("make_splits: ratios must sum to a positive value");

  // Deterministic Fisher-Yates on the speaker list.
  Rng rng(seed);
  for (size_t i = speakers.size(); i > 1; --i) {
    std::swap(speakers[i - 1], speakers[rng.uniform_int(static_cast<int64_t>(i))]);
  }

  // Largest-remainder allocation, at least one speaker per nonzero ratio.
  const int64_t n = static_cast<int64_t>(speakers.size());
  std::array<int64_t, 3> count{};
  std::array<double, 3> frac{};
  int64_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = ratios[i] / ratio_sum * n;
    count[i] = static_cast<int64_t>(exact);
    frac[i] = exact - static_cast<double>(count[i]);
    assigned += count[i];
  }
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (frac[i] > frac[best]) best = i;
    }
    ++count[best];
    frac[best] = -1;
    ++assigned;
  }
  for (int i = 0; i < 3; ++i) {
    if (ratios[i] > 0 && count[i] == 0) {
      int donor = 0;
      for (int j = 1; j < 3; ++j) {
        if (count[j] > count[donor]) donor = j;
      }
      if (count[donor] <= 1) throw DataError("make_splits: not enough speakers for the ratios");
      --count[donor];
      ++count[i];
    }
  }

  std::unordered_map<std::string, int> split_of;
  int64_t cursor = 0;
  for (int i = 0; i < 3; ++i) {
    for (int64_t j = 0; j < count[i]; ++j) split_of[speakers[cursor++]] = i;
  }

  std::array<Manifest, 3> out;
  for (auto& m : out) m.dir = manifest.dir;
  for (const auto& r : manifest.records) out[split_of.at(r.speaker)].records.push_back(r);
  return out;
}

}  // namespace cpcx
