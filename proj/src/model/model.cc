// model/model.cc

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

#include "model/model.h"

#include <cmath>

namespace cpcx {

template <typename Real>
void CpcModel<Real>::init(uint64_t seed) {
  enc_cfg.validate();
  rec_cfg.validate();
  pred_cfg.validate(rec_cfg.hidden);
  Rng root(seed);
  Rng enc_rng = root.split(1);
  Rng seq_rng = root.split(2);
  Rng pred_rng = root.split(3);
  encoder.init(enc_cfg, enc_rng);
  sequence.init(rec_cfg, enc_cfg.channels, seq_rng);
  predictor.init(pred_cfg, enc_cfg.channels, rec_cfg.hidden, pred_rng);
  if (n_classes > 0) {
    Rng head_rng = root.split(4);
    const double bound = 1.0 / std::sqrt(static_cast<double>(rec_cfg.hidden));
    std::vector<Real> w(static_cast<size_t>(n_classes * rec_cfg.hidden));
    for (auto& v : w) v = static_cast<Real>(head_rng.uniform(-bound, bound));
    head_w = parameter<Real>("sup/w", {n_classes, rec_cfg.hidden}, std::move(w));
    head_b = parameter<Real>("sup/b", {n_classes},
                             std::vector<Real>(static_cast<size_t>(n_classes), Real(0)));
  }
}

template <typename Real>
std::vector<NodePtr<Real>> CpcModel<Real>::parameters() const {
  std::vector<NodePtr<Real>> out;
  encoder.collect(out);
  sequence.collect(out);
  predictor.collect(out);
  if (head_w) {
    out.push_back(head_w);
    out.push_back(head_b);
  }
  return out;
}

template <typename Real>
NodePtr<Real> CpcModel<Real>::encode_window(const float* samples, int64_t n) const {
  return encode(waveform_node<Real>(samples, n), enc_cfg, encoder);
}

template <typename Real>
NodePtr<Real> CpcModel<Real>::context_of(const NodePtr<Real>& encoded) const {
  return context(encoded, rec_cfg, sequence);
}

template <typename Real>
void CpcModel<Real>::zero_grad() const {
  for (const auto& p : parameters()) p->zero_grad();
}

FrameSequence context_features(const CpcModel<float>& model, const float* samples, int64_t n) {
  auto enc = model.encode_window(samples, n);
  auto ctx = model.context_of(enc);
  return to_frames(ctx);
}

FrameSequence encoder_features(const CpcModel<float>& model, const float* samples, int64_t n) {
  return to_frames(model.encode_window(samples, n));
}

template struct CpcModel<float>;
template struct CpcModel<double>;

}  // namespace cpcx
