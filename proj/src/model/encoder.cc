// model/encoder.cc

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

#include "model/encoder.h"

#include <cmath>

#include "base/error.h"

namespace cpcx {

void EncoderConfig::validate() const {
  if (kernels.size() != strides.size() || kernels.size() != pads.size()) {
    throw Error("encoder config: kernels/strides/pads must have equal length");
  }
  if (channels <= 0) throw Error("encoder config: channels must be positive");
  if (downsampling() != kSamplesPerFrame) {
    throw Error("encoder config: stride product must be 160, got " +
                std::to_string(downsampling()));
  }
}

namespace {

template <typename Real>
NodePtr<Real> uniform_param(const std::string& name, Shape shape, double bound, Rng& rng) {
  std::vector<Real> v(static_cast<size_t>(numel(shape)));
  for (auto& x : v) x = static_cast<Real>(rng.uniform(-bound, bound));
  return parameter<Real>(name, std::move(shape), std::move(v));
}

template <typename Real>
NodePtr<Real> const_param(const std::string& name, Shape shape, Real fill) {
  std::vector<Real> v(static_cast<size_t>(numel(shape)), fill);
  return parameter<Real>(name, std::move(shape), std::move(v));
}

}  // namespace

template <typename Real>
void EncoderParams<Real>::init(const EncoderConfig& cfg, Rng& rng) {
  cfg.validate();
  kernels.clear();
  biases.clear();
  gains.clear();
  shifts.clear();
  const int64_t layers = static_cast<int64_t>(cfg.kernels.size());
  for (int64_t l = 0; l < layers; ++l) {
    const int64_t c_in = l == 0 ? 1 : cfg.channels;
    const int64_t c_out = cfg.channels;
    const double bound = 1.0 / std::sqrt(static_cast<double>(c_in * cfg.kernels[l]));
    const std::string prefix = "enc/l" + std::to_string(l) + "/";
    kernels.push_back(
        uniform_param<Real>(prefix + "kernel", {c_out, c_in, cfg.kernels[l]}, bound, rng));
    biases.push_back(const_param<Real>(prefix + "bias", {c_out}, Real(0)));
    if (cfg.norm == EncoderConfig::Norm::kChannelNorm) {
      gains.push_back(const_param<Real>(prefix + "gain", {c_out}, Real(1)));
      shifts.push_back(const_param<Real>(prefix + "shift", {c_out}, Real(0)));
    }
  }
}

template <typename Real>
void EncoderParams<Real>::collect(std::vector<NodePtr<Real>>& out) const {
  for (size_t l = 0; l < kernels.size(); ++l) {
    out.push_back(kernels[l]);
    out.push_back(biases[l]);
    if (!gains.empty()) {
      out.push_back(gains[l]);
      out.push_back(shifts[l]);
    }
  }
}

template <typename Real>
NodePtr<Real> waveform_node(const float* samples, int64_t n) {
  std::vector<Real> v(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) v[i] = static_cast<Real>(samples[i]);
  return constant<Real>({n, 1}, std::move(v));
}

template <typename Real>
NodePtr<Real> encode(const NodePtr<Real>& waveform, const EncoderConfig& cfg,
                     const EncoderParams<Real>& params) {
  if (waveform->shape.size() != 2 || waveform->shape[1] != 1) {
    throw ShapeError("encode: waveform must be [N x 1], got " + shape_str(waveform->shape));
  }
  const int64_t n = waveform->shape[0];
  if (n < kSamplesPerFrame) {
    throw DataError("encode: input of " + std::to_string(n) +
                    " samples is shorter than one frame (160 samples); output would be empty");
  }
  NodePtr<Real> x = waveform;
  const int64_t layers = static_cast<int64_t>(cfg.kernels.size());
  for (int64_t l = 0; l < layers; ++l) {
    x = conv1d(x, params.kernels[l], params.biases[l], cfg.strides[l], cfg.pads[l]);
    if (cfg.norm == EncoderConfig::Norm::kChannelNorm) {
      x = channel_norm(x, params.gains[l], params.shifts[l], kChannelNormEps);
    }
    x = relu(x);
  }
  return x;
}

int64_t encoded_len(const EncoderConfig& cfg, int64_t n) {
  int64_t t = n;
  for (size_t l = 0; l < cfg.kernels.size(); ++l) {
    t = conv1d_out_len(t, cfg.kernels[l], cfg.strides[l], cfg.pads[l]);
  }
  return t;
}

template struct EncoderParams<float>;
template struct EncoderParams<double>;
template NodePtr<float> waveform_node<float>(const float*, int64_t);
template NodePtr<double> waveform_node<double>(const float*, int64_t);
template NodePtr<float> encode<float>(const NodePtr<float>&, const EncoderConfig&,
                                      const EncoderParams<float>&);
template NodePtr<double> encode<double>(const NodePtr<double>&, const EncoderConfig&,
                                        const EncoderParams<double>&);

}  // namespace cpcx
