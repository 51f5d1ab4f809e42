// abx/dtw.h

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

#ifndef CPCX_ABX_DTW_H_
#define CPCX_ABX_DTW_H_

#include "model/frame_sequence.h"

namespace cpcx {

// Cosine distance 1 - u.v/(|u||v|) between two frames; norms are floored
// at 1e-12 so zero frames stay finite.
double cosine_frame_distance(const float* u, const float* v, int64_t c);

// Dynamic time warping with steps {(1,0),(0,1),(1,1)}, endpoints anchored,
// over the full frame-wise cosine cost matrix. The returned distance is
// the accumulated cost of the optimal path divided by the number of cells
// on that path (ties in accumulated cost resolve to the shorter path).
double dtw_cosine_distance(const FrameSequence& a, const FrameSequence& b);

}  // namespace cpcx

#endif  // CPCX_ABX_DTW_H_
