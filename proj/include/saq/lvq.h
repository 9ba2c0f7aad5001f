// Copyright 2026-present the saqvq authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace saq {

/// Per-vector range scalar quantization of a mean-centred vector.
struct LvqCode {
    std::vector<uint16_t> codes;
    float lo = 0.0F;
    float hi = 0.0F;
    unsigned bits = 0;

    /// Grid step; zero for a constant vector.
    float
    step() const;

    std::vector<float>
    reconstruct() const;
};

LvqCode
lvq_quantize(std::span<const float> x, std::span<const float> mean, unsigned bits);

/// Squared distance between the decoded vector (plus mean) and q.
float
lvq_distance(const LvqCode& code, std::span<const float> mean, std::span<const float> q);

/// Same as lvq_distance when q has already been centred on the mean.
float
lvq_distance_centered(std::span<const uint16_t> codes, float lo, float step,
                      std::span<const float> q_centered);

}  // namespace saq
