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

#include "saq/lvq.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "saq/error.h"

namespace saq {

float
LvqCode::step() const {
    if (hi <= lo) {
        return 0.0F;
    }
    return (hi - lo) / static_cast<float>((1U << bits) - 1);
}

std::vector<float>
LvqCode::reconstruct() const {
    std::vector<float> out(codes.size());
    float delta = step();
    for (size_t i = 0; i < codes.size(); ++i) {
        out[i] = lo + delta * static_cast<float>(codes[i]);
    }
    return out;
}

LvqCode
lvq_quantize(std::span<const float> x, std::span<const float> mean, unsigned bits) {
    if (bits < 1 || bits > 16) {
        throw_error(ErrorCode::kInvalidArgument,
                    "lvq_quantize: bits must be in [1, 16], got " + std::to_string(bits));
    }
    check_dim(mean.size(), x.size(), "lvq_quantize mean");
    LvqCode code;
    code.bits = bits;
    code.codes.assign(x.size(), 0);
    if (x.empty()) {
        return code;
    }
    float lo = x[0] - mean[0];
    float hi = lo;
    for (size_t i = 1; i < x.size(); ++i) {
        float v = x[i] - mean[i];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    code.lo = lo;
    code.hi = hi;
    float delta = code.step();
    if (delta == 0.0F) {
        return code;
    }
    const auto max_code = static_cast<float>((1U << bits) - 1);
    for (size_t i = 0; i < x.size(); ++i) {
        float v = x[i] - mean[i];
        float q = std::floor((v - lo) / delta + 0.5F);
        code.codes[i] = static_cast<uint16_t>(std::clamp(q, 0.0F, max_code));
    }
    return code;
}

float
lvq_distance_centered(std::span<const uint16_t> codes, float lo, float step,
                      std::span<const float> q_centered) {
    float sum = 0.0F;
#pragma omp simd reduction(+ : sum)
    for (size_t i = 0; i < codes.size(); ++i) {
        float d = lo + step * static_cast<float>(codes[i]) - q_centered[i];
        sum += d * d;
    }
    return sum;
}

float
lvq_distance(const LvqCode& code, std::span<const float> mean, std::span<const float> q) {
    check_dim(q.size(), code.codes.size(), "lvq_distance query");
    check_dim(mean.size(), code.codes.size(), "lvq_distance mean");
    float delta = code.step();
    float sum = 0.0F;
    for (size_t i = 0; i < q.size(); ++i) {
        float d = code.lo + delta * static_cast<float>(code.codes[i]) + mean[i] - q[i];
        sum += d * d;
    }
    return sum;
}

}  // namespace saq
