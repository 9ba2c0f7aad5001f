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

#include <cmath>

#include "oracles/oracles.h"

namespace saq::oracle {

double
grid_coordinate(uint16_t code, unsigned bits) {
    return static_cast<double>(code) + 0.5 - std::ldexp(1.0, static_cast<int>(bits) - 1);
}

double
code_cosine(std::span<const uint16_t> codes, unsigned bits, std::span<const float> o) {
    double dot = 0.0;
    double xx = 0.0;
    double oo = 0.0;
    for (size_t i = 0; i < codes.size(); ++i) {
        const double x = grid_coordinate(codes[i], bits);
        dot += x * o[i];
        xx += x * x;
        oo += static_cast<double>(o[i]) * o[i];
    }
    if (xx == 0.0 || oo == 0.0) {
        return 0.0;
    }
    return dot / std::sqrt(xx * oo);
}

std::vector<std::vector<uint16_t>>
all_codewords(size_t dim, unsigned bits) {
    const uint64_t levels = 1ULL << bits;
    uint64_t total = 1;
    for (size_t i = 0; i < dim; ++i) {
        total *= levels;
    }
    std::vector<std::vector<uint16_t>> out(total, std::vector<uint16_t>(dim));
    for (uint64_t idx = 0; idx < total; ++idx) {
        uint64_t rest = idx;
        for (size_t i = dim; i-- > 0;) {
            out[idx][i] = static_cast<uint16_t>(rest % levels);
            rest /= levels;
        }
    }
    return out;
}

Codeword
best_codeword(std::span<const float> o, unsigned bits) {
    Codeword best;
    for (auto& c : all_codewords(o.size(), bits)) {
        const double cos = code_cosine(c, bits, o);
        if (cos > best.cosine) {
            best.cosine = cos;
            best.codes = c;
        }
    }
    return best;
}

}  // namespace saq::oracle
