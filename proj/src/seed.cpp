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

#include "saq/seed.h"

#include <cmath>

#include "saq/types.h"

namespace saq {

uint64_t
splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

uint64_t
fnv1a64(std::span<const std::byte> bytes, uint64_t state) {
    for (auto b : bytes) {
        state ^= static_cast<uint64_t>(b);
        state *= 0x100000001b3ULL;
    }
    return state;
}

uint64_t
derive_seed(uint64_t root, std::string_view label) {
    return splitmix64(root ^ fnv1a64(std::as_bytes(std::span(label.data(), label.size()))));
}

uint64_t
derive_seed(uint64_t root, uint64_t index) {
    return splitmix64(root + splitmix64(index));
}

float
l2_sqr(std::span<const float> a, std::span<const float> b) {
    float sum = 0.0F;
    for (size_t i = 0; i < a.size(); ++i) {
        float d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

float
inner_product(std::span<const float> a, std::span<const float> b) {
    float sum = 0.0F;
    for (size_t i = 0; i < a.size(); ++i) {
        sum += a[i] * b[i];
    }
    return sum;
}

}  // namespace saq
