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
#include <limits>
#include <map>

#include "oracles/oracles.h"

namespace saq::oracle {

namespace {

struct Enumerator {
    std::span<const float> variances;
    size_t quota;
    size_t g;
    std::vector<unsigned> widths;
    // Best error per segment count, and the plan achieving it.
    std::map<size_t, std::pair<double, std::vector<Segment>>> best;
    std::vector<Segment> current;

    void
    run(size_t start, size_t cost, double error) {
        if (start == variances.size()) {
            auto it = best.find(current.size());
            if (it == best.end() || error < it->second.first) {
                best[current.size()] = {error, current};
            }
            return;
        }
        for (size_t end = start + g; end <= variances.size(); end += g) {
            const size_t len = end - start;
            double sum = 0.0;
            for (size_t d = start; d < end; ++d) {
                sum += variances[d];
            }
            for (unsigned b : widths) {
                if (cost + len * b > quota) {
                    continue;
                }
                current.push_back({len, b});
                run(end, cost + len * b, error + std::ldexp(sum, -static_cast<int>(b)));
                current.pop_back();
            }
        }
    }
};

}  // namespace

PlanChoice
enumerate_plans(std::span<const float> variances, size_t quota, size_t granularity, unsigned min_bits,
                unsigned max_bits, double tolerance) {
    Enumerator e{variances, quota, granularity, {0}, {}, {}};
    for (unsigned b = min_bits; b <= max_bits; ++b) {
        e.widths.push_back(b);
    }
    e.run(0, 0, 0.0);
    PlanChoice choice;
    choice.optimum = std::numeric_limits<double>::infinity();
    for (const auto& [count, entry] : e.best) {
        choice.optimum = std::min(choice.optimum, entry.first);
    }
    for (const auto& [count, entry] : e.best) {
        if (entry.first <= choice.optimum * (1.0 + tolerance)) {
            choice.selected_error = entry.first;
            choice.selected_segments = count;
            choice.selected = entry.second;
            break;
        }
    }
    return choice;
}

}  // namespace saq::oracle
