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

#include <algorithm>
#include <numeric>

#include "oracles/oracles.h"

namespace saq::oracle {

TopK
naive_topk(const RowMatrixF& data, const RowMatrixF& queries, size_t k) {
    TopK out;
    out.ids.resize(queries.rows(), static_cast<Eigen::Index>(k));
    out.distances.resize(queries.rows(), static_cast<Eigen::Index>(k));
    std::vector<std::pair<double, int32_t>> all(static_cast<size_t>(data.rows()));
    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
        for (Eigen::Index i = 0; i < data.rows(); ++i) {
            double d = 0.0;
            for (Eigen::Index j = 0; j < data.cols(); ++j) {
                const double diff = static_cast<double>(data(i, j)) - static_cast<double>(queries(q, j));
                d += diff * diff;
            }
            all[static_cast<size_t>(i)] = {d, static_cast<int32_t>(i)};
        }
        std::sort(all.begin(), all.end());
        for (size_t j = 0; j < k; ++j) {
            out.ids(q, static_cast<Eigen::Index>(j)) = all[j].second;
            out.distances(q, static_cast<Eigen::Index>(j)) = static_cast<float>(all[j].first);
        }
    }
    return out;
}

}  // namespace saq::oracle
