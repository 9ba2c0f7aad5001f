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
#include <vector>

#include "saq/types.h"

namespace saq {

struct KMeansOptions {
    size_t iters = 25;
    uint64_t seed = 0;
    /// k-means++ seeding; otherwise k distinct random rows.
    bool plus_plus = true;
    /// Train on a uniform sample of at most this many rows (0 = all rows).
    size_t max_train = 0;
};

struct KMeansResult {
    RowMatrixF centroids;
    /// Sum of squared distances to the assigned centroid, measured at the
    /// assignment step of each iteration.
    std::vector<double> distortion;
};

/// Lloyd iterations. Empty clusters are re-seeded from the points farthest
/// from their current centroid.
KMeansResult
kmeans(const RowMatrixF& data, size_t k, const KMeansOptions& options);

/// Index of the nearest centroid for every row (ties to the lower index).
/// Optionally returns the squared distance to it.
std::vector<uint32_t>
assign_nearest(const RowMatrixF& data, const RowMatrixF& centroids,
               std::vector<float>* distances = nullptr);

}  // namespace saq
