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
#include <string>
#include <vector>

#include "saq/transforms.h"
#include "saq/types.h"

namespace saq {

/// Product quantizer with M sub-codebooks of K centroids each. Input
/// vectors are zero-padded up to a multiple of M.
struct PqModel {
    size_t dim = 0;  ///< input dimension before padding
    size_t m = 0;
    size_t k = 0;
    size_t sub_dim = 0;
    /// m x k x sub_dim, contiguous.
    std::vector<float> codebooks;
    bool trained = false;

    std::span<const float>
    centroid(size_t sub, size_t j) const {
        return {codebooks.data() + (sub * k + j) * sub_dim, sub_dim};
    }

    size_t
    padded_dim() const {
        return m * sub_dim;
    }

    /// M * log2(K) / D.
    double
    bits_per_dim() const;

    void
    save(const std::string& path) const;

    static PqModel
    load(const std::string& path);
};

struct PqTrainOptions {
    size_t iters = 25;
    uint64_t seed = 0;
    size_t max_train = 65536;
};

/// Per-subspace k-means with k-means++ seeding. K must be <= 256 so codes
/// fit in one byte per subspace.
PqModel
pq_train(const RowMatrixF& data, size_t m, size_t k, const PqTrainOptions& options = {});

std::vector<uint8_t>
pq_encode(const PqModel& model, std::span<const float> x);

void
pq_encode_into(const PqModel& model, std::span<const float> x, std::span<uint8_t> code);

std::vector<float>
pq_reconstruct(const PqModel& model, std::span<const uint8_t> code);

/// LUT[sub * K + j] = ||q_sub - codebook_sub[j]||^2.
std::vector<float>
pq_lut(const PqModel& model, std::span<const float> q);

float
pq_adc_lut(std::span<const float> lut, std::span<const uint8_t> code, size_t k);

/// Asymmetric distance: sum over subspaces of the LUT entry for code[sub].
float
pq_adc(const PqModel& model, std::span<const uint8_t> code, std::span<const float> q);

/// Keeps only the leading `kept_dims` PCA coordinates, stored as f32.
struct PcaDropModel {
    size_t kept_dims = 0;
    TransformModel pca;

    std::vector<float>
    encode(std::span<const float> x) const;

    /// Leading kept_dims coordinates of pca.apply(q).
    std::vector<float>
    project_query(std::span<const float> q) const;
};

PcaDropModel
make_pca_drop(TransformModel pca, size_t kept_dims);

/// kept_dims such that kept_dims * 32 bits ~= bits_per_dim * D.
size_t
pca_drop_dims_for_rate(size_t dim, double bits_per_dim);

float
pca_drop_distance(const PcaDropModel& model, std::span<const float> stored_leading,
                  std::span<const float> q);

/// Distance on already-projected leading coordinates.
float
pca_drop_distance_projected(std::span<const float> stored_leading,
                            std::span<const float> q_leading);

}  // namespace saq
