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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "saq/types.h"

namespace saq {

enum class TransformKind : uint8_t {
    kRotation = 0,
    kPca = 1,
    kPcaThenRotation = 2,
};

/// Orthonormal linear map plus centering vector: y = matrix * (x - mean).
///
/// For PCA models the rows of `matrix` are principal directions and
/// `variances` holds the per-output-dimension variance of the fitted data
/// in descending order. Plain rotations carry zero variances unless they
/// were composed onto a PCA model.
struct TransformModel {
    TransformKind kind = TransformKind::kRotation;
    RowMatrixF matrix;
    std::vector<float> variances;
    std::vector<float> mean;
    uint64_t seed = 0;

    size_t
    dim() const {
        return static_cast<size_t>(matrix.rows());
    }

    std::vector<float>
    apply(std::span<const float> v) const;

    void
    apply_into(std::span<const float> v, std::span<float> out) const;

    /// Row-wise apply; data is N x D.
    RowMatrixF
    apply_batch(const RowMatrixF& data) const;

    void
    save(const std::string& path) const;

    static TransformModel
    load(const std::string& path);
};

/// Seeded Haar-style random rotation: QR of a Gaussian matrix with the
/// triangular factor's diagonal forced positive.
TransformModel
gen_rotation(size_t dim, uint64_t seed);

struct PcaOptions {
    /// Fit on a uniform row sample when N exceeds this. Zero disables sampling.
    size_t max_samples = 100000;
};

/// PCA with population (1/N) covariance. Eigenvectors are sign-normalised
/// so that each row's largest-magnitude entry is positive.
TransformModel
fit_pca(const RowMatrixF& data, uint64_t seed, const PcaOptions& options = {});

/// Single model equivalent to applying `first` then `second`. The result
/// keeps `first`'s mean; `second` must have zero mean. Variances are pushed
/// through the second map assuming decorrelated inputs (exact for PCA).
TransformModel
compose(const TransformModel& first, const TransformModel& second);

/// Max-abs deviation of matrix^T * matrix from identity.
double
orthonormality_error(const RowMatrixF& matrix);

/// Column means in double precision.
std::vector<float>
column_mean(const RowMatrixF& data);

/// Per-column second moment E[x^2] (population), double accumulation.
std::vector<float>
column_second_moment(const RowMatrixF& data);

}  // namespace saq
