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

#include <cstddef>
#include <cstdint>
#include <span>

#include <Eigen/Dense>

namespace saq {

/// Row-major float matrix; one vector per row.
using RowMatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VectorF = Eigen::VectorXf;

inline std::span<const float>
row_span(const RowMatrixF& m, Eigen::Index row) {
    return {m.data() + row * m.cols(), static_cast<size_t>(m.cols())};
}

inline std::span<float>
row_span(RowMatrixF& m, Eigen::Index row) {
    return {m.data() + row * m.cols(), static_cast<size_t>(m.cols())};
}

inline Eigen::Map<const Eigen::VectorXf>
as_eigen(std::span<const float> v) {
    return {v.data(), static_cast<Eigen::Index>(v.size())};
}

/// Squared Euclidean distance accumulated in float.
float
l2_sqr(std::span<const float> a, std::span<const float> b);

float
inner_product(std::span<const float> a, std::span<const float> b);

}  // namespace saq
