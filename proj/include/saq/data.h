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
#include <string>
#include <string_view>

#include "saq/types.h"

namespace saq {

using RowMatrixI = Eigen::Matrix<int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class VecsFormat {
    kFvecs,
    kBvecs,
    kIvecs,
    kRawF32,
};

VecsFormat
parse_vecs_format(std::string_view name);

/// Guesses the format from the file extension (.fvecs, .bvecs, .ivecs, .f32/.bin).
VecsFormat
vecs_format_from_path(const std::string& path);

/// Reads fvecs/bvecs/ivecs records, or a headerless f32 matrix when
/// `format` is kRawF32 (then `raw_dim` is required).
RowMatrixF
read_vecs(const std::string& path, VecsFormat format, size_t raw_dim = 0);

RowMatrixI
read_ivecs(const std::string& path);

/// Writes every row as one record. bvecs values are rounded and clamped to
/// [0, 255].
void
write_vecs(const std::string& path, const RowMatrixF& data, VecsFormat format);

void
write_ivecs(const std::string& path, const RowMatrixI& data);

enum class SyntheticKind {
    kGaussian,
    kSkewed,
    kClustered,
};

struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::kGaussian;
    size_t n = 0;
    size_t dim = 0;
    /// Spectrum decay: dimension i (1-based) is scaled by i^-alpha before a
    /// random rotation. Used by kSkewed, and by kClustered for the spread
    /// inside each blob.
    double alpha = 1.0;
    /// Number of blobs for kClustered.
    size_t clusters = 64;
    /// Standard deviation of blob centres relative to the leading in-blob
    /// scale.
    double center_scale = 1.0;
    uint64_t seed = 0;
};

SyntheticKind
parse_synthetic_kind(std::string_view name);

RowMatrixF
gen_synthetic(const SyntheticSpec& spec);

struct Split {
    RowMatrixF base;
    RowMatrixF queries;
};

/// Removes `n_queries` uniformly chosen rows to serve as queries.
Split
hold_out_queries(const RowMatrixF& data, size_t n_queries, uint64_t seed);

struct TopK {
    RowMatrixI ids;      ///< n_queries x k
    RowMatrixF distances;  ///< squared L2, non-decreasing per row
};

/// Exact top-k under squared L2 with double accumulation; ties go to the
/// lower id.
TopK
brute_force_topk(const RowMatrixF& data, const RowMatrixF& queries, size_t k);

/// Content fingerprint of (data, queries, k).
uint64_t
ground_truth_key(const RowMatrixF& data, const RowMatrixF& queries, size_t k);

/// Loads `<prefix>.gt.ivecs`/`.gt.fvecs` when their recorded key matches,
/// otherwise recomputes and rewrites them.
TopK
cached_ground_truth(const RowMatrixF& data, const RowMatrixF& queries, size_t k,
                    const std::string& prefix);

}  // namespace saq
