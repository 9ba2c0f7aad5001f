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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "saq/caq.h"
#include "saq/transforms.h"
#include "saq/types.h"

namespace saq {

constexpr size_t kDefaultSegmentGranularity = 64;
constexpr unsigned kMaxSegmentBits = 12;
constexpr float kDefaultConfidence = 4.0F;

struct Segment {
    size_t len = 0;
    unsigned bits = 0;

    bool
    operator==(const Segment&) const = default;
};

/// Contiguous dimension segments with a bit width each. Segments appear in
/// dimension order; a width of zero drops the segment.
struct QuantizationPlan {
    std::vector<Segment> segments;
    size_t total_dims = 0;
    size_t quota = 0;
    double modeled_error = 0.0;

    /// Sum of len * bits.
    size_t
    cost_bits() const;

    size_t
    offset(size_t segment) const;

    /// Text format: "dims", "quota", "modeled_error", "segments" header lines,
    /// then one "len bits" line per segment.
    void
    save(const std::string& path) const;

    static QuantizationPlan
    load(const std::string& path);

    std::string
    to_string() const;

    /// One line, e.g. "64x7 128x2 64x0".
    std::string
    summary() const;
};

/// Modeled estimation error of one segment: 2^-bits * sum(variances).
/// Zero bits means the segment is dropped and contributes its full variance.
double
model_error(std::span<const float> variances, unsigned bits);

/// Modeled error of a plan over the given (padded) per-dimension variances.
double
model_error(const QuantizationPlan& plan, std::span<const float> variances);

struct PlanSearchOptions {
    /// Segment lengths are multiples of this; dimensions are zero-padded to it.
    size_t granularity = kDefaultSegmentGranularity;
    unsigned min_bits = 1;
    unsigned max_bits = kMaxSegmentBits;
    /// Plans within this relative margin of the optimum compete on segment
    /// count; the fewest segments wins.
    double tolerance = 1e-3;
};

size_t
padded_dim(size_t dim, size_t granularity);

/// Granularity actually used for `dim` dimensions: vectors narrower than one
/// granule form a single granule of their own width instead of being padded.
size_t
effective_granularity(size_t dim, size_t granularity);

/// Dynamic-programming search for the plan with least modeled error whose
/// cost fits in `quota` bits. Variances must be sorted non-increasing.
QuantizationPlan
search_plan(std::span<const float> variances, int64_t quota, const PlanSearchOptions& options = {});

/// Global state shared by every code set built from one plan.
struct SaqModel {
    QuantizationPlan plan;
    /// One rotation per segment; dropped segments keep an identity map.
    std::vector<TransformModel> rotations;
    /// Per-dimension second moments of the padded input before the segment
    /// rotations, length plan.total_dims.
    std::vector<float> variances;
    uint64_t seed = 0;
    unsigned rounds = kDefaultAdjustRounds;

    size_t
    dim() const {
        return plan.total_dims;
    }

    /// Applies the per-segment rotations to a padded vector.
    void
    rotate_into(std::span<const float> in, std::span<float> out) const;

    RowMatrixF
    rotate_batch(const RowMatrixF& data) const;

    void
    save(const std::string& dir) const;

    static SaqModel
    load(const std::string& dir);
};

/// Seed used for segment s; segment 0 reuses the root seed so a
/// single-segment plan matches flat CAQ.
uint64_t
segment_seed(uint64_t seed, size_t segment);

/// Draws per-segment rotations and measures per-dimension second moments on the
/// given (padded, centred) training rows.
SaqModel
train_saq_model(const RowMatrixF& data, const QuantizationPlan& plan, uint64_t seed,
                unsigned rounds = kDefaultAdjustRounds);

/// Per-vector codes for every segment of a plan.
struct SaqCodeSet {
    std::shared_ptr<const SaqModel> model;
    /// One block per segment; dropped segments hold an empty block.
    std::vector<CaqCodeBlock> segments;
    /// ||o||^2 over all dimensions, dropped ones included.
    std::vector<float> norm_sq;

    size_t
    size() const {
        return norm_sq.size();
    }

    /// Bytes per vector: packed codes and factors of coded segments plus the
    /// total norm.
    size_t
    bytes_per_vector() const;

    void
    save(const std::string& dir) const;

    static SaqCodeSet
    load(const std::string& dir);
};

/// Encodes rows that are already in the model's padded input basis.
SaqCodeSet
saq_encode(std::shared_ptr<const SaqModel> model, const RowMatrixF& data);

/// Encodes rows that have already been through SaqModel::rotate_batch.
SaqCodeSet
saq_encode_rotated(std::shared_ptr<const SaqModel> model, const RowMatrixF& rotated);

/// Pads data to plan.total_dims after an optional PCA projection, trains the
/// per-segment rotations and encodes everything.
SaqCodeSet
saq_quantize(const RowMatrixF& data, const QuantizationPlan& plan, const TransformModel* pca,
             uint64_t seed, unsigned rounds = kDefaultAdjustRounds);

/// Pads or validates `v` to `dim`.
std::vector<float>
pad_to(std::span<const float> v, size_t dim);

RowMatrixF
pad_columns(const RowMatrixF& data, size_t dim);

struct SaqQueryContext {
    std::vector<CaqQueryContext> segments;
    std::vector<float> sigma;  ///< per segment, sqrt(sum q_i^2 sigma_i^2)
    /// remaining[k]: m * (sigma of coded segments k.. + sigma of dropped
    /// segments), indexed by coded-segment stage. Size = coded + 1.
    std::vector<float> remaining;
    float q_norm_sq = 0.0F;
    float m = kDefaultConfidence;
};

/// Builds the context from a query already in the model's padded basis
/// (before per-segment rotation).
SaqQueryContext
make_saq_query_context(const SaqModel& model, std::span<const float> q, float m = kDefaultConfidence);

/// Same as above with the rotated query supplied by the caller (it must equal
/// SaqModel::rotate_into applied to `q_projected`).
SaqQueryContext
make_saq_query_context(const SaqModel& model, std::span<const float> q_projected,
                       std::span<const float> q_rotated, float m = kDefaultConfidence);

/// Projects a raw query through `pca` (when given), pads and builds the context.
SaqQueryContext
saq_query_context(std::span<const float> q_raw, const TransformModel* pca, const SaqModel& model,
                  float m = kDefaultConfidence);

struct MultiStageResult {
    float distance = 0.0F;
    bool pruned = false;
    size_t bits_accessed = 0;
};

/// Segment-by-segment distance estimate. When `threshold` is set, stops as
/// soon as the lower bound norms - 2 * (partial_ip + remaining) exceeds it.
MultiStageResult
saq_estimate_multistage(const SaqCodeSet& codes, size_t row, const SaqQueryContext& ctx,
                        std::optional<float> threshold = std::nullopt);

/// Per-segment <o_seg, q_seg> estimates (0 for dropped segments).
std::vector<float>
saq_segment_estimates(const SaqCodeSet& codes, size_t row, const SaqQueryContext& ctx);

}  // namespace saq
