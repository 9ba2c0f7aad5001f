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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "saq/types.h"

namespace saq {

constexpr unsigned kDefaultAdjustRounds = 6;

/// B-bit grid code of a rotated, centred vector o together with the
/// per-vector factors the estimator needs.
///
/// Dimension i decodes to step() * (codes[i] + 0.5) - v_max, a midpoint of
/// one of 2^B equal cells spanning [-v_max, v_max].
struct CaqCode {
    std::vector<uint16_t> codes;
    float v_max = 0.0F;
    float norm_sq = 0.0F;  ///< ||o||^2
    float dot_oq = 0.0F;   ///< <decoded(o), o>, for the full-width code
    unsigned bits = 0;

    float
    step() const;

    /// Zero input vector: codes carry no direction and the estimator
    /// contributes nothing.
    bool
    degenerate() const {
        return v_max == 0.0F;
    }

    std::vector<float>
    reconstruct() const;
};

/// Query-side state shared by every code scanned against one query.
struct CaqQueryContext {
    std::vector<float> q;
    float q_sum = 0.0F;
    float q_norm_sq = 0.0F;

    /// Optional 8-bit query used by the integer fast path. Empty unless
    /// built with `quantize_query = true`.
    std::vector<int8_t> q_int;
    float q_int_scale = 0.0F;

    static CaqQueryContext
    make(std::span<const float> q, bool quantize_query = false);
};

struct AdjustOptions {
    unsigned rounds = kDefaultAdjustRounds;
    /// A move must raise the cosine by more than this relative amount.
    double rel_tolerance = 1e-12;
    /// When set, receives the cosine after every accepted move.
    std::vector<double>* cosine_trace = nullptr;
};

/// Nearest-cell initialisation: v_max = max|o_i|, cell = floor((o_i + v_max) / step),
/// with the top boundary clamped into the last cell.
CaqCode
caq_init(std::span<const float> o, unsigned bits);

/// Coordinate-wise code refinement. Each dimension tries a +step then a
/// -step move and keeps it only if the cosine between the decoded vector
/// and o strictly increases. Stops after `rounds` sweeps or the first
/// sweep with no accepted move.
CaqCode
caq_adjust(std::span<const float> o, const CaqCode& code, const AdjustOptions& options = {});

/// caq_init followed by caq_adjust.
CaqCode
caq_quantize(std::span<const float> o, unsigned bits, unsigned rounds = kDefaultAdjustRounds);

/// Cosine between the decoded code and o; 0 for degenerate inputs.
double
caq_cosine(const CaqCode& code, std::span<const float> o);

/// <decoded code, q> computed from integer codes:
/// step * <codes, q> + q_sum * (step / 2 - v_max).
float
caq_raw_ip(std::span<const uint16_t> codes, unsigned bits, float v_max,
           const CaqQueryContext& ctx, unsigned shift = 0);

/// Estimate of <o, q>: raw_ip * norm_sq / dot_oq.
float
caq_estimate_ip(const CaqCode& code, const CaqQueryContext& ctx);

/// Estimate of ||o - q||^2 = norm_sq + q_norm_sq - 2 * <o, q>_est.
float
caq_estimate_dist(const CaqCode& code, const CaqQueryContext& ctx);

/// Keeps the top b bits of every field. The returned code reuses the
/// full-width dot_oq factor.
CaqCode
caq_prefix(const CaqCode& code, unsigned b);

/// Contiguous storage for many CAQ codes of the same width. Codes are kept
/// unpacked in memory and bit-packed on disk.
class CaqCodeBlock {
public:
    CaqCodeBlock() = default;
    CaqCodeBlock(size_t dim, unsigned bits);

    size_t
    size() const {
        return v_max_.size();
    }
    size_t
    dim() const {
        return dim_;
    }
    unsigned
    bits() const {
        return bits_;
    }

    void
    reserve(size_t n);

    void
    append(const CaqCode& code);

    void
    resize(size_t n);

    void
    set(size_t i, const CaqCode& code);

    CaqCode
    get(size_t i) const;

    std::span<const uint16_t>
    codes(size_t i) const {
        return {codes_.data() + i * dim_, dim_};
    }
    float
    v_max(size_t i) const {
        return v_max_[i];
    }
    float
    norm_sq(size_t i) const {
        return norm_sq_[i];
    }
    float
    dot_oq(size_t i) const {
        return dot_oq_[i];
    }

    /// <o_i, q> estimate, optionally from a `prefix_bits`-wide prefix.
    float
    estimate_ip(size_t i, const CaqQueryContext& ctx, unsigned prefix_bits = 0) const;

    float
    estimate_dist(size_t i, const CaqQueryContext& ctx, unsigned prefix_bits = 0) const;

    /// Bytes per record on disk: packed codes plus three f32 factors.
    size_t
    record_bytes() const;

    void
    write(std::ostream& out) const;

    static CaqCodeBlock
    read(std::istream& in, const std::string& what);

    void
    save(const std::string& path) const;

    static CaqCodeBlock
    load(const std::string& path);

private:
    size_t dim_ = 0;
    unsigned bits_ = 0;
    std::vector<uint16_t> codes_;
    std::vector<float> v_max_;
    std::vector<float> norm_sq_;
    std::vector<float> dot_oq_;
};

/// Quantizes every row (already rotated and centred).
CaqCodeBlock
caq_quantize_batch(const RowMatrixF& rotated, unsigned bits,
                   unsigned rounds = kDefaultAdjustRounds);

}  // namespace saq
