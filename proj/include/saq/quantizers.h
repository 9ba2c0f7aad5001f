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
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "saq/types.h"

namespace saq {

enum class QuantizerKind {
    kExact,
    kCaq,
    kSaq,
    kLvq,
    kPq,
    kPcaDrop,
};

std::string_view
to_string(QuantizerKind kind);

QuantizerKind
parse_quantizer_kind(std::string_view name);

struct QuantizerConfig {
    QuantizerKind kind = QuantizerKind::kCaq;
    /// Average bits per input dimension. CAQ and LVQ need an integer value;
    /// SAQ turns it into a quota of round(bits * D); PQ and PCA-drop match it
    /// as closely as their layouts allow.
    double bits = 4.0;
    unsigned rounds = 6;
    /// SAQ: PCA before planning. Without it the plan sees a flat spectrum.
    bool use_pca = true;
    size_t granularity = 64;
    unsigned max_segment_bits = 12;
    /// PQ: sub-quantizers (0 = derived from bits with 8-bit codes).
    size_t pq_m = 0;
    size_t pq_k = 256;
    size_t train_iters = 25;
    /// Rows used to fit PCA, PQ codebooks and SAQ variances (0 = all).
    size_t max_train = 100000;
};

/// Top-k accumulator ordered by (distance, id). Its worst retained distance
/// is the pruning threshold once it is full.
class TopKHeap {
public:
    explicit TopKHeap(size_t capacity);

    size_t
    capacity() const {
        return capacity_;
    }
    size_t
    size() const {
        return items_.size();
    }

    /// +inf until `capacity` items have been pushed.
    float
    threshold() const {
        return items_.size() < capacity_ ? std::numeric_limits<float>::infinity()
                                          : items_.front().first;
    }

    void
    push(float distance, uint32_t id);

    /// Items sorted by (distance, id); leaves the heap empty.
    std::vector<std::pair<float, uint32_t>>
    take_sorted();

private:
    size_t capacity_;
    std::vector<std::pair<float, uint32_t>> items_;
};

struct ScanStats {
    size_t candidates = 0;
    size_t pruned = 0;
    size_t bits_accessed = 0;
};

struct ScanOptions {
    /// Multi-stage pruning against the heap threshold (SAQ only).
    bool prune = true;
    float confidence = 4.0F;
    /// CAQ: estimate from this many leading bits (0 = full code).
    unsigned prefix_bits = 0;
};

/// Codes of the vectors of one inverted list.
class EncodedList {
public:
    virtual ~EncodedList() = default;

    virtual size_t
    size() const = 0;

    virtual void
    write(std::ostream& out) const = 0;
};

/// A quantizer encodes residuals (vector minus its reference) after a fixed
/// linear map. Because the map is linear, the transformed residual of a
/// query is transform(q) - transform(centroid), so both can be computed once.
class Quantizer {
public:
    virtual ~Quantizer() = default;

    virtual QuantizerKind
    kind() const = 0;

    /// Fits global state (rotations, PCA, codebooks, plan) on raw residuals.
    virtual void
    train(const RowMatrixF& residuals, uint64_t seed) = 0;

    virtual size_t
    input_dim() const = 0;

    /// Dimension after the linear map (SAQ pads it).
    virtual size_t
    transformed_dim() const = 0;

    /// Linear part of the transform, no centring.
    virtual void
    transform(std::span<const float> in, std::span<float> out) const = 0;

    virtual RowMatrixF
    transform_batch(const RowMatrixF& data) const;

    /// Encodes rows that are already transformed residuals.
    virtual std::unique_ptr<EncodedList>
    encode(const RowMatrixF& transformed) const = 0;

    /// Bits read for one full (never pruned) distance estimate.
    virtual size_t
    code_bits() const = 0;

    /// Bytes stored per vector, factors included.
    virtual size_t
    code_bytes() const = 0;

    /// Estimates distances from `q` (a transformed query residual) to every
    /// vector of `list` and pushes them into `heap` under the matching ids.
    virtual void
    scan(const EncodedList& list, std::span<const uint32_t> ids, std::span<const float> q,
         TopKHeap& heap, ScanStats& stats, const ScanOptions& options) const = 0;

    /// Full estimates for every vector of `list`, no pruning.
    virtual void
    estimate_all(const EncodedList& list, std::span<const float> q, std::span<float> out,
                 const ScanOptions& options) const = 0;

    virtual void
    save(const std::string& dir) const = 0;

    virtual void
    load(const std::string& dir) = 0;

    virtual std::unique_ptr<EncodedList>
    read_list(std::istream& in, const std::string& what) const = 0;

    /// Short description for manifests, e.g. "saq quota=1024 segments=3".
    virtual std::string
    describe() const = 0;

    /// Part of the last train() call spent fitting PCA.
    double
    pca_seconds() const {
        return pca_seconds_;
    }

protected:
    double pca_seconds_ = 0.0;
};

std::unique_ptr<Quantizer>
make_quantizer(const QuantizerConfig& config);

/// Number of PQ sub-quantizers whose 8-bit codes best match `bits` per
/// dimension over `dim` dimensions.
size_t
pq_subspaces_for_rate(size_t dim, double bits, size_t k = 256);

}  // namespace saq
