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

#include "saq/quantizers.h"
#include "saq/types.h"

namespace saq {

struct IvfBuildOptions {
    /// Number of clusters; 0 picks default_nlist(N).
    size_t nlist = 0;
    QuantizerConfig quantizer;
    uint64_t seed = 0;
    size_t kmeans_iters = 10;
    /// k-means trains on at most this many rows per cluster.
    size_t kmeans_rows_per_list = 64;
};

/// 4096 for a million vectors or more, otherwise max(16, floor(sqrt(N)))
/// capped at N.
size_t
default_nlist(size_t n);

struct SearchParams {
    size_t k = 100;
    size_t nprobe = 1;
    /// Re-score this many best estimates with exact distances (0 = off).
    size_t rerank = 0;
    ScanOptions scan;
};

struct SearchResult {
    std::vector<uint32_t> ids;
    std::vector<float> distances;
    ScanStats stats;
};

class IvfIndex {
public:
    static IvfIndex
    build(const RowMatrixF& data, const IvfBuildOptions& options);

    SearchResult
    search(std::span<const float> query, const SearchParams& params) const;

    std::vector<SearchResult>
    search_batch(const RowMatrixF& queries, const SearchParams& params) const;

    /// The `nprobe` clusters nearest to the query, nearest first.
    std::vector<uint32_t>
    probe(std::span<const float> query, size_t nprobe) const;

    /// Unpruned estimates for every vector of the probed clusters.
    void
    estimate_probed(std::span<const float> query, size_t nprobe, const ScanOptions& options,
                    std::vector<uint32_t>& ids, std::vector<float>& estimates) const;

    size_t
    nlist() const {
        return lists_.size();
    }
    size_t
    size() const {
        return size_;
    }
    size_t
    dim() const {
        return static_cast<size_t>(centroids_.cols());
    }
    const RowMatrixF&
    centroids() const {
        return centroids_;
    }
    std::span<const uint32_t>
    list_ids(size_t list) const {
        return lists_[list];
    }
    const Quantizer&
    quantizer() const {
        return *quantizer_;
    }
    const QuantizerConfig&
    config() const {
        return config_;
    }
    /// Seconds spent training rotations and encoding, PCA fitting excluded.
    double
    quantize_seconds() const {
        return quantize_seconds_;
    }

    /// Raw vectors used for exact reranking.
    void
    attach_raw(std::shared_ptr<const RowMatrixF> raw);

    void
    save(const std::string& dir) const;

    static IvfIndex
    load(const std::string& dir);

private:
    void
    transform_centroids();

    QuantizerConfig config_;
    uint64_t seed_ = 0;
    size_t size_ = 0;
    RowMatrixF centroids_;
    RowMatrixF centroids_transformed_;
    std::vector<std::vector<uint32_t>> lists_;
    std::vector<std::unique_ptr<EncodedList>> codes_;
    std::unique_ptr<Quantizer> quantizer_;
    std::shared_ptr<const RowMatrixF> raw_;
    double quantize_seconds_ = 0.0;
};

}  // namespace saq
