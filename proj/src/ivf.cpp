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

#include "saq/ivf.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "saq/binary_io.h"
#include "saq/error.h"
#include "saq/kmeans.h"
#include "saq/seed.h"
#include "saq/transforms.h"

namespace saq {

namespace fs = std::filesystem;

size_t
default_nlist(size_t n) {
    if (n >= 1000000) {
        return 4096;
    }
    auto root = static_cast<size_t>(std::floor(std::sqrt(static_cast<double>(n))));
    return std::min(n, std::max<size_t>(16, root));
}

namespace {

RowMatrixF
gather_rows(const RowMatrixF& data, std::span<const uint32_t> ids) {
    RowMatrixF out(static_cast<Eigen::Index>(ids.size()), data.cols());
    for (size_t i = 0; i < ids.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = data.row(ids[i]);
    }
    return out;
}

RowMatrixF
sample_rows(const RowMatrixF& data, size_t max_rows, uint64_t seed) {
    const auto n = static_cast<size_t>(data.rows());
    if (max_rows == 0 || n <= max_rows) {
        return data;
    }
    std::vector<uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0U);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(max_rows);
    std::sort(order.begin(), order.end());
    return gather_rows(data, order);
}

}  // namespace

IvfIndex
IvfIndex::build(const RowMatrixF& data, const IvfBuildOptions& options) {
    const auto n = static_cast<size_t>(data.rows());
    const size_t nlist = options.nlist == 0 ? default_nlist(n) : options.nlist;
    if (n == 0) {
        throw_error(ErrorCode::kInsufficientData, "ivf_build: empty dataset");
    }
    if (nlist > n) {
        throw_error(ErrorCode::kInvalidArgument,
                    fmt::format("ivf_build: nlist = {} exceeds N = {}", nlist, n));
    }
    IvfIndex index;
    index.config_ = options.quantizer;
    index.seed_ = options.seed;
    index.size_ = n;

    if (nlist == 1) {
        auto mean = column_mean(data);
        index.centroids_ = Eigen::Map<const RowMatrixF>(mean.data(), 1, data.cols());
    } else {
        KMeansOptions km;
        km.iters = options.kmeans_iters;
        km.seed = derive_seed(options.seed, "ivf-kmeans");
        km.plus_plus = false;
        km.max_train = options.kmeans_rows_per_list * nlist;
        index.centroids_ = kmeans(data, nlist, km).centroids;
    }
    const auto assignment = assign_nearest(data, index.centroids_);
    index.lists_.assign(nlist, {});
    for (size_t i = 0; i < n; ++i) {
        index.lists_[assignment[i]].push_back(static_cast<uint32_t>(i));
    }

    RowMatrixF residuals(data.rows(), data.cols());
    for (size_t i = 0; i < n; ++i) {
        residuals.row(static_cast<Eigen::Index>(i)) =
            data.row(static_cast<Eigen::Index>(i)) - index.centroids_.row(assignment[i]);
    }

    const auto start = std::chrono::steady_clock::now();
    index.quantizer_ = make_quantizer(options.quantizer);
    index.quantizer_->train(
        sample_rows(residuals, options.quantizer.max_train, derive_seed(options.seed, "train-sample")),
        derive_seed(options.seed, "quantizer"));
    RowMatrixF transformed = index.quantizer_->transform_batch(residuals);
    residuals.resize(0, 0);
    index.codes_.resize(nlist);
    for (size_t c = 0; c < nlist; ++c) {
        index.codes_[c] = index.quantizer_->encode(gather_rows(transformed, index.lists_[c]));
    }
    index.quantize_seconds_ =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() -
        index.quantizer_->pca_seconds();
    index.transform_centroids();
    return index;
}

void
IvfIndex::transform_centroids() {
    centroids_transformed_ = quantizer_->transform_batch(centroids_);
}

void
IvfIndex::attach_raw(std::shared_ptr<const RowMatrixF> raw) {
    if (raw && (static_cast<size_t>(raw->rows()) != size_ || raw->cols() != centroids_.cols())) {
        throw_error(ErrorCode::kDimensionMismatch, "attach_raw: raw vectors do not match the index");
    }
    raw_ = std::move(raw);
}

std::vector<uint32_t>
IvfIndex::probe(std::span<const float> query, size_t nprobe) const {
    check_dim(query.size(), dim(), "ivf query");
    if (nprobe < 1 || nprobe > nlist()) {
        throw_error(ErrorCode::kInvalidArgument,
                    fmt::format("nprobe = {} outside [1, {}]", nprobe, nlist()));
    }
    std::vector<std::pair<float, uint32_t>> dist(nlist());
    for (size_t c = 0; c < nlist(); ++c) {
        dist[c] = {l2_sqr(row_span(centroids_, static_cast<Eigen::Index>(c)), query), static_cast<uint32_t>(c)};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(nprobe), dist.end());
    std::vector<uint32_t> out(nprobe);
    for (size_t i = 0; i < nprobe; ++i) {
        out[i] = dist[i].second;
    }
    return out;
}

SearchResult
IvfIndex::search(std::span<const float> query, const SearchParams& params) const {
    const auto probes = probe(query, params.nprobe);
    const size_t k = std::min(params.k, size_);
    const size_t capacity = std::max(k, std::min(params.rerank, size_));
    if (params.rerank > 0 && !raw_) {
        throw_error(ErrorCode::kInvalidArgument, "rerank requested but no raw vectors are attached");
    }
    const size_t tdim = quantizer_->transformed_dim();
    std::vector<float> q_t(tdim);
    quantizer_->transform(query, q_t);
    std::vector<float> residual(tdim);

    TopKHeap heap(capacity);
    SearchResult result;
    for (auto c : probes) {
        const float* ct = centroids_transformed_.data() + static_cast<size_t>(c) * tdim;
        for (size_t j = 0; j < tdim; ++j) {
            residual[j] = q_t[j] - ct[j];
        }
        quantizer_->scan(*codes_[c], lists_[c], residual, heap, result.stats, params.scan);
    }
    auto items = heap.take_sorted();
    if (params.rerank > 0) {
        for (auto& [d, id] : items) {
            d = l2_sqr(row_span(*raw_, id), query);
        }
        std::sort(items.begin(), items.end());
    }
    if (items.size() > k) {
        items.resize(k);
    }
    result.ids.reserve(items.size());
    result.distances.reserve(items.size());
    for (const auto& [d, id] : items) {
        result.ids.push_back(id);
        result.distances.push_back(d);
    }
    return result;
}

std::vector<SearchResult>
IvfIndex::search_batch(const RowMatrixF& queries, const SearchParams& params) const {
    std::vector<SearchResult> out(static_cast<size_t>(queries.rows()));
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < static_cast<long>(out.size()); ++i) {
        out[static_cast<size_t>(i)] = search(row_span(queries, i), params);
    }
    return out;
}

void
IvfIndex::estimate_probed(std::span<const float> query, size_t nprobe, const ScanOptions& options,
                          std::vector<uint32_t>& ids, std::vector<float>& estimates) const {
    const auto probes = probe(query, nprobe);
    const size_t tdim = quantizer_->transformed_dim();
    std::vector<float> q_t(tdim);
    quantizer_->transform(query, q_t);
    std::vector<float> residual(tdim);
    ids.clear();
    estimates.clear();
    for (auto c : probes) {
        const float* ct = centroids_transformed_.data() + static_cast<size_t>(c) * tdim;
        for (size_t j = 0; j < tdim; ++j) {
            residual[j] = q_t[j] - ct[j];
        }
        const auto& members = lists_[c];
        const size_t offset = estimates.size();
        ids.insert(ids.end(), members.begin(), members.end());
        estimates.resize(offset + members.size());
        quantizer_->estimate_all(*codes_[c], residual,
                                 std::span<float>(estimates).subspan(offset, members.size()), options);
    }
}

void
IvfIndex::save(const std::string& dir) const {
    fs::create_directories(fs::path(dir) / "quantizer");
    nlohmann::json meta;
    meta["format"] = "saqvq-ivf";
    meta["version"] = 1;
    meta["size"] = size_;
    meta["dim"] = dim();
    meta["nlist"] = nlist();
    meta["seed"] = seed_;
    meta["quantizer"] = {
        {"kind", std::string(to_string(config_.kind))},
        {"bits", config_.bits},
        {"rounds", config_.rounds},
        {"use_pca", config_.use_pca},
        {"granularity", config_.granularity},
        {"max_segment_bits", config_.max_segment_bits},
        {"pq_m", config_.pq_m},
        {"pq_k", config_.pq_k},
        {"train_iters", config_.train_iters},
        {"max_train", config_.max_train},
        {"description", quantizer_->describe()},
    };
    {
        std::ofstream out(fs::path(dir) / "meta.json");
        out << meta.dump(2) << '\n';
        if (!out) {
            throw_error(ErrorCode::kIo, dir + "/meta.json: write failed");
        }
    }
    {
        auto out = io::open_output((fs::path(dir) / "centroids.bin").string());
        io::Writer w(out);
        w.pod<uint32_t>(static_cast<uint32_t>(centroids_.rows()));
        w.pod<uint32_t>(static_cast<uint32_t>(centroids_.cols()));
        w.array<float>(std::span<const float>(centroids_.data(), static_cast<size_t>(centroids_.size())));
    }
    {
        auto out = io::open_output((fs::path(dir) / "lists.bin").string());
        io::Writer w(out);
        w.pod<uint32_t>(static_cast<uint32_t>(nlist()));
        uint64_t offset = 0;
        for (const auto& list : lists_) {
            w.pod<uint64_t>(offset);
            offset += list.size();
        }
        w.pod<uint64_t>(offset);
        for (const auto& list : lists_) {
            w.array<uint32_t>(list);
        }
    }
    {
        auto out = io::open_output((fs::path(dir) / "codes.bin").string());
        for (const auto& codes : codes_) {
            codes->write(out);
        }
        if (!out) {
            throw_error(ErrorCode::kIo, dir + "/codes.bin: write failed");
        }
    }
    quantizer_->save((fs::path(dir) / "quantizer").string());
}

IvfIndex
IvfIndex::load(const std::string& dir) {
    IvfIndex index;
    nlohmann::json meta;
    {
        const auto path = (fs::path(dir) / "meta.json").string();
        std::ifstream in(path);
        if (!in) {
            throw_error(ErrorCode::kIo, path + ": cannot open");
        }
        try {
            in >> meta;
            const auto& q = meta.at("quantizer");
            index.config_.kind = parse_quantizer_kind(q.at("kind").get<std::string>());
            index.config_.bits = q.at("bits").get<double>();
            index.config_.rounds = q.at("rounds").get<unsigned>();
            index.config_.use_pca = q.at("use_pca").get<bool>();
            index.config_.granularity = q.at("granularity").get<size_t>();
            index.config_.max_segment_bits = q.at("max_segment_bits").get<unsigned>();
            index.config_.pq_m = q.at("pq_m").get<size_t>();
            index.config_.pq_k = q.at("pq_k").get<size_t>();
            index.config_.train_iters = q.at("train_iters").get<size_t>();
            index.config_.max_train = q.at("max_train").get<size_t>();
            index.size_ = meta.at("size").get<size_t>();
            index.seed_ = meta.at("seed").get<uint64_t>();
        } catch (const nlohmann::json::exception& e) {
            throw_error(ErrorCode::kFormat, fmt::format("{}: {}", path, e.what()));
        }
    }
    {
        const auto path = (fs::path(dir) / "centroids.bin").string();
        auto in = io::open_input(path);
        io::Reader r(in, path);
        const auto rows = r.pod<uint32_t>();
        const auto cols = r.pod<uint32_t>();
        index.centroids_.resize(rows, cols);
        r.array_into(std::span<float>(index.centroids_.data(), static_cast<size_t>(index.centroids_.size())));
    }
    {
        const auto path = (fs::path(dir) / "lists.bin").string();
        auto in = io::open_input(path);
        io::Reader r(in, path);
        const auto nlist = r.pod<uint32_t>();
        auto offsets = r.array<uint64_t>(nlist + 1);
        if (nlist != index.centroids_.rows() || offsets.back() != index.size_) {
            throw_error(ErrorCode::kFormat, path + ": list table does not match the index metadata");
        }
        index.lists_.resize(nlist);
        for (size_t c = 0; c < nlist; ++c) {
            if (offsets[c + 1] < offsets[c]) {
                throw_error(ErrorCode::kFormat, path + ": list offsets are not monotone");
            }
            index.lists_[c] = r.array<uint32_t>(offsets[c + 1] - offsets[c]);
        }
    }
    index.quantizer_ = make_quantizer(index.config_);
    index.quantizer_->load((fs::path(dir) / "quantizer").string());
    {
        const auto path = (fs::path(dir) / "codes.bin").string();
        auto in = io::open_input(path);
        index.codes_.resize(index.lists_.size());
        for (size_t c = 0; c < index.lists_.size(); ++c) {
            index.codes_[c] = index.quantizer_->read_list(in, path);
            if (index.codes_[c]->size() != index.lists_[c].size()) {
                throw_error(ErrorCode::kFormat, fmt::format("{}: list {} has the wrong code count", path, c));
            }
        }
    }
    index.transform_centroids();
    return index;
}

}  // namespace saq
