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

#include "saq/data.h"

#include <algorithm>
#include <cstring>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <vector>

#include <fmt/format.h>

#include "saq/binary_io.h"
#include "saq/error.h"
#include "saq/seed.h"
#include "saq/transforms.h"

namespace saq {

namespace fs = std::filesystem;

VecsFormat
parse_vecs_format(std::string_view name) {
    if (name == "fvecs") {
        return VecsFormat::kFvecs;
    }
    if (name == "bvecs") {
        return VecsFormat::kBvecs;
    }
    if (name == "ivecs") {
        return VecsFormat::kIvecs;
    }
    if (name == "raw_f32" || name == "raw") {
        return VecsFormat::kRawF32;
    }
    throw_error(ErrorCode::kInvalidArgument, fmt::format("unknown vector format '{}'", name));
}

VecsFormat
vecs_format_from_path(const std::string& path) {
    auto ext = fs::path(path).extension().string();
    if (ext == ".fvecs") {
        return VecsFormat::kFvecs;
    }
    if (ext == ".bvecs") {
        return VecsFormat::kBvecs;
    }
    if (ext == ".ivecs") {
        return VecsFormat::kIvecs;
    }
    if (ext == ".f32" || ext == ".bin") {
        return VecsFormat::kRawF32;
    }
    throw_error(ErrorCode::kInvalidArgument,
                fmt::format("{}: cannot infer vector format from extension", path));
}

namespace {

size_t
element_size(VecsFormat format) {
    return format == VecsFormat::kBvecs ? 1 : 4;
}

// Reads the record layout shared by fvecs/bvecs/ivecs into raw element bytes.
template <typename Sink>
size_t
read_records(const std::string& path, VecsFormat format, Sink&& sink) {
    auto in = io::open_input(path);
    const auto file_bytes = fs::file_size(path);
    io::Reader r(in, path);
    if (file_bytes == 0) {
        return 0;
    }
    const auto first_dim = r.pod<int32_t>();
    if (first_dim <= 0) {
        throw_error(ErrorCode::kFormat, fmt::format("{}: invalid record dimension {}", path, first_dim));
    }
    const auto dim = static_cast<size_t>(first_dim);
    const size_t record = 4 + dim * element_size(format);
    if (file_bytes % record != 0) {
        throw_error(ErrorCode::kFormat,
                    fmt::format("{}: size {} is not a multiple of the record size {} (truncated or "
                                "inconsistent dimensions)",
                                path, file_bytes, record));
    }
    const size_t n = file_bytes / record;
    std::vector<std::byte> payload(dim * element_size(format));
    for (size_t i = 0; i < n; ++i) {
        if (i > 0) {
            auto d = r.pod<int32_t>();
            if (d != first_dim) {
                throw_error(ErrorCode::kFormat,
                            fmt::format("{}: record {} has dimension {}, expected {}", path, i, d,
                                        first_dim));
            }
        }
        r.bytes(payload.data(), payload.size());
        sink(i, n, dim, payload);
    }
    return n;
}

}  // namespace

RowMatrixF
read_vecs(const std::string& path, VecsFormat format, size_t raw_dim) {
    if (format == VecsFormat::kRawF32) {
        if (raw_dim == 0) {
            throw_error(ErrorCode::kInvalidArgument, "raw_f32 input needs an explicit dimension");
        }
        auto in = io::open_input(path);
        const auto bytes = fs::file_size(path);
        if (bytes % (raw_dim * sizeof(float)) != 0) {
            throw_error(ErrorCode::kFormat,
                        fmt::format("{}: size {} is not a multiple of {} floats", path, bytes, raw_dim));
        }
        RowMatrixF out(static_cast<Eigen::Index>(bytes / (raw_dim * sizeof(float))),
                       static_cast<Eigen::Index>(raw_dim));
        io::Reader(in, path).array_into(std::span<float>(out.data(), static_cast<size_t>(out.size())));
        return out;
    }
    RowMatrixF out;
    read_records(path, format, [&](size_t i, size_t n, size_t dim, const std::vector<std::byte>& p) {
        if (i == 0) {
            out.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
        }
        float* row = out.data() + i * dim;
        switch (format) {
            case VecsFormat::kFvecs:
                std::memcpy(row, p.data(), dim * sizeof(float));
                break;
            case VecsFormat::kBvecs:
                for (size_t j = 0; j < dim; ++j) {
                    row[j] = static_cast<float>(std::to_integer<uint8_t>(p[j]));
                }
                break;
            default: {
                std::vector<int32_t> tmp(dim);
                std::memcpy(tmp.data(), p.data(), dim * sizeof(int32_t));
                for (size_t j = 0; j < dim; ++j) {
                    row[j] = static_cast<float>(tmp[j]);
                }
            }
        }
    });
    return out;
}

RowMatrixI
read_ivecs(const std::string& path) {
    RowMatrixI out;
    read_records(path, VecsFormat::kIvecs,
                 [&](size_t i, size_t n, size_t dim, const std::vector<std::byte>& p) {
                     if (i == 0) {
                         out.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
                     }
                     std::memcpy(out.data() + i * dim, p.data(), dim * sizeof(int32_t));
                 });
    return out;
}

void
write_vecs(const std::string& path, const RowMatrixF& data, VecsFormat format) {
    auto out = io::open_output(path);
    io::Writer w(out);
    const auto dim = static_cast<size_t>(data.cols());
    if (format == VecsFormat::kRawF32) {
        w.array<float>(std::span<const float>(data.data(), static_cast<size_t>(data.size())));
        return;
    }
    std::vector<uint8_t> bytes(dim);
    std::vector<int32_t> ints(dim);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        w.pod<int32_t>(static_cast<int32_t>(dim));
        auto row = row_span(data, i);
        switch (format) {
            case VecsFormat::kFvecs:
                w.array<float>(row);
                break;
            case VecsFormat::kBvecs:
                for (size_t j = 0; j < dim; ++j) {
                    bytes[j] = static_cast<uint8_t>(std::clamp(std::lround(row[j]), 0L, 255L));
                }
                w.array<uint8_t>(bytes);
                break;
            default:
                for (size_t j = 0; j < dim; ++j) {
                    ints[j] = static_cast<int32_t>(std::lround(row[j]));
                }
                w.array<int32_t>(ints);
        }
    }
}

void
write_ivecs(const std::string& path, const RowMatrixI& data) {
    auto out = io::open_output(path);
    io::Writer w(out);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        w.pod<int32_t>(static_cast<int32_t>(data.cols()));
        w.array<int32_t>(std::span<const int32_t>(data.data() + i * data.cols(),
                                                  static_cast<size_t>(data.cols())));
    }
}

SyntheticKind
parse_synthetic_kind(std::string_view name) {
    if (name == "gaussian") {
        return SyntheticKind::kGaussian;
    }
    if (name == "skewed") {
        return SyntheticKind::kSkewed;
    }
    if (name == "clustered") {
        return SyntheticKind::kClustered;
    }
    throw_error(ErrorCode::kInvalidArgument, fmt::format("unknown synthetic kind '{}'", name));
}

namespace {

RowMatrixF
gaussian_matrix(size_t n, size_t dim, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> normal(0.0F, 1.0F);
    RowMatrixF out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out.data()[i] = normal(rng);
    }
    return out;
}

// Scales column j by (j+1)^-alpha and rotates every row.
void
apply_spectrum(RowMatrixF& data, double alpha, uint64_t seed) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        data.col(j) *= static_cast<float>(std::pow(static_cast<double>(j + 1), -alpha));
    }
    auto rotation = gen_rotation(static_cast<size_t>(data.cols()), seed);
    const Eigen::Index chunk = 8192;
    for (Eigen::Index begin = 0; begin < data.rows(); begin += chunk) {
        const auto rows = std::min(chunk, data.rows() - begin);
        RowMatrixF part = data.middleRows(begin, rows) * rotation.matrix.transpose();
        data.middleRows(begin, rows) = part;
    }
}

}  // namespace

RowMatrixF
gen_synthetic(const SyntheticSpec& spec) {
    if (spec.n == 0 || spec.dim == 0) {
        throw_error(ErrorCode::kInvalidArgument, "synthetic data needs n >= 1 and dim >= 1");
    }
    RowMatrixF data = gaussian_matrix(spec.n, spec.dim, derive_seed(spec.seed, "points"));
    switch (spec.kind) {
        case SyntheticKind::kGaussian:
            break;
        case SyntheticKind::kSkewed:
            apply_spectrum(data, spec.alpha, derive_seed(spec.seed, "rotation"));
            break;
        case SyntheticKind::kClustered: {
            if (spec.clusters == 0) {
                throw_error(ErrorCode::kInvalidArgument, "clustered data needs clusters >= 1");
            }
            apply_spectrum(data, spec.alpha, derive_seed(spec.seed, "rotation"));
            RowMatrixF centers =
                gaussian_matrix(spec.clusters, spec.dim, derive_seed(spec.seed, "centers")) *
                static_cast<float>(spec.center_scale);
            std::mt19937_64 rng(derive_seed(spec.seed, "membership"));
            std::uniform_int_distribution<size_t> pick(0, spec.clusters - 1);
            for (Eigen::Index i = 0; i < data.rows(); ++i) {
                data.row(i) += centers.row(static_cast<Eigen::Index>(pick(rng)));
            }
            break;
        }
    }
    return data;
}

Split
hold_out_queries(const RowMatrixF& data, size_t n_queries, uint64_t seed) {
    const auto n = static_cast<size_t>(data.rows());
    if (n_queries >= n) {
        throw_error(ErrorCode::kInsufficientData,
                    fmt::format("cannot hold out {} queries from {} rows", n_queries, n));
    }
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> is_query(n, false);
    std::vector<size_t> picked(order.begin(), order.begin() + static_cast<long>(n_queries));
    std::sort(picked.begin(), picked.end());
    for (auto i : picked) {
        is_query[i] = true;
    }
    Split split;
    split.queries.resize(static_cast<Eigen::Index>(n_queries), data.cols());
    split.base.resize(static_cast<Eigen::Index>(n - n_queries), data.cols());
    Eigen::Index qi = 0;
    Eigen::Index bi = 0;
    for (size_t i = 0; i < n; ++i) {
        if (is_query[i]) {
            split.queries.row(qi++) = data.row(static_cast<Eigen::Index>(i));
        } else {
            split.base.row(bi++) = data.row(static_cast<Eigen::Index>(i));
        }
    }
    return split;
}

TopK
brute_force_topk(const RowMatrixF& data, const RowMatrixF& queries, size_t k) {
    const auto n = static_cast<size_t>(data.rows());
    if (k > n) {
        throw_error(ErrorCode::kInvalidArgument,
                    fmt::format("k = {} exceeds the number of data vectors {}", k, n));
    }
    if (queries.rows() > 0) {
        check_dim(static_cast<size_t>(queries.cols()), static_cast<size_t>(data.cols()), "brute_force_topk");
    }
    const auto nq = static_cast<size_t>(queries.rows());
    const auto dim = static_cast<size_t>(data.cols());
    TopK result;
    result.ids.resize(static_cast<Eigen::Index>(nq), static_cast<Eigen::Index>(k));
    result.distances.resize(static_cast<Eigen::Index>(nq), static_cast<Eigen::Index>(k));

    // Queries are processed in blocks so that each cache-resident chunk of
    // data rows is reused across the block.
    constexpr size_t kQueryBlock = 16;
    constexpr size_t kRowChunk = 256;
    const size_t blocks = (nq + kQueryBlock - 1) / kQueryBlock;

#pragma omp parallel for schedule(dynamic)
    for (long b = 0; b < static_cast<long>(blocks); ++b) {
        const size_t q0 = static_cast<size_t>(b) * kQueryBlock;
        const size_t q1 = std::min(nq, q0 + kQueryBlock);
        std::vector<double> dist((q1 - q0) * n);
        for (size_t r0 = 0; r0 < n; r0 += kRowChunk) {
            const size_t r1 = std::min(n, r0 + kRowChunk);
            for (size_t q = q0; q < q1; ++q) {
                const float* qv = queries.data() + q * dim;
                for (size_t r = r0; r < r1; ++r) {
                    const float* x = data.data() + r * dim;
                    double sum = 0.0;
#pragma omp simd reduction(+ : sum)
                    for (size_t j = 0; j < dim; ++j) {
                        double d = static_cast<double>(x[j]) - static_cast<double>(qv[j]);
                        sum += d * d;
                    }
                    dist[(q - q0) * n + r] = sum;
                }
            }
        }
        std::vector<uint32_t> order(n);
        for (size_t q = q0; q < q1; ++q) {
            const double* dq = dist.data() + (q - q0) * n;
            std::iota(order.begin(), order.end(), 0U);
            auto less = [dq](uint32_t a, uint32_t c) {
                return dq[a] < dq[c] || (dq[a] == dq[c] && a < c);
            };
            std::partial_sort(order.begin(), order.begin() + static_cast<long>(k), order.end(), less);
            for (size_t j = 0; j < k; ++j) {
                result.ids(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(j)) =
                    static_cast<int32_t>(order[j]);
                result.distances(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(j)) =
                    static_cast<float>(dq[order[j]]);
            }
        }
    }
    return result;
}

uint64_t
ground_truth_key(const RowMatrixF& data, const RowMatrixF& queries, size_t k) {
    auto bytes_of = [](const RowMatrixF& m) {
        return std::as_bytes(std::span<const float>(m.data(), static_cast<size_t>(m.size())));
    };
    uint64_t h = fnv1a64(bytes_of(data));
    h = fnv1a64(bytes_of(queries), h);
    const uint64_t shape[] = {static_cast<uint64_t>(data.rows()), static_cast<uint64_t>(data.cols()),
                              static_cast<uint64_t>(queries.rows()), static_cast<uint64_t>(k)};
    return fnv1a64(std::as_bytes(std::span<const uint64_t>(shape)), h);
}

TopK
cached_ground_truth(const RowMatrixF& data, const RowMatrixF& queries, size_t k,
                    const std::string& prefix) {
    const uint64_t key = ground_truth_key(data, queries, k);
    const std::string ids_path = prefix + ".gt.ivecs";
    const std::string dist_path = prefix + ".gt.fvecs";
    const std::string key_path = prefix + ".gt.key";
    if (fs::exists(ids_path) && fs::exists(dist_path) && fs::exists(key_path)) {
        std::ifstream key_in(key_path);
        std::string stored;
        key_in >> stored;
        if (stored == fmt::format("{:016x}", key)) {
            TopK cached;
            cached.ids = read_ivecs(ids_path);
            cached.distances = read_vecs(dist_path, VecsFormat::kFvecs);
            if (static_cast<size_t>(cached.ids.rows()) == static_cast<size_t>(queries.rows()) &&
                static_cast<size_t>(cached.ids.cols()) == k) {
                return cached;
            }
        }
    }
    TopK fresh = brute_force_topk(data, queries, k);
    write_ivecs(ids_path, fresh.ids);
    write_vecs(dist_path, fresh.distances, VecsFormat::kFvecs);
    std::ofstream key_out(key_path);
    key_out << fmt::format("{:016x}", key) << '\n';
    if (!key_out) {
        throw_error(ErrorCode::kIo, key_path + ": write failed");
    }
    return fresh;
}

}  // namespace saq
