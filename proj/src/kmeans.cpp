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

#include "saq/kmeans.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "saq/error.h"

namespace saq {

namespace {

constexpr Eigen::Index kAssignChunk = 1024;

RowMatrixF
sample_rows(const RowMatrixF& data, size_t max_rows, std::mt19937_64& rng) {
    if (max_rows == 0 || static_cast<size_t>(data.rows()) <= max_rows) {
        return data;
    }
    std::vector<Eigen::Index> rows(static_cast<size_t>(data.rows()));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(max_rows);
    std::sort(rows.begin(), rows.end());
    RowMatrixF out(static_cast<Eigen::Index>(max_rows), data.cols());
    for (size_t i = 0; i < max_rows; ++i) {
        out.row(static_cast<Eigen::Index>(i)) = data.row(rows[i]);
    }
    return out;
}

RowMatrixF
seed_plus_plus(const RowMatrixF& data, size_t k, std::mt19937_64& rng) {
    const auto n = data.rows();
    RowMatrixF centroids(static_cast<Eigen::Index>(k), data.cols());
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    centroids.row(0) = data.row(pick(rng));
    std::vector<double> nearest(static_cast<size_t>(n), std::numeric_limits<double>::infinity());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (size_t c = 1; c < k; ++c) {
        double total = 0.0;
        const auto prev = centroids.row(static_cast<Eigen::Index>(c - 1));
        for (Eigen::Index i = 0; i < n; ++i) {
            double d = (data.row(i) - prev).cast<double>().squaredNorm();
            nearest[static_cast<size_t>(i)] = std::min(nearest[static_cast<size_t>(i)], d);
            total += nearest[static_cast<size_t>(i)];
        }
        Eigen::Index chosen = n - 1;
        if (total > 0.0) {
            double target = unit(rng) * total;
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += nearest[static_cast<size_t>(i)];
                if (acc >= target && nearest[static_cast<size_t>(i)] > 0.0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        centroids.row(static_cast<Eigen::Index>(c)) = data.row(chosen);
    }
    return centroids;
}

RowMatrixF
seed_random(const RowMatrixF& data, size_t k, std::mt19937_64& rng) {
    std::vector<Eigen::Index> rows(static_cast<size_t>(data.rows()));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    std::shuffle(rows.begin(), rows.end(), rng);
    RowMatrixF centroids(static_cast<Eigen::Index>(k), data.cols());
    for (size_t c = 0; c < k; ++c) {
        centroids.row(static_cast<Eigen::Index>(c)) = data.row(rows[c]);
    }
    return centroids;
}

}  // namespace

std::vector<uint32_t>
assign_nearest(const RowMatrixF& data, const RowMatrixF& centroids, std::vector<float>* distances) {
    check_dim(static_cast<size_t>(centroids.cols()), static_cast<size_t>(data.cols()),
              "assign_nearest");
    const auto n = data.rows();
    const auto k = centroids.rows();
    std::vector<uint32_t> assignment(static_cast<size_t>(n));
    if (distances != nullptr) {
        distances->assign(static_cast<size_t>(n), 0.0F);
    }
    Eigen::VectorXf centroid_norms = centroids.rowwise().squaredNorm();
    const long chunks = static_cast<long>((n + kAssignChunk - 1) / kAssignChunk);
#pragma omp parallel for schedule(dynamic)
    for (long chunk = 0; chunk < chunks; ++chunk) {
        const Eigen::Index start = chunk * kAssignChunk;
        const Eigen::Index len = std::min(kAssignChunk, n - start);
        auto block = data.middleRows(start, len);
        // ||x||^2 - 2 x.c + ||c||^2; the ||x||^2 term is constant per row.
        Eigen::MatrixXf dots = block * centroids.transpose();
        for (Eigen::Index i = 0; i < len; ++i) {
            float best = std::numeric_limits<float>::infinity();
            Eigen::Index arg = 0;
            for (Eigen::Index c = 0; c < k; ++c) {
                float d = centroid_norms(c) - 2.0F * dots(i, c);
                if (d < best) {
                    best = d;
                    arg = c;
                }
            }
            assignment[static_cast<size_t>(start + i)] = static_cast<uint32_t>(arg);
            if (distances != nullptr) {
                (*distances)[static_cast<size_t>(start + i)] =
                    std::max(0.0F, best + block.row(i).squaredNorm());
            }
        }
    }
    return assignment;
}

KMeansResult
kmeans(const RowMatrixF& data, size_t k, const KMeansOptions& options) {
    if (k == 0) {
        throw_error(ErrorCode::kInvalidArgument, "kmeans: k must be >= 1");
    }
    if (static_cast<size_t>(data.rows()) < k) {
        throw_error(ErrorCode::kInsufficientData,
                    "kmeans: " + std::to_string(data.rows()) + " rows for " + std::to_string(k) +
                        " clusters");
    }
    std::mt19937_64 rng(options.seed);
    RowMatrixF train = sample_rows(data, std::max(options.max_train, k), rng);
    KMeansResult result;
    result.centroids = options.plus_plus ? seed_plus_plus(train, k, rng) : seed_random(train, k, rng);

    const auto n = train.rows();
    const auto d = train.cols();
    std::vector<float> dist;
    for (size_t it = 0; it < options.iters; ++it) {
        auto assignment = assign_nearest(train, result.centroids, &dist);
        double distortion = 0.0;
        for (float v : dist) {
            distortion += v;
        }
        result.distortion.push_back(distortion);

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), d);
        std::vector<size_t> counts(k, 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            auto c = assignment[static_cast<size_t>(i)];
            sums.row(c) += train.row(i).cast<double>();
            ++counts[c];
        }
        // Re-seed empty clusters from the worst-served points.
        std::vector<Eigen::Index> order;
        for (size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) {
                continue;
            }
            if (order.empty()) {
                order.resize(static_cast<size_t>(n));
                std::iota(order.begin(), order.end(), Eigen::Index{0});
                std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
                    return dist[static_cast<size_t>(a)] > dist[static_cast<size_t>(b)];
                });
            }
            for (auto& idx : order) {
                if (idx < 0) {
                    continue;
                }
                auto owner = assignment[static_cast<size_t>(idx)];
                if (counts[owner] <= 1) {
                    continue;
                }
                sums.row(owner) -= train.row(idx).cast<double>();
                --counts[owner];
                sums.row(static_cast<Eigen::Index>(c)) = train.row(idx).cast<double>();
                counts[c] = 1;
                assignment[static_cast<size_t>(idx)] = static_cast<uint32_t>(c);
                idx = -1;
                break;
            }
        }
        for (size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                result.centroids.row(static_cast<Eigen::Index>(c)) =
                    (sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]))
                        .cast<float>();
            }
        }
    }
    return result;
}

}  // namespace saq
