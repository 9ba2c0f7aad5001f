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

#include "saq/baselines.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "saq/binary_io.h"
#include "saq/error.h"
#include "saq/kmeans.h"
#include "saq/seed.h"

namespace saq {

double
PqModel::bits_per_dim() const {
    return static_cast<double>(m) * std::log2(static_cast<double>(k)) / static_cast<double>(dim);
}

void
PqModel::save(const std::string& path) const {
    auto out = io::open_output(path);
    io::Writer w(out);
    w.magic("VQPQ");
    w.pod<uint32_t>(static_cast<uint32_t>(m));
    w.pod<uint32_t>(static_cast<uint32_t>(k));
    w.pod<uint32_t>(static_cast<uint32_t>(sub_dim));
    w.pod<uint32_t>(static_cast<uint32_t>(dim));
    w.array<float>(codebooks);
}

PqModel
PqModel::load(const std::string& path) {
    auto in = io::open_input(path);
    io::Reader r(in, path);
    r.expect_magic("VQPQ");
    PqModel model;
    model.m = r.pod<uint32_t>();
    model.k = r.pod<uint32_t>();
    model.sub_dim = r.pod<uint32_t>();
    model.dim = r.pod<uint32_t>();
    if (model.k == 0 || model.k > 256 || model.m == 0 || model.sub_dim == 0) {
        throw_error(ErrorCode::kFormat, path + ": invalid PQ header");
    }
    model.codebooks = r.array<float>(model.m * model.k * model.sub_dim);
    model.trained = true;
    return model;
}

PqModel
pq_train(const RowMatrixF& data, size_t m, size_t k, const PqTrainOptions& options) {
    if (m == 0 || k == 0 || k > 256) {
        throw_error(ErrorCode::kInvalidArgument, "pq_train: need M >= 1 and 1 <= K <= 256");
    }
    if (static_cast<size_t>(data.rows()) < k) {
        throw_error(ErrorCode::kInsufficientData, "pq_train: fewer rows than codewords");
    }
    PqModel model;
    model.dim = static_cast<size_t>(data.cols());
    model.m = m;
    model.k = k;
    model.sub_dim = (model.dim + m - 1) / m;
    model.codebooks.assign(m * k * model.sub_dim, 0.0F);
    const auto sub = static_cast<Eigen::Index>(model.sub_dim);

#pragma omp parallel for schedule(dynamic)
    for (long s = 0; s < static_cast<long>(m); ++s) {
        RowMatrixF part = RowMatrixF::Zero(data.rows(), sub);
        const Eigen::Index begin = s * sub;
        const Eigen::Index width = std::clamp<Eigen::Index>(data.cols() - begin, 0, sub);
        if (width > 0) {
            part.leftCols(width) = data.middleCols(begin, width);
        }
        KMeansOptions km;
        km.iters = options.iters;
        km.seed = derive_seed(options.seed, static_cast<uint64_t>(s));
        km.plus_plus = true;
        km.max_train = options.max_train;
        auto result = kmeans(part, k, km);
        std::copy(result.centroids.data(), result.centroids.data() + result.centroids.size(),
                  model.codebooks.begin() + static_cast<long>(static_cast<size_t>(s) * k * model.sub_dim));
    }
    model.trained = true;
    return model;
}

namespace {

void
require_trained(const PqModel& model) {
    if (!model.trained) {
        throw_error(ErrorCode::kUntrained, "PQ model is not trained");
    }
}

// Sub-vector `s` of x, zero-padded past the input dimension.
float
sub_l2(const PqModel& model, std::span<const float> x, size_t s, size_t j) {
    auto c = model.centroid(s, j);
    float sum = 0.0F;
    for (size_t t = 0; t < model.sub_dim; ++t) {
        size_t idx = s * model.sub_dim + t;
        float v = idx < x.size() ? x[idx] : 0.0F;
        float d = v - c[t];
        sum += d * d;
    }
    return sum;
}

}  // namespace

void
pq_encode_into(const PqModel& model, std::span<const float> x, std::span<uint8_t> code) {
    require_trained(model);
    check_dim(x.size(), model.dim, "pq_encode");
    check_dim(code.size(), model.m, "pq_encode code");
    for (size_t s = 0; s < model.m; ++s) {
        float best = std::numeric_limits<float>::infinity();
        size_t arg = 0;
        for (size_t j = 0; j < model.k; ++j) {
            float d = sub_l2(model, x, s, j);
            if (d < best) {
                best = d;
                arg = j;
            }
        }
        code[s] = static_cast<uint8_t>(arg);
    }
}

std::vector<uint8_t>
pq_encode(const PqModel& model, std::span<const float> x) {
    std::vector<uint8_t> code(model.m);
    pq_encode_into(model, x, code);
    return code;
}

std::vector<float>
pq_reconstruct(const PqModel& model, std::span<const uint8_t> code) {
    require_trained(model);
    check_dim(code.size(), model.m, "pq_reconstruct");
    std::vector<float> out(model.padded_dim());
    for (size_t s = 0; s < model.m; ++s) {
        auto c = model.centroid(s, code[s]);
        std::copy(c.begin(), c.end(), out.begin() + static_cast<long>(s * model.sub_dim));
    }
    out.resize(model.dim);
    return out;
}

std::vector<float>
pq_lut(const PqModel& model, std::span<const float> q) {
    require_trained(model);
    check_dim(q.size(), model.dim, "pq_lut");
    std::vector<float> lut(model.m * model.k);
    for (size_t s = 0; s < model.m; ++s) {
        for (size_t j = 0; j < model.k; ++j) {
            lut[s * model.k + j] = sub_l2(model, q, s, j);
        }
    }
    return lut;
}

float
pq_adc_lut(std::span<const float> lut, std::span<const uint8_t> code, size_t k) {
    float sum = 0.0F;
    for (size_t s = 0; s < code.size(); ++s) {
        sum += lut[s * k + code[s]];
    }
    return sum;
}

float
pq_adc(const PqModel& model, std::span<const uint8_t> code, std::span<const float> q) {
    check_dim(code.size(), model.m, "pq_adc");
    auto lut = pq_lut(model, q);
    return pq_adc_lut(lut, code, model.k);
}

PcaDropModel
make_pca_drop(TransformModel pca, size_t kept_dims) {
    if (kept_dims < 1 || kept_dims > pca.dim()) {
        throw_error(ErrorCode::kInvalidArgument, "PCA drop: kept_dims must be in [1, D]");
    }
    PcaDropModel model;
    model.kept_dims = kept_dims;
    model.pca = std::move(pca);
    return model;
}

size_t
pca_drop_dims_for_rate(size_t dim, double bits_per_dim) {
    auto kept = static_cast<size_t>(std::llround(bits_per_dim * static_cast<double>(dim) / 32.0));
    return std::clamp<size_t>(kept, 1, dim);
}

std::vector<float>
PcaDropModel::encode(std::span<const float> x) const {
    auto full = pca.apply(x);
    full.resize(kept_dims);
    return full;
}

std::vector<float>
PcaDropModel::project_query(std::span<const float> q) const {
    return encode(q);
}

float
pca_drop_distance_projected(std::span<const float> stored_leading,
                            std::span<const float> q_leading) {
    check_dim(q_leading.size(), stored_leading.size(), "pca_drop_distance");
    float sum = 0.0F;
#pragma omp simd reduction(+ : sum)
    for (size_t i = 0; i < stored_leading.size(); ++i) {
        float d = stored_leading[i] - q_leading[i];
        sum += d * d;
    }
    return sum;
}

float
pca_drop_distance(const PcaDropModel& model, std::span<const float> stored_leading,
                  std::span<const float> q) {
    check_dim(stored_leading.size(), model.kept_dims, "pca_drop_distance stored");
    auto projected = model.project_query(q);
    return pca_drop_distance_projected(stored_leading, projected);
}

}  // namespace saq
