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

#include "saq/transforms.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "saq/binary_io.h"
#include "saq/error.h"

namespace saq {

namespace {

constexpr uint32_t kTransformVersion = 1;
constexpr Eigen::Index kCovarianceChunk = 4096;

}  // namespace

std::vector<float>
TransformModel::apply(std::span<const float> v) const {
    std::vector<float> out(dim());
    apply_into(v, out);
    return out;
}

void
TransformModel::apply_into(std::span<const float> v, std::span<float> out) const {
    check_dim(v.size(), static_cast<size_t>(matrix.cols()), "TransformModel::apply");
    check_dim(out.size(), dim(), "TransformModel::apply output");
    Eigen::VectorXf centered = as_eigen(v);
    if (!mean.empty()) {
        centered -= as_eigen(mean);
    }
    Eigen::Map<Eigen::VectorXf>(out.data(), static_cast<Eigen::Index>(out.size())).noalias() =
        matrix * centered;
}

RowMatrixF
TransformModel::apply_batch(const RowMatrixF& data) const {
    check_dim(static_cast<size_t>(data.cols()), static_cast<size_t>(matrix.cols()),
              "TransformModel::apply_batch");
    RowMatrixF out(data.rows(), matrix.rows());
    // Chunked to bound the temporary holding the centered copy.
    for (Eigen::Index start = 0; start < data.rows(); start += kCovarianceChunk) {
        Eigen::Index rows = std::min(kCovarianceChunk, data.rows() - start);
        RowMatrixF block = data.middleRows(start, rows);
        if (!mean.empty()) {
            block.rowwise() -= as_eigen(mean).transpose();
        }
        out.middleRows(start, rows).noalias() = block * matrix.transpose();
    }
    return out;
}

void
TransformModel::save(const std::string& path) const {
    auto file = io::open_output(path);
    io::Writer w(file);
    w.magic("VQTM");
    w.pod<uint32_t>(kTransformVersion);
    w.pod<uint8_t>(static_cast<uint8_t>(kind));
    w.pod<uint32_t>(static_cast<uint32_t>(dim()));
    w.pod<uint64_t>(seed);
    std::vector<float> mean_out = mean.empty() ? std::vector<float>(dim(), 0.0F) : mean;
    std::vector<float> var_out = variances.empty() ? std::vector<float>(dim(), 0.0F) : variances;
    w.array<float>(mean_out);
    w.array<float>(var_out);
    w.array<float>(std::span<const float>(matrix.data(), static_cast<size_t>(matrix.size())));
}

TransformModel
TransformModel::load(const std::string& path) {
    auto file = io::open_input(path);
    io::Reader r(file, path);
    r.expect_magic("VQTM");
    auto version = r.pod<uint32_t>();
    if (version != kTransformVersion) {
        throw_error(ErrorCode::kFormat, path + ": unsupported transform version " +
                                            std::to_string(version));
    }
    TransformModel model;
    auto kind = r.pod<uint8_t>();
    if (kind > static_cast<uint8_t>(TransformKind::kPcaThenRotation)) {
        throw_error(ErrorCode::kFormat, path + ": unknown transform kind");
    }
    model.kind = static_cast<TransformKind>(kind);
    auto dim = r.pod<uint32_t>();
    model.seed = r.pod<uint64_t>();
    model.mean = r.array<float>(dim);
    model.variances = r.array<float>(dim);
    model.matrix.resize(dim, dim);
    r.array_into(std::span<float>(model.matrix.data(), static_cast<size_t>(model.matrix.size())));
    return model;
}

TransformModel
gen_rotation(size_t dim, uint64_t seed) {
    if (dim == 0) {
        throw_error(ErrorCode::kInvalidArgument, "gen_rotation: dim must be >= 1");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto n = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd gaussian(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            gaussian(i, j) = normal(rng);
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    const auto& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < n; ++j) {
        if (r(j, j) < 0.0) {
            q.col(j) = -q.col(j);
        }
    }
    TransformModel model;
    model.kind = TransformKind::kRotation;
    model.matrix = q.cast<float>();
    model.mean.assign(dim, 0.0F);
    model.variances.assign(dim, 0.0F);
    model.seed = seed;
    return model;
}

std::vector<float>
column_mean(const RowMatrixF& data) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(data.cols());
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        sum += data.row(i).transpose().cast<double>();
    }
    if (data.rows() > 0) {
        sum /= static_cast<double>(data.rows());
    }
    std::vector<float> out(static_cast<size_t>(data.cols()));
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        out[static_cast<size_t>(j)] = static_cast<float>(sum(j));
    }
    return out;
}

std::vector<float>
column_second_moment(const RowMatrixF& data) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(data.cols());
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        sum += data.row(i).transpose().cast<double>().cwiseAbs2();
    }
    if (data.rows() > 0) {
        sum /= static_cast<double>(data.rows());
    }
    std::vector<float> out(static_cast<size_t>(data.cols()));
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        out[static_cast<size_t>(j)] = static_cast<float>(sum(j));
    }
    return out;
}

TransformModel
fit_pca(const RowMatrixF& data, uint64_t seed, const PcaOptions& options) {
    if (data.rows() < 2) {
        throw_error(ErrorCode::kInsufficientData, "fit_pca: need at least 2 rows");
    }
    const Eigen::Index d = data.cols();

    // Uniform sample without replacement when the data is large.
    std::vector<Eigen::Index> rows(static_cast<size_t>(data.rows()));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    if (options.max_samples > 0 && rows.size() > options.max_samples) {
        std::mt19937_64 rng(seed);
        std::shuffle(rows.begin(), rows.end(), rng);
        rows.resize(options.max_samples);
        std::sort(rows.begin(), rows.end());
    }
    const auto n = static_cast<Eigen::Index>(rows.size());

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (auto r : rows) {
        mean += data.row(r).transpose().cast<double>();
    }
    mean /= static_cast<double>(n);
    Eigen::RowVectorXf mean_f = mean.transpose().cast<float>();

    // Float GEMM per chunk, double accumulation across chunks.
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    RowMatrixF block;
    for (Eigen::Index start = 0; start < n; start += kCovarianceChunk) {
        Eigen::Index len = std::min(kCovarianceChunk, n - start);
        block.resize(len, d);
        for (Eigen::Index i = 0; i < len; ++i) {
            block.row(i) = data.row(rows[static_cast<size_t>(start + i)]) - mean_f;
        }
        Eigen::MatrixXf partial = block.transpose() * block;
        cov += partial.cast<double>();
    }
    cov /= static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw_error(ErrorCode::kInternal, "fit_pca: eigendecomposition failed");
    }
    // Eigen returns ascending eigenvalues.
    const auto& values = solver.eigenvalues();
    const auto& vectors = solver.eigenvectors();

    TransformModel model;
    model.kind = TransformKind::kPca;
    model.seed = seed;
    model.matrix.resize(d, d);
    model.variances.resize(static_cast<size_t>(d));
    for (Eigen::Index out = 0; out < d; ++out) {
        Eigen::Index src = d - 1 - out;
        Eigen::VectorXd dir = vectors.col(src);
        Eigen::Index arg = 0;
        dir.cwiseAbs().maxCoeff(&arg);
        if (dir(arg) < 0.0) {
            dir = -dir;
        }
        model.matrix.row(out) = dir.transpose().cast<float>();
        model.variances[static_cast<size_t>(out)] =
            static_cast<float>(std::max(0.0, values(src)));
    }
    model.mean.resize(static_cast<size_t>(d));
    for (Eigen::Index j = 0; j < d; ++j) {
        model.mean[static_cast<size_t>(j)] = static_cast<float>(mean(j));
    }
    return model;
}

TransformModel
compose(const TransformModel& first, const TransformModel& second) {
    check_dim(static_cast<size_t>(second.matrix.cols()), first.dim(), "compose");
    TransformModel out;
    out.kind = (first.kind == TransformKind::kPca && second.kind == TransformKind::kRotation)
                   ? TransformKind::kPcaThenRotation
                   : second.kind;
    out.matrix = (second.matrix.cast<double>() * first.matrix.cast<double>()).cast<float>();
    out.mean = first.mean;
    out.seed = second.seed;
    out.variances.assign(second.dim(), 0.0F);
    if (!first.variances.empty()) {
        for (size_t i = 0; i < second.dim(); ++i) {
            double v = 0.0;
            for (size_t j = 0; j < first.dim(); ++j) {
                double w = second.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                v += w * w * first.variances[j];
            }
            out.variances[i] = static_cast<float>(v);
        }
    }
    return out;
}

double
orthonormality_error(const RowMatrixF& matrix) {
    Eigen::MatrixXd m = matrix.cast<double>();
    Eigen::MatrixXd gram = m.transpose() * m;
    return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

}  // namespace saq
