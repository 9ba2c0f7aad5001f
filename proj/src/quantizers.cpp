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

#include "saq/quantizers.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>

#include <fmt/format.h>

#include "saq/baselines.h"
#include "saq/binary_io.h"
#include "saq/caq.h"
#include "saq/error.h"
#include "saq/lvq.h"
#include "saq/saq.h"
#include "saq/seed.h"
#include "saq/transforms.h"

namespace saq {

namespace fs = std::filesystem;

std::string_view
to_string(QuantizerKind kind) {
    switch (kind) {
        case QuantizerKind::kExact:
            return "exact";
        case QuantizerKind::kCaq:
            return "caq";
        case QuantizerKind::kSaq:
            return "saq";
        case QuantizerKind::kLvq:
            return "lvq";
        case QuantizerKind::kPq:
            return "pq";
        case QuantizerKind::kPcaDrop:
            return "pca";
    }
    return "unknown";
}

QuantizerKind
parse_quantizer_kind(std::string_view name) {
    for (auto kind : {QuantizerKind::kExact, QuantizerKind::kCaq, QuantizerKind::kSaq,
                      QuantizerKind::kLvq, QuantizerKind::kPq, QuantizerKind::kPcaDrop}) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw_error(ErrorCode::kConfig, fmt::format("unknown quantizer '{}'", name));
}

size_t
pq_subspaces_for_rate(size_t dim, double bits, size_t k) {
    const double per_code = std::log2(static_cast<double>(k));
    auto m = static_cast<size_t>(std::llround(bits * static_cast<double>(dim) / per_code));
    return std::clamp<size_t>(m, 1, dim);
}

TopKHeap::TopKHeap(size_t capacity) : capacity_(capacity) {
    items_.reserve(capacity);
}

void
TopKHeap::push(float distance, uint32_t id) {
    if (capacity_ == 0) {
        return;
    }
    std::pair<float, uint32_t> item{distance, id};
    if (items_.size() < capacity_) {
        items_.push_back(item);
        std::push_heap(items_.begin(), items_.end());
    } else if (item < items_.front()) {
        std::pop_heap(items_.begin(), items_.end());
        items_.back() = item;
        std::push_heap(items_.begin(), items_.end());
    }
}

std::vector<std::pair<float, uint32_t>>
TopKHeap::take_sorted() {
    std::sort_heap(items_.begin(), items_.end());
    return std::exchange(items_, {});
}

RowMatrixF
Quantizer::transform_batch(const RowMatrixF& data) const {
    RowMatrixF out(data.rows(), static_cast<Eigen::Index>(transformed_dim()));
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        transform(row_span(data, i), row_span(out, i));
    }
    return out;
}

namespace {

unsigned
integer_bits(double bits, std::string_view who) {
    const auto rounded = std::lround(bits);
    if (std::abs(bits - static_cast<double>(rounded)) > 1e-9 || rounded < 1 || rounded > 16) {
        throw_error(ErrorCode::kConfig,
                    fmt::format("{} needs an integer bit width in [1, 16], got {}", who, bits));
    }
    return static_cast<unsigned>(rounded);
}

void
require(bool trained, std::string_view who) {
    if (!trained) {
        throw_error(ErrorCode::kUntrained, fmt::format("{} quantizer is not trained", who));
    }
}

double
seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string
join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

// Dense y = M x for a row-major M.
void
matvec(const RowMatrixF& m, std::span<const float> in, std::span<float> out) {
    Eigen::Map<Eigen::VectorXf>(out.data(), m.rows()).noalias() = m * as_eigen(in);
}

template <typename T>
const T&
downcast(const EncodedList& list) {
    return static_cast<const T&>(list);
}

void
write_dim_header(const std::string& dir, QuantizerKind kind, size_t dim) {
    auto out = io::open_output(join(dir, "quantizer.bin"));
    io::Writer w(out);
    w.magic("VQQZ");
    w.pod<uint8_t>(static_cast<uint8_t>(kind));
    w.pod<uint32_t>(static_cast<uint32_t>(dim));
}

size_t
read_dim_header(const std::string& dir, QuantizerKind kind) {
    const auto path = join(dir, "quantizer.bin");
    auto in = io::open_input(path);
    io::Reader r(in, path);
    r.expect_magic("VQQZ");
    if (r.pod<uint8_t>() != static_cast<uint8_t>(kind)) {
        throw_error(ErrorCode::kFormat, path + ": quantizer kind does not match the configuration");
    }
    return r.pod<uint32_t>();
}

// ---------------------------------------------------------------------------
// Exact: raw float residuals.

struct FloatList : EncodedList {
    RowMatrixF rows;

    size_t
    size() const override {
        return static_cast<size_t>(rows.rows());
    }

    void
    write(std::ostream& out) const override {
        io::Writer w(out);
        w.pod<uint64_t>(static_cast<uint64_t>(rows.rows()));
        w.pod<uint32_t>(static_cast<uint32_t>(rows.cols()));
        w.array<float>(std::span<const float>(rows.data(), static_cast<size_t>(rows.size())));
    }

    static std::unique_ptr<FloatList>
    read(std::istream& in, const std::string& what) {
        io::Reader r(in, what);
        auto list = std::make_unique<FloatList>();
        auto n = r.pod<uint64_t>();
        auto d = r.pod<uint32_t>();
        list->rows.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
        r.array_into(std::span<float>(list->rows.data(), static_cast<size_t>(list->rows.size())));
        return list;
    }
};

class ExactQuantizer : public Quantizer {
public:
    QuantizerKind
    kind() const override {
        return QuantizerKind::kExact;
    }
    void
    train(const RowMatrixF& residuals, uint64_t) override {
        dim_ = static_cast<size_t>(residuals.cols());
    }
    size_t
    input_dim() const override {
        return dim_;
    }
    size_t
    transformed_dim() const override {
        return dim_;
    }
    void
    transform(std::span<const float> in, std::span<float> out) const override {
        check_dim(in.size(), dim_, "exact transform");
        std::copy(in.begin(), in.end(), out.begin());
    }
    RowMatrixF
    transform_batch(const RowMatrixF& data) const override {
        return data;
    }
    std::unique_ptr<EncodedList>
    encode(const RowMatrixF& transformed) const override {
        auto list = std::make_unique<FloatList>();
        list->rows = transformed;
        return list;
    }
    size_t
    code_bits() const override {
        return 32 * dim_;
    }
    size_t
    code_bytes() const override {
        return 4 * dim_;
    }
    void
    scan(const EncodedList& list, std::span<const uint32_t> ids, std::span<const float> q,
         TopKHeap& heap, ScanStats& stats, const ScanOptions&) const override {
        const auto& rows = downcast<FloatList>(list).rows;
        for (Eigen::Index i = 0; i < rows.rows(); ++i) {
            heap.push(l2_sqr(row_span(rows, i), q), ids[static_cast<size_t>(i)]);
        }
        stats.candidates += ids.size();
        stats.bits_accessed += ids.size() * code_bits();
    }
    void
    estimate_all(const EncodedList& list, std::span<const float> q, std::span<float> out,
                 const ScanOptions&) const override {
        const auto& rows = downcast<FloatList>(list).rows;
        for (Eigen::Index i = 0; i < rows.rows(); ++i) {
            out[static_cast<size_t>(i)] = l2_sqr(row_span(rows, i), q);
        }
    }
    void
    save(const std::string& dir) const override {
        write_dim_header(dir, kind(), dim_);
    }
    void
    load(const std::string& dir) override {
        dim_ = read_dim_header(dir, kind());
    }
    std::unique_ptr<EncodedList>
    read_list(std::istream& in, const std::string& what) const override {
        return FloatList::read(in, what);
    }
    std::string
    describe() const override {
        return "exact";
    }

private:
    size_t dim_ = 0;
};

// ---------------------------------------------------------------------------
// CAQ: one random rotation over all dimensions, then B-bit adjusted codes.

struct CaqList : EncodedList {
    CaqCodeBlock block;

    size_t
    size() const override {
        return block.size();
    }
    void
    write(std::ostream& out) const override {
        block.write(out);
    }
};

class CaqQuantizer : public Quantizer {
public:
    explicit CaqQuantizer(const QuantizerConfig& config)
        : bits_(integer_bits(config.bits, "caq")), rounds_(config.rounds) {
    }
    QuantizerKind
    kind() const override {
        return QuantizerKind::kCaq;
    }
    void
    train(const RowMatrixF& residuals, uint64_t seed) override {
        rotation_ = gen_rotation(static_cast<size_t>(residuals.cols()), derive_seed(seed, "caq-rotation"));
        trained_ = true;
    }
    size_t
    input_dim() const override {
        return rotation_.dim();
    }
    size_t
    transformed_dim() const override {
        return rotation_.dim();
    }
    void
    transform(std::span<const float> in, std::span<float> out) const override {
        require(trained_, "caq");
        check_dim(in.size(), rotation_.dim(), "caq transform");
        matvec(rotation_.matrix, in, out);
    }
    RowMatrixF
    transform_batch(const RowMatrixF& data) const override {
        require(trained_, "caq");
        check_dim(static_cast<size_t>(data.cols()), rotation_.dim(), "caq transform");
        return data * rotation_.matrix.transpose();
    }
    std::unique_ptr<EncodedList>
    encode(const RowMatrixF& transformed) const override {
        auto list = std::make_unique<CaqList>();
        list->block = caq_quantize_batch(transformed, bits_, rounds_);
        return list;
    }
    size_t
    code_bits() const override {
        return bits_ * rotation_.dim();
    }
    size_t
    code_bytes() const override {
        return CaqCodeBlock(rotation_.dim(), bits_).record_bytes();
    }
    void
    scan(const EncodedList& list, std::span<const uint32_t> ids, std::span<const float> q,
         TopKHeap& heap, ScanStats& stats, const ScanOptions& options) const override {
        const auto& block = downcast<CaqList>(list).block;
        const auto ctx = CaqQueryContext::make(q);
        const unsigned width = effective_bits(options);
        for (size_t i = 0; i < block.size(); ++i) {
            heap.push(block.estimate_dist(i, ctx, width), ids[i]);
        }
        stats.candidates += block.size();
        stats.bits_accessed += block.size() * width * block.dim();
    }
    void
    estimate_all(const EncodedList& list, std::span<const float> q, std::span<float> out,
                 const ScanOptions& options) const override {
        const auto& block = downcast<CaqList>(list).block;
        const auto ctx = CaqQueryContext::make(q);
        const unsigned width = effective_bits(options);
        for (size_t i = 0; i < block.size(); ++i) {
            out[i] = block.estimate_dist(i, ctx, width);
        }
    }
    void
    save(const std::string& dir) const override {
        rotation_.save(join(dir, "rotation.vqtm"));
    }
    void
    load(const std::string& dir) override {
        rotation_ = TransformModel::load(join(dir, "rotation.vqtm"));
        trained_ = true;
    }
    std::unique_ptr<EncodedList>
    read_list(std::istream& in, const std::string& what) const override {
        auto list = std::make_unique<CaqList>();
        list->block = CaqCodeBlock::read(in, what);
        return list;
    }
    std::string
    describe() const override {
        return fmt::format("caq bits={} rounds={}", bits_, rounds_);
    }

private:
    unsigned
    effective_bits(const ScanOptions& options) const {
        if (options.prefix_bits == 0) {
            return bits_;
        }
        if (options.prefix_bits > bits_) {
            throw_error(ErrorCode::kInvalidArgument,
                        fmt::format("prefix width {} exceeds code width {}", options.prefix_bits, bits_));
        }
        return options.prefix_bits;
    }

    unsigned bits_;
    unsigned rounds_;
    TransformModel rotation_;
    bool trained_ = false;
};

// ---------------------------------------------------------------------------
// SAQ: PCA, zero padding, per-segment rotation and CAQ.

struct SaqList : EncodedList {
    SaqCodeSet codes;

    size_t
    size() const override {
        return codes.size();
    }
    void
    write(std::ostream& out) const override {
        io::Writer w(out);
        w.pod<uint64_t>(static_cast<uint64_t>(codes.size()));
        w.array<float>(codes.norm_sq);
        for (const auto& block : codes.segments) {
            if (block.dim() > 0) {
                block.write(out);
            }
        }
    }
};

class SaqQuantizer : public Quantizer {
public:
    explicit SaqQuantizer(const QuantizerConfig& config) : config_(config) {
        if (!(config.bits >= 0.0) || config.bits > static_cast<double>(config.max_segment_bits)) {
            throw_error(ErrorCode::kConfig,
                        fmt::format("saq bits must lie in [0, {}], got {}", config.max_segment_bits,
                                    config.bits));
        }
    }
    QuantizerKind
    kind() const override {
        return QuantizerKind::kSaq;
    }
    void
    train(const RowMatrixF& residuals, uint64_t seed) override {
        dim_ = static_cast<size_t>(residuals.cols());
        const size_t granularity = effective_granularity(dim_, config_.granularity);
        const size_t padded = padded_dim(dim_, granularity);
        std::vector<float> spectrum(padded, 0.0F);
        RowMatrixF projected;
        if (config_.use_pca) {
            const auto start = std::chrono::steady_clock::now();
            pca_ = fit_pca(residuals, derive_seed(seed, "saq-pca"), PcaOptions{config_.max_train});
            pca_seconds_ = seconds_since(start);
            std::copy(pca_.variances.begin(), pca_.variances.end(), spectrum.begin());
            projected = residuals * pca_.matrix.transpose();
        } else {
            pca_ = TransformModel{};
            pca_.matrix = RowMatrixF::Identity(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
            pca_.mean.assign(dim_, 0.0F);
            pca_.variances.assign(dim_, 0.0F);
            auto moments = column_second_moment(residuals);
            double mean = 0.0;
            for (auto v : moments) {
                mean += v;
            }
            mean /= static_cast<double>(dim_);
            std::fill(spectrum.begin(), spectrum.begin() + static_cast<long>(dim_), static_cast<float>(mean));
            projected = residuals;
        }
        PlanSearchOptions options;
        options.granularity = granularity;
        options.max_bits = config_.max_segment_bits;
        const auto quota = static_cast<int64_t>(std::llround(config_.bits * static_cast<double>(dim_)));
        auto plan = search_plan(spectrum, quota, options);
        model_ = std::make_shared<SaqModel>(train_saq_model(pad_columns(projected, padded), plan,
                                                            derive_seed(seed, "saq-rotation"),
                                                            config_.rounds));
    }
    size_t
    input_dim() const override {
        return dim_;
    }
    /// Rotated coordinates followed by the unrotated (PCA) ones; the latter
    /// feed the per-segment variance bounds.
    size_t
    transformed_dim() const override {
        return model_ ? 2 * model_->dim() : 0;
    }
    void
    transform(std::span<const float> in, std::span<float> out) const override {
        require(model_ != nullptr, "saq");
        check_dim(in.size(), dim_, "saq transform");
        const size_t padded = model_->dim();
        auto projected = out.subspan(padded, padded);
        std::fill(projected.begin(), projected.end(), 0.0F);
        matvec(pca_.matrix, in, projected.first(dim_));
        model_->rotate_into(projected, out.first(padded));
    }
    RowMatrixF
    transform_batch(const RowMatrixF& data) const override {
        require(model_ != nullptr, "saq");
        check_dim(static_cast<size_t>(data.cols()), dim_, "saq transform");
        const auto padded = static_cast<Eigen::Index>(model_->dim());
        RowMatrixF projected = pad_columns(data * pca_.matrix.transpose(), model_->dim());
        RowMatrixF out(data.rows(), 2 * padded);
        out.leftCols(padded) = model_->rotate_batch(projected);
        out.rightCols(padded) = projected;
        return out;
    }
    std::unique_ptr<EncodedList>
    encode(const RowMatrixF& transformed) const override {
        auto list = std::make_unique<SaqList>();
        list->codes = saq_encode_rotated(model_, transformed.leftCols(static_cast<Eigen::Index>(model_->dim())));
        return list;
    }
    size_t
    code_bits() const override {
        return model_->plan.cost_bits();
    }
    size_t
    code_bytes() const override {
        size_t bytes = sizeof(float);
        for (const auto& seg : model_->plan.segments) {
            if (seg.bits > 0) {
                bytes += CaqCodeBlock(seg.len, seg.bits).record_bytes();
            }
        }
        return bytes;
    }
    void
    scan(const EncodedList& list, std::span<const uint32_t> ids, std::span<const float> q,
         TopKHeap& heap, ScanStats& stats, const ScanOptions& options) const override {
        const auto& codes = downcast<SaqList>(list).codes;
        const auto ctx = context(q, options);
        for (size_t i = 0; i < codes.size(); ++i) {
            std::optional<float> threshold;
            if (options.prune) {
                threshold = heap.threshold();
            }
            auto r = saq_estimate_multistage(codes, i, ctx, threshold);
            stats.bits_accessed += r.bits_accessed;
            if (r.pruned) {
                ++stats.pruned;
            } else {
                heap.push(r.distance, ids[i]);
            }
        }
        stats.candidates += codes.size();
    }
    void
    estimate_all(const EncodedList& list, std::span<const float> q, std::span<float> out,
                 const ScanOptions& options) const override {
        const auto& codes = downcast<SaqList>(list).codes;
        const auto ctx = context(q, options);
        for (size_t i = 0; i < codes.size(); ++i) {
            out[i] = saq_estimate_multistage(codes, i, ctx).distance;
        }
    }
    void
    save(const std::string& dir) const override {
        write_dim_header(dir, kind(), dim_);
        pca_.save(join(dir, "pca.vqtm"));
        model_->save(dir);
    }
    void
    load(const std::string& dir) override {
        dim_ = read_dim_header(dir, kind());
        pca_ = TransformModel::load(join(dir, "pca.vqtm"));
        model_ = std::make_shared<SaqModel>(SaqModel::load(dir));
    }
    std::unique_ptr<EncodedList>
    read_list(std::istream& in, const std::string& what) const override {
        io::Reader r(in, what);
        auto list = std::make_unique<SaqList>();
        auto& codes = list->codes;
        codes.model = model_;
        const auto n = r.pod<uint64_t>();
        codes.norm_sq = r.array<float>(n);
        for (const auto& seg : model_->plan.segments) {
            if (seg.bits > 0) {
                codes.segments.push_back(CaqCodeBlock::read(in, what));
                if (codes.segments.back().size() != n) {
                    throw_error(ErrorCode::kFormat, what + ": segment code counts disagree");
                }
            } else {
                codes.segments.emplace_back();
            }
        }
        return list;
    }
    std::string
    describe() const override {
        return fmt::format("saq quota={} plan=[{}]", model_->plan.quota, model_->plan.summary());
    }

private:
    SaqQueryContext
    context(std::span<const float> q, const ScanOptions& options) const {
        const size_t padded = model_->dim();
        return make_saq_query_context(*model_, q.subspan(padded, padded), q.first(padded), options.confidence);
    }

    QuantizerConfig config_;
    size_t dim_ = 0;
    TransformModel pca_;
    std::shared_ptr<const SaqModel> model_;
};

// ---------------------------------------------------------------------------
// LVQ: per-vector range quantization of the unrotated residual.

struct LvqList : EncodedList {
    size_t dim = 0;
    unsigned bits = 0;
    std::vector<uint16_t> codes;
    std::vector<float> lo;
    std::vector<float> step;

    size_t
    size() const override {
        return lo.size();
    }
    void
    write(std::ostream& out) const override {
        io::Writer w(out);
        w.pod<uint64_t>(static_cast<uint64_t>(size()));
        w.array<uint16_t>(codes);
        w.array<float>(lo);
        w.array<float>(step);
    }
};

class LvqQuantizer : public Quantizer {
public:
    explicit LvqQuantizer(const QuantizerConfig& config) : bits_(integer_bits(config.bits, "lvq")) {
    }
    QuantizerKind
    kind() const override {
        return QuantizerKind::kLvq;
    }
    void
    train(const RowMatrixF& residuals, uint64_t) override {
        dim_ = static_cast<size_t>(residuals.cols());
    }
    size_t
    input_dim() const override {
        return dim_;
    }
    size_t
    transformed_dim() const override {
        return dim_;
    }
    void
    transform(std::span<const float> in, std::span<float> out) const override {
        check_dim(in.size(), dim_, "lvq transform");
        std::copy(in.begin(), in.end(), out.begin());
    }
    RowMatrixF
    transform_batch(const RowMatrixF& data) const override {
        return data;
    }
    std::unique_ptr<EncodedList>
    encode(const RowMatrixF& transformed) const override {
        auto list = std::make_unique<LvqList>();
        const auto n = static_cast<size_t>(transformed.rows());
        list->dim = dim_;
        list->bits = bits_;
        list->codes.resize(n * dim_);
        list->lo.resize(n);
        list->step.resize(n);
        const std::vector<float> zero(dim_, 0.0F);
        for (size_t i = 0; i < n; ++i) {
            auto code = lvq_quantize(row_span(transformed, static_cast<Eigen::Index>(i)), zero, bits_);
            std::copy(code.codes.begin(), code.codes.end(), list->codes.begin() + static_cast<long>(i * dim_));
            list->lo[i] = code.lo;
            list->step[i] = code.step();
        }
        return list;
    }
    size_t
    code_bits() const override {
        return bits_ * dim_;
    }
    size_t
    code_bytes() const override {
        return (bits_ * dim_ + 7) / 8 + 2 * sizeof(float);
    }
    void
    scan(const EncodedList& list, std::span<const uint32_t> ids, std::span<const float> q,
         TopKHeap& heap, ScanStats& stats, const ScanOptions&) const override {
        const auto& l = downcast<LvqList>(list);
        for (size_t i = 0; i < l.size(); ++i) {
            heap.push(distance(l, i, q), ids[i]);
        }
        stats.candidates += l.size();
        stats.bits_accessed += l.size() * code_bits();
    }
    void
    estimate_all(const EncodedList& list, std::span<const float> q, std::span<float> out,
                 const ScanOptions&) const override {
        const auto& l = downcast<LvqList>(list);
        for (size_t i = 0; i < l.size(); ++i) {
            out[i] = distance(l, i, q);
        }
    }
    void
    save(const std::string& dir) const override {
        write_dim_header(dir, kind(), dim_);
    }
    void
    load(const std::string& dir) override {
        dim_ = read_dim_header(dir, kind());
    }
    std::unique_ptr<EncodedList>
    read_list(std::istream& in, const std::string& what) const override {
        io::Reader r(in, what);
        auto list = std::make_unique<LvqList>();
        const auto n = r.pod<uint64_t>();
        list->dim = dim_;
        list->bits = bits_;
        list->codes = r.array<uint16_t>(n * dim_);
        list->lo = r.array<float>(n);
        list->step = r.array<float>(n);
        return list;
    }
    std::string
    describe() const override {
        return fmt::format("lvq bits={}", bits_);
    }

private:
    float
    distance(const LvqList& l, size_t i, std::span<const float> q) const {
        return lvq_distance_centered(std::span<const uint16_t>(l.codes.data() + i * dim_, dim_), l.lo[i],
                                     l.step[i], q);
    }

    unsigned bits_;
    size_t dim_ = 0;
};

// ---------------------------------------------------------------------------
// PQ on raw residuals with 8-bit codes per subspace.

struct PqList : EncodedList {
    size_t m = 0;
    std::vector<uint8_t> codes;

    size_t
    size() const override {
        return m == 0 ? 0 : codes.size() / m;
    }
    void
    write(std::ostream& out) const override {
        io::Writer w(out);
        w.pod<uint64_t>(static_cast<uint64_t>(size()));
        w.array<uint8_t>(codes);
    }
};

class PqQuantizer : public Quantizer {
public:
    explicit PqQuantizer(const QuantizerConfig& config) : config_(config) {
    }
    QuantizerKind
    kind() const override {
        return QuantizerKind::kPq;
    }
    void
    train(const RowMatrixF& residuals, uint64_t seed) override {
        const auto dim = static_cast<size_t>(residuals.cols());
        const size_t m = config_.pq_m > 0 ? config_.pq_m : pq_subspaces_for_rate(dim, config_.bits, config_.pq_k);
        PqTrainOptions options;
        options.iters = config_.train_iters;
        options.seed = derive_seed(seed, "pq");
        options.max_train = config_.max_train;
        model_ = pq_train(residuals, m, config_.pq_k, options);
    }
    size_t
    input_dim() const override {
        return model_.dim;
    }
    size_t
    transformed_dim() const override {
        return model_.dim;
    }
    void
    transform(std::span<const float> in, std::span<float> out) const override {
        check_dim(in.size(), model_.dim, "pq transform");
        std::copy(in.begin(), in.end(), out.begin());
    }
    RowMatrixF
    transform_batch(const RowMatrixF& data) const override {
        return data;
    }
    std::unique_ptr<EncodedList>
    encode(const RowMatrixF& transformed) const override {
        auto list = std::make_unique<PqList>();
        list->m = model_.m;
        const auto n = static_cast<size_t>(transformed.rows());
        list->codes.resize(n * model_.m);
        for (size_t i = 0; i < n; ++i) {
            pq_encode_into(model_, row_span(transformed, static_cast<Eigen::Index>(i)),
                           std::span<uint8_t>(list->codes.data() + i * model_.m, model_.m));
        }
        return list;
    }
    size_t
    code_bits() const override {
        return static_cast<size_t>(std::llround(static_cast<double>(model_.m) *
                                                std::log2(static_cast<double>(model_.k))));
    }
    size_t
    code_bytes() const override {
        return model_.m;
    }
    void
    scan(const EncodedList& list, std::span<const uint32_t> ids, std::span<const float> q,
         TopKHeap& heap, ScanStats& stats, const ScanOptions&) const override {
        const auto& l = downcast<PqList>(list);
        const auto lut = pq_lut(model_, q);
        for (size_t i = 0; i < l.size(); ++i) {
            heap.push(pq_adc_lut(lut, code(l, i), model_.k), ids[i]);
        }
        stats.candidates += l.size();
        stats.bits_accessed += l.size() * code_bits();
    }
    void
    estimate_all(const EncodedList& list, std::span<const float> q, std::span<float> out,
                 const ScanOptions&) const override {
        const auto& l = downcast<PqList>(list);
        const auto lut = pq_lut(model_, q);
        for (size_t i = 0; i < l.size(); ++i) {
            out[i] = pq_adc_lut(lut, code(l, i), model_.k);
        }
    }
    void
    save(const std::string& dir) const override {
        model_.save(join(dir, "pq.vqpq"));
    }
    void
    load(const std::string& dir) override {
        model_ = PqModel::load(join(dir, "pq.vqpq"));
    }
    std::unique_ptr<EncodedList>
    read_list(std::istream& in, const std::string& what) const override {
        io::Reader r(in, what);
        auto list = std::make_unique<PqList>();
        list->m = model_.m;
        list->codes = r.array<uint8_t>(r.pod<uint64_t>() * model_.m);
        return list;
    }
    std::string
    describe() const override {
        return fmt::format("pq m={} k={}", model_.m, model_.k);
    }

private:
    std::span<const uint8_t>
    code(const PqList& l, size_t i) const {
        return {l.codes.data() + i * model_.m, model_.m};
    }

    QuantizerConfig config_;
    PqModel model_;
};

// ---------------------------------------------------------------------------
// PCA-drop: keep the leading principal coordinates as floats.

class PcaDropQuantizer : public Quantizer {
public:
    explicit PcaDropQuantizer(const QuantizerConfig& config) : config_(config) {
    }
    QuantizerKind
    kind() const override {
        return QuantizerKind::kPcaDrop;
    }
    void
    train(const RowMatrixF& residuals, uint64_t seed) override {
        const auto dim = static_cast<size_t>(residuals.cols());
        const auto start = std::chrono::steady_clock::now();
        auto pca = fit_pca(residuals, derive_seed(seed, "pca-drop"), PcaOptions{config_.max_train});
        pca_seconds_ = seconds_since(start);
        model_ = make_pca_drop(std::move(pca), pca_drop_dims_for_rate(dim, config_.bits));
    }
    size_t
    input_dim() const override {
        return model_.pca.dim();
    }
    size_t
    transformed_dim() const override {
        return model_.pca.dim();
    }
    void
    transform(std::span<const float> in, std::span<float> out) const override {
        check_dim(in.size(), model_.pca.dim(), "pca transform");
        matvec(model_.pca.matrix, in, out);
    }
    RowMatrixF
    transform_batch(const RowMatrixF& data) const override {
        return data * model_.pca.matrix.transpose();
    }
    std::unique_ptr<EncodedList>
    encode(const RowMatrixF& transformed) const override {
        auto list = std::make_unique<FloatList>();
        list->rows = transformed.leftCols(static_cast<Eigen::Index>(model_.kept_dims));
        return list;
    }
    size_t
    code_bits() const override {
        return 32 * model_.kept_dims;
    }
    size_t
    code_bytes() const override {
        return 4 * model_.kept_dims;
    }
    void
    scan(const EncodedList& list, std::span<const uint32_t> ids, std::span<const float> q,
         TopKHeap& heap, ScanStats& stats, const ScanOptions&) const override {
        const auto& rows = downcast<FloatList>(list).rows;
        const auto lead = q.first(model_.kept_dims);
        for (Eigen::Index i = 0; i < rows.rows(); ++i) {
            heap.push(pca_drop_distance_projected(row_span(rows, i), lead), ids[static_cast<size_t>(i)]);
        }
        stats.candidates += ids.size();
        stats.bits_accessed += ids.size() * code_bits();
    }
    void
    estimate_all(const EncodedList& list, std::span<const float> q, std::span<float> out,
                 const ScanOptions&) const override {
        const auto& rows = downcast<FloatList>(list).rows;
        const auto lead = q.first(model_.kept_dims);
        for (Eigen::Index i = 0; i < rows.rows(); ++i) {
            out[static_cast<size_t>(i)] = pca_drop_distance_projected(row_span(rows, i), lead);
        }
    }
    void
    save(const std::string& dir) const override {
        model_.pca.save(join(dir, "pca.vqtm"));
        write_dim_header(dir, kind(), model_.kept_dims);
    }
    void
    load(const std::string& dir) override {
        auto pca = TransformModel::load(join(dir, "pca.vqtm"));
        model_ = make_pca_drop(std::move(pca), read_dim_header(dir, kind()));
    }
    std::unique_ptr<EncodedList>
    read_list(std::istream& in, const std::string& what) const override {
        return FloatList::read(in, what);
    }
    std::string
    describe() const override {
        return fmt::format("pca kept={}", model_.kept_dims);
    }

private:
    QuantizerConfig config_;
    PcaDropModel model_;
};

}  // namespace

std::unique_ptr<Quantizer>
make_quantizer(const QuantizerConfig& config) {
    switch (config.kind) {
        case QuantizerKind::kExact:
            return std::make_unique<ExactQuantizer>();
        case QuantizerKind::kCaq:
            return std::make_unique<CaqQuantizer>(config);
        case QuantizerKind::kSaq:
            return std::make_unique<SaqQuantizer>(config);
        case QuantizerKind::kLvq:
            return std::make_unique<LvqQuantizer>(config);
        case QuantizerKind::kPq:
            return std::make_unique<PqQuantizer>(config);
        case QuantizerKind::kPcaDrop:
            return std::make_unique<PcaDropQuantizer>(config);
    }
    throw_error(ErrorCode::kInternal, "unhandled quantizer kind");
}

}  // namespace saq
