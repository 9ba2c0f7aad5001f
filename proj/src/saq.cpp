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

#include "saq/saq.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "saq/binary_io.h"
#include "saq/bitpack.h"
#include "saq/error.h"
#include "saq/seed.h"

namespace saq {

namespace fs = std::filesystem;

size_t
QuantizationPlan::cost_bits() const {
    size_t cost = 0;
    for (const auto& s : segments) {
        cost += s.len * s.bits;
    }
    return cost;
}

size_t
QuantizationPlan::offset(size_t segment) const {
    size_t off = 0;
    for (size_t s = 0; s < segment; ++s) {
        off += segments[s].len;
    }
    return off;
}

std::string
QuantizationPlan::to_string() const {
    std::string out = fmt::format("dims {}\nquota {}\nmodeled_error {:.9e}\nsegments {}\n",
                                  total_dims, quota, modeled_error, segments.size());
    for (const auto& s : segments) {
        out += fmt::format("{} {}\n", s.len, s.bits);
    }
    return out;
}

std::string
QuantizationPlan::summary() const {
    std::string out;
    for (const auto& s : segments) {
        out += fmt::format("{}{}x{}", out.empty() ? "" : " ", s.len, s.bits);
    }
    return out;
}

void
QuantizationPlan::save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw_error(ErrorCode::kIo, "cannot open for writing: " + path);
    }
    out << to_string();
}

QuantizationPlan
QuantizationPlan::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw_error(ErrorCode::kIo, "cannot open for reading: " + path);
    }
    QuantizationPlan plan;
    std::string key;
    size_t count = 0;
    auto expect = [&](const char* name) {
        if (!(in >> key) || key != name) {
            throw_error(ErrorCode::kFormat, path + ": expected '" + name + "'");
        }
    };
    expect("dims");
    in >> plan.total_dims;
    expect("quota");
    in >> plan.quota;
    expect("modeled_error");
    in >> plan.modeled_error;
    expect("segments");
    in >> count;
    if (!in) {
        throw_error(ErrorCode::kFormat, path + ": malformed header");
    }
    for (size_t i = 0; i < count; ++i) {
        Segment s;
        if (!(in >> s.len >> s.bits)) {
            throw_error(ErrorCode::kFormat, path + ": truncated segment list");
        }
        plan.segments.push_back(s);
    }
    size_t dims = 0;
    for (const auto& s : plan.segments) {
        dims += s.len;
    }
    if (dims != plan.total_dims) {
        throw_error(ErrorCode::kFormat, path + ": segment lengths do not sum to dims");
    }
    return plan;
}

double
model_error(std::span<const float> variances, unsigned bits) {
    double sum = 0.0;
    for (float v : variances) {
        sum += v;
    }
    return std::ldexp(sum, -static_cast<int>(bits));
}

double
model_error(const QuantizationPlan& plan, std::span<const float> variances) {
    double total = 0.0;
    size_t off = 0;
    for (const auto& s : plan.segments) {
        total += model_error(variances.subspan(off, s.len), s.bits);
        off += s.len;
    }
    return total;
}

size_t
effective_granularity(size_t dim, size_t granularity) {
    return dim > 0 && dim < granularity ? dim : granularity;
}

size_t
padded_dim(size_t dim, size_t granularity) {
    if (granularity == 0) {
        throw_error(ErrorCode::kInvalidArgument, "granularity must be positive");
    }
    return (dim + granularity - 1) / granularity * granularity;
}

namespace {

// Rewrites a plan so bit widths are non-increasing over blocks, then merges
// equal neighbours. Moving bits toward higher-variance blocks never raises
// the modeled error and keeps the cost unchanged.
QuantizationPlan
canonicalize(const QuantizationPlan& plan, std::span<const float> variances, size_t granularity) {
    bool monotone = true;
    for (size_t s = 1; s < plan.segments.size(); ++s) {
        if (plan.segments[s].bits >= plan.segments[s - 1].bits) {
            monotone = false;
        }
    }
    if (monotone) {
        return plan;
    }
    std::vector<unsigned> block_bits;
    for (const auto& s : plan.segments) {
        block_bits.insert(block_bits.end(), s.len / granularity, s.bits);
    }
    std::stable_sort(block_bits.begin(), block_bits.end(), std::greater<>());
    QuantizationPlan out = plan;
    out.segments.clear();
    for (unsigned b : block_bits) {
        if (!out.segments.empty() && out.segments.back().bits == b) {
            out.segments.back().len += granularity;
        } else {
            out.segments.push_back({granularity, b});
        }
    }
    out.modeled_error = model_error(out, variances);
    return out;
}

}  // namespace

QuantizationPlan
search_plan(std::span<const float> variances, int64_t quota, const PlanSearchOptions& options) {
    if (quota < 0) {
        throw_error(ErrorCode::kInvalidArgument, "search_plan: quota must be >= 0");
    }
    if (variances.empty()) {
        throw_error(ErrorCode::kInvalidArgument, "search_plan: no dimensions");
    }
    if (options.min_bits < 1 || options.max_bits < options.min_bits || options.max_bits > 16) {
        throw_error(ErrorCode::kInvalidArgument, "search_plan: invalid bit range");
    }
    for (size_t i = 1; i < variances.size(); ++i) {
        if (variances[i] > variances[i - 1]) {
            throw_error(ErrorCode::kInvalidArgument,
                        "search_plan: variances must be sorted non-increasing");
        }
    }
    const size_t g = options.granularity;
    const size_t dims = padded_dim(variances.size(), g);
    std::vector<float> padded(variances.begin(), variances.end());
    padded.resize(dims, 0.0F);

    std::vector<unsigned> widths{0};
    for (unsigned b = options.min_bits; b <= options.max_bits; ++b) {
        widths.push_back(b);
    }

    // State: (segments used, blocks covered, bit cost in units of g bits).
    // An optimal plan never needs more segments than distinct widths.
    const size_t blocks = dims / g;
    const size_t budget = static_cast<size_t>(quota) / g;
    const size_t max_segments = std::min(blocks, widths.size());
    const size_t plane = (blocks + 1) * (budget + 1);
    auto at = [&](size_t s, size_t i, size_t q) { return s * plane + i * (budget + 1) + q; };
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> best((max_segments + 1) * plane, kInf);
    struct Parent {
        uint32_t prev_block = 0;
        uint32_t prev_cost = 0;
        unsigned bits = 0;
    };
    std::vector<Parent> parent(best.size());
    best[at(0, 0, 0)] = 0.0;

    for (size_t s = 0; s < max_segments; ++s) {
        for (size_t i = 0; i < blocks; ++i) {
            for (size_t q = 0; q <= budget; ++q) {
                const double base = best[at(s, i, q)];
                if (base == kInf) {
                    continue;
                }
                double var_sum = 0.0;
                for (size_t j = i + 1; j <= blocks; ++j) {
                    // Same left-to-right summation as model_error(span, bits).
                    for (size_t d = (j - 1) * g; d < j * g; ++d) {
                        var_sum += padded[d];
                    }
                    const size_t len_blocks = j - i;
                    for (unsigned b : widths) {
                        const size_t cost = q + b * len_blocks;
                        if (cost > budget) {
                            break;
                        }
                        const double err = base + std::ldexp(var_sum, -static_cast<int>(b));
                        const size_t idx = at(s + 1, j, cost);
                        if (err < best[idx]) {
                            best[idx] = err;
                            parent[idx] = {static_cast<uint32_t>(i), static_cast<uint32_t>(q), b};
                        }
                    }
                }
            }
        }
    }

    double optimum = kInf;
    for (size_t s = 1; s <= max_segments; ++s) {
        for (size_t q = 0; q <= budget; ++q) {
            optimum = std::min(optimum, best[at(s, blocks, q)]);
        }
    }
    if (optimum == kInf) {
        throw_error(ErrorCode::kInternal, "search_plan: no feasible plan");
    }
    // Fewest segments within tolerance; then least error; then least cost.
    size_t pick_s = 0;
    size_t pick_q = 0;
    const double limit = optimum * (1.0 + options.tolerance);
    for (size_t s = 1; s <= max_segments && pick_s == 0; ++s) {
        double local = kInf;
        for (size_t q = 0; q <= budget; ++q) {
            if (best[at(s, blocks, q)] < local) {
                local = best[at(s, blocks, q)];
                pick_q = q;
            }
        }
        if (local <= limit) {
            pick_s = s;
        }
    }

    QuantizationPlan plan;
    plan.total_dims = dims;
    plan.quota = static_cast<size_t>(quota);
    plan.modeled_error = best[at(pick_s, blocks, pick_q)];
    size_t s = pick_s;
    size_t i = blocks;
    size_t q = pick_q;
    while (s > 0) {
        const auto& p = parent[at(s, i, q)];
        plan.segments.push_back({(i - p.prev_block) * g, p.bits});
        i = p.prev_block;
        q = p.prev_cost;
        --s;
    }
    std::reverse(plan.segments.begin(), plan.segments.end());
    return canonicalize(plan, padded, g);
}

uint64_t
segment_seed(uint64_t seed, size_t segment) {
    return segment == 0 ? seed : derive_seed(seed, static_cast<uint64_t>(segment));
}

std::vector<float>
pad_to(std::span<const float> v, size_t dim) {
    if (v.size() > dim) {
        throw_error(ErrorCode::kDimensionMismatch,
                    fmt::format("vector of dimension {} does not fit padded dimension {}", v.size(),
                                dim));
    }
    std::vector<float> out(v.begin(), v.end());
    out.resize(dim, 0.0F);
    return out;
}

RowMatrixF
pad_columns(const RowMatrixF& data, size_t dim) {
    if (static_cast<size_t>(data.cols()) == dim) {
        return data;
    }
    if (static_cast<size_t>(data.cols()) > dim) {
        throw_error(ErrorCode::kDimensionMismatch, "pad_columns: data wider than target");
    }
    RowMatrixF out = RowMatrixF::Zero(data.rows(), static_cast<Eigen::Index>(dim));
    out.leftCols(data.cols()) = data;
    return out;
}

void
SaqModel::rotate_into(std::span<const float> in, std::span<float> out) const {
    check_dim(in.size(), dim(), "SaqModel::rotate_into");
    check_dim(out.size(), dim(), "SaqModel::rotate_into output");
    size_t off = 0;
    for (size_t s = 0; s < plan.segments.size(); ++s) {
        const auto len = plan.segments[s].len;
        const auto& rot = rotations[s];
        auto src = as_eigen(in.subspan(off, len));
        Eigen::Map<Eigen::VectorXf> dst(out.data() + off, static_cast<Eigen::Index>(len));
        if (rot.matrix.size() == 0) {
            dst = src;
        } else {
            dst.noalias() = rot.matrix * src;
        }
        off += len;
    }
}

RowMatrixF
SaqModel::rotate_batch(const RowMatrixF& data) const {
    check_dim(static_cast<size_t>(data.cols()), dim(), "SaqModel::rotate_batch");
    RowMatrixF out(data.rows(), data.cols());
    Eigen::Index off = 0;
    for (size_t s = 0; s < plan.segments.size(); ++s) {
        const auto len = static_cast<Eigen::Index>(plan.segments[s].len);
        const auto& rot = rotations[s];
        if (rot.matrix.size() == 0) {
            out.middleCols(off, len) = data.middleCols(off, len);
        } else {
            out.middleCols(off, len).noalias() = data.middleCols(off, len) * rot.matrix.transpose();
        }
        off += len;
    }
    return out;
}

void
SaqModel::save(const std::string& dir) const {
    fs::create_directories(dir);
    plan.save((fs::path(dir) / "plan.txt").string());
    for (size_t s = 0; s < rotations.size(); ++s) {
        if (rotations[s].matrix.size() != 0) {
            rotations[s].save((fs::path(dir) / fmt::format("segment_{}.vqtm", s)).string());
        }
    }
    auto out = io::open_output((fs::path(dir) / "saq_model.bin").string());
    io::Writer w(out);
    w.magic("VQSM");
    w.pod<uint64_t>(seed);
    w.pod<uint32_t>(rounds);
    w.pod<uint32_t>(static_cast<uint32_t>(variances.size()));
    w.array<float>(variances);
}

SaqModel
SaqModel::load(const std::string& dir) {
    SaqModel model;
    model.plan = QuantizationPlan::load((fs::path(dir) / "plan.txt").string());
    for (size_t s = 0; s < model.plan.segments.size(); ++s) {
        auto path = fs::path(dir) / fmt::format("segment_{}.vqtm", s);
        if (model.plan.segments[s].bits > 0) {
            model.rotations.push_back(TransformModel::load(path.string()));
            check_dim(model.rotations.back().dim(), model.plan.segments[s].len, "segment rotation");
        } else {
            model.rotations.emplace_back();
        }
    }
    auto path = (fs::path(dir) / "saq_model.bin").string();
    auto in = io::open_input(path);
    io::Reader r(in, path);
    r.expect_magic("VQSM");
    model.seed = r.pod<uint64_t>();
    model.rounds = r.pod<uint32_t>();
    auto n = r.pod<uint32_t>();
    check_dim(n, model.plan.total_dims, "saq model variances");
    model.variances = r.array<float>(n);
    return model;
}

SaqModel
train_saq_model(const RowMatrixF& data, const QuantizationPlan& plan, uint64_t seed, unsigned rounds) {
    check_dim(static_cast<size_t>(data.cols()), plan.total_dims, "train_saq_model");
    SaqModel model;
    model.plan = plan;
    model.seed = seed;
    model.rounds = rounds;
    for (size_t s = 0; s < plan.segments.size(); ++s) {
        if (plan.segments[s].bits > 0) {
            model.rotations.push_back(gen_rotation(plan.segments[s].len, segment_seed(seed, s)));
        } else {
            model.rotations.emplace_back();
        }
    }
    model.variances = column_second_moment(data);
    return model;
}

size_t
SaqCodeSet::bytes_per_vector() const {
    size_t bytes = sizeof(float);
    for (const auto& block : segments) {
        if (block.dim() > 0) {
            bytes += block.record_bytes();
        }
    }
    return bytes;
}

SaqCodeSet
saq_encode(std::shared_ptr<const SaqModel> model, const RowMatrixF& data) {
    check_dim(static_cast<size_t>(data.cols()), model->dim(), "saq_encode");
    RowMatrixF rotated = model->rotate_batch(data);
    return saq_encode_rotated(std::move(model), rotated);
}

SaqCodeSet
saq_encode_rotated(std::shared_ptr<const SaqModel> model, const RowMatrixF& rotated) {
    check_dim(static_cast<size_t>(rotated.cols()), model->dim(), "saq_encode_rotated");
    SaqCodeSet set;
    set.model = model;
    set.norm_sq.resize(static_cast<size_t>(rotated.rows()));
    for (Eigen::Index i = 0; i < rotated.rows(); ++i) {
        set.norm_sq[static_cast<size_t>(i)] = rotated.row(i).cast<double>().squaredNorm();
    }
    Eigen::Index off = 0;
    for (const auto& seg : model->plan.segments) {
        const auto len = static_cast<Eigen::Index>(seg.len);
        if (seg.bits == 0) {
            set.segments.emplace_back();
        } else {
            RowMatrixF part = rotated.middleCols(off, len);
            set.segments.push_back(caq_quantize_batch(part, seg.bits, model->rounds));
        }
        off += len;
    }
    return set;
}

SaqCodeSet
saq_quantize(const RowMatrixF& data, const QuantizationPlan& plan, const TransformModel* pca,
             uint64_t seed, unsigned rounds) {
    RowMatrixF input = pca != nullptr ? pca->apply_batch(data) : data;
    if (static_cast<size_t>(input.cols()) > plan.total_dims) {
        throw_error(ErrorCode::kDimensionMismatch,
                    fmt::format("saq_quantize: data dimension {} exceeds plan dimension {}",
                                input.cols(), plan.total_dims));
    }
    input = pad_columns(input, plan.total_dims);
    auto model = std::make_shared<SaqModel>(train_saq_model(input, plan, seed, rounds));
    return saq_encode(std::move(model), input);
}

void
SaqCodeSet::save(const std::string& dir) const {
    model->save(dir);
    for (size_t s = 0; s < segments.size(); ++s) {
        if (segments[s].dim() > 0) {
            segments[s].save((fs::path(dir) / fmt::format("segment_{}.vqcq", s)).string());
        }
    }
    auto out = io::open_output((fs::path(dir) / "norms.bin").string());
    io::Writer(out).array<float>(norm_sq);
}

SaqCodeSet
SaqCodeSet::load(const std::string& dir) {
    SaqCodeSet set;
    auto model = std::make_shared<SaqModel>(SaqModel::load(dir));
    for (size_t s = 0; s < model->plan.segments.size(); ++s) {
        if (model->plan.segments[s].bits > 0) {
            set.segments.push_back(
                CaqCodeBlock::load((fs::path(dir) / fmt::format("segment_{}.vqcq", s)).string()));
        } else {
            set.segments.emplace_back();
        }
    }
    auto path = (fs::path(dir) / "norms.bin").string();
    auto in = io::open_input(path);
    auto size = fs::file_size(path);
    set.norm_sq = io::Reader(in, path).array<float>(size / sizeof(float));
    for (const auto& block : set.segments) {
        if (block.dim() > 0 && block.size() != set.norm_sq.size()) {
            throw_error(ErrorCode::kFormat, dir + ": segment code counts disagree");
        }
    }
    set.model = std::move(model);
    return set;
}

SaqQueryContext
make_saq_query_context(const SaqModel& model, std::span<const float> q_projected,
                       std::span<const float> q_rotated, float m) {
    if (!(m > 0.0F)) {
        throw_error(ErrorCode::kInvalidArgument, "confidence multiplier m must be > 0");
    }
    check_dim(q_projected.size(), model.dim(), "saq query");
    check_dim(q_rotated.size(), model.dim(), "saq rotated query");
    SaqQueryContext ctx;
    ctx.m = m;
    const auto& segs = model.plan.segments;
    double norm = 0.0;
    size_t off = 0;
    double dropped = 0.0;
    for (const auto& seg : segs) {
        // The variance is taken before the segment rotation, where the
        // coordinates are (close to) uncorrelated.
        double var = 0.0;
        for (size_t i = off; i < off + seg.len; ++i) {
            const double qi = q_projected[i];
            var += qi * qi * model.variances[i];
            norm += qi * qi;
        }
        ctx.sigma.push_back(static_cast<float>(std::sqrt(var)));
        if (seg.bits > 0) {
            ctx.segments.push_back(CaqQueryContext::make(q_rotated.subspan(off, seg.len)));
        } else {
            ctx.segments.emplace_back();
            dropped += ctx.sigma.back();
        }
        off += seg.len;
    }
    ctx.q_norm_sq = static_cast<float>(norm);
    // Suffix sums over coded segments, in plan order.
    std::vector<double> coded;
    for (size_t s = 0; s < segs.size(); ++s) {
        if (segs[s].bits > 0) {
            coded.push_back(ctx.sigma[s]);
        }
    }
    ctx.remaining.assign(coded.size() + 1, 0.0F);
    double acc = dropped;
    ctx.remaining[coded.size()] = static_cast<float>(m * acc);
    for (size_t k = coded.size(); k-- > 0;) {
        acc += coded[k];
        ctx.remaining[k] = static_cast<float>(m * acc);
    }
    return ctx;
}

SaqQueryContext
make_saq_query_context(const SaqModel& model, std::span<const float> q, float m) {
    std::vector<float> rotated(model.dim());
    model.rotate_into(q, rotated);
    return make_saq_query_context(model, q, rotated, m);
}

SaqQueryContext
saq_query_context(std::span<const float> q_raw, const TransformModel* pca, const SaqModel& model,
                  float m) {
    std::vector<float> projected =
        pca != nullptr ? pca->apply(q_raw) : std::vector<float>(q_raw.begin(), q_raw.end());
    return make_saq_query_context(model, pad_to(projected, model.dim()), m);
}

MultiStageResult
saq_estimate_multistage(const SaqCodeSet& codes, size_t row, const SaqQueryContext& ctx,
                        std::optional<float> threshold) {
    const auto& segs = codes.model->plan.segments;
    MultiStageResult result;
    const float norms = codes.norm_sq[row] + ctx.q_norm_sq;
    float partial = 0.0F;
    // The bound is checked before each coded segment: at stage 0 it costs no
    // code bits at all.
    size_t stage = 0;
    for (size_t s = 0; s < segs.size(); ++s) {
        if (segs[s].bits == 0) {
            continue;
        }
        if (threshold && norms - 2.0F * (partial + ctx.remaining[stage]) > *threshold) {
            result.pruned = true;
            result.distance = norms - 2.0F * partial;
            return result;
        }
        partial += codes.segments[s].estimate_ip(row, ctx.segments[s]);
        result.bits_accessed += segs[s].len * segs[s].bits;
        ++stage;
    }
    result.distance = norms - 2.0F * partial;
    return result;
}

std::vector<float>
saq_segment_estimates(const SaqCodeSet& codes, size_t row, const SaqQueryContext& ctx) {
    const auto& segs = codes.model->plan.segments;
    std::vector<float> out(segs.size(), 0.0F);
    for (size_t s = 0; s < segs.size(); ++s) {
        if (segs[s].bits > 0) {
            out[s] = codes.segments[s].estimate_ip(row, ctx.segments[s]);
        }
    }
    return out;
}

}  // namespace saq
