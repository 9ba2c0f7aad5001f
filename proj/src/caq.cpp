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

#include "saq/caq.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "saq/binary_io.h"
#include "saq/bitpack.h"
#include "saq/error.h"

namespace saq {

namespace {

constexpr uint32_t kCodeBlockVersion = 1;

void
check_bits(unsigned bits, const char* where) {
    if (bits < 1 || bits > 16) {
        throw_error(ErrorCode::kInvalidArgument,
                    std::string(where) + ": bits must be in [1, 16], got " + std::to_string(bits));
    }
}

float
grid_step(float v_max, unsigned bits) {
    return std::ldexp(2.0F * v_max, -static_cast<int>(bits));
}

float
code_dot(std::span<const uint16_t> codes, std::span<const float> q, unsigned shift) {
    float sum = 0.0F;
    const uint16_t* c = codes.data();
    const float* x = q.data();
    const size_t n = codes.size();
    if (shift == 0) {
#pragma omp simd reduction(+ : sum)
        for (size_t i = 0; i < n; ++i) {
            sum += static_cast<float>(c[i]) * x[i];
        }
    } else {
#pragma omp simd reduction(+ : sum)
        for (size_t i = 0; i < n; ++i) {
            sum += static_cast<float>(c[i] >> shift) * x[i];
        }
    }
    return sum;
}

int64_t
code_dot_int(std::span<const uint16_t> codes, std::span<const int8_t> q, unsigned shift) {
    int64_t sum = 0;
    for (size_t i = 0; i < codes.size(); ++i) {
        sum += static_cast<int64_t>(codes[i] >> shift) * q[i];
    }
    return sum;
}

// Exact <decoded, o> from the integer code, in double.
double
decoded_dot(std::span<const uint16_t> codes, unsigned bits, float v_max, std::span<const float> o) {
    const double step = std::ldexp(2.0 * v_max, -static_cast<int>(bits));
    double sum = 0.0;
    for (size_t i = 0; i < codes.size(); ++i) {
        sum += (step * (codes[i] + 0.5) - v_max) * o[i];
    }
    return sum;
}

double
squared_norm(std::span<const float> o) {
    double sum = 0.0;
    for (float v : o) {
        sum += static_cast<double>(v) * v;
    }
    return sum;
}

float
estimate_from_raw(float raw, float norm_sq, float dot_oq, float v_max) {
    if (v_max == 0.0F) {
        return 0.0F;
    }
    if (dot_oq == 0.0F) {
        throw_error(ErrorCode::kInternal, "CAQ code with zero <decoded, o> for a non-zero vector");
    }
    return raw * norm_sq / dot_oq;
}

}  // namespace

float
CaqCode::step() const {
    return grid_step(v_max, bits);
}

std::vector<float>
CaqCode::reconstruct() const {
    std::vector<float> out(codes.size());
    const float delta = step();
    for (size_t i = 0; i < codes.size(); ++i) {
        out[i] = delta * (static_cast<float>(codes[i]) + 0.5F) - v_max;
    }
    return out;
}

CaqQueryContext
CaqQueryContext::make(std::span<const float> q, bool quantize_query) {
    CaqQueryContext ctx;
    ctx.q.assign(q.begin(), q.end());
    double sum = 0.0;
    double norm = 0.0;
    float max_abs = 0.0F;
    for (float v : q) {
        sum += v;
        norm += static_cast<double>(v) * v;
        max_abs = std::max(max_abs, std::abs(v));
    }
    ctx.q_sum = static_cast<float>(sum);
    ctx.q_norm_sq = static_cast<float>(norm);
    if (quantize_query) {
        ctx.q_int.assign(q.size(), 0);
        ctx.q_int_scale = max_abs > 0.0F ? max_abs / 127.0F : 0.0F;
        if (ctx.q_int_scale > 0.0F) {
            for (size_t i = 0; i < q.size(); ++i) {
                ctx.q_int[i] = static_cast<int8_t>(std::lround(q[i] / ctx.q_int_scale));
            }
        }
    }
    return ctx;
}

CaqCode
caq_init(std::span<const float> o, unsigned bits) {
    check_bits(bits, "caq_init");
    CaqCode code;
    code.bits = bits;
    code.codes.assign(o.size(), 0);
    float v_max = 0.0F;
    for (float v : o) {
        v_max = std::max(v_max, std::abs(v));
    }
    code.v_max = v_max;
    code.norm_sq = static_cast<float>(squared_norm(o));
    if (v_max == 0.0F) {
        return code;
    }
    const float delta = code.step();
    const auto max_code = static_cast<float>((1U << bits) - 1);
    for (size_t i = 0; i < o.size(); ++i) {
        float cell = std::floor((o[i] + v_max) / delta);
        code.codes[i] = static_cast<uint16_t>(std::clamp(cell, 0.0F, max_code));
    }
    code.dot_oq = static_cast<float>(decoded_dot(code.codes, bits, v_max, o));
    return code;
}

CaqCode
caq_adjust(std::span<const float> o, const CaqCode& code, const AdjustOptions& options) {
    check_dim(code.codes.size(), o.size(), "caq_adjust");
    CaqCode out = code;
    if (code.degenerate() || options.rounds == 0) {
        return out;
    }
    // Work in units of the grid step: decoded = step * y with half-integer
    // y = code + 0.5 - 2^(B-1). The cosine is scale-free, so step drops out
    // and ||y||^2 stays exact in double.
    const double center = std::ldexp(1.0, static_cast<int>(code.bits) - 1) - 0.5;
    const int max_code = static_cast<int>((1U << code.bits) - 1);
    double dot = 0.0;
    double norm = 0.0;
    for (size_t i = 0; i < o.size(); ++i) {
        double y = code.codes[i] - center;
        dot += y * o[i];
        norm += y * y;
    }
    const double factor = (1.0 + options.rel_tolerance) * (1.0 + options.rel_tolerance);
    auto& codes = out.codes;
    for (unsigned round = 0; round < options.rounds; ++round) {
        bool moved = false;
        for (size_t i = 0; i < o.size(); ++i) {
            const double oi = o[i];
            for (int delta : {1, -1}) {
                int next = static_cast<int>(codes[i]) + delta;
                if (next < 0 || next > max_code) {
                    continue;
                }
                double y = codes[i] - center;
                double next_dot = dot + delta * oi;
                double next_norm = norm + 2.0 * delta * y + 1.0;
                // cos' > cos * (1 + tol), with both cosines positive.
                if (next_dot > 0.0 && next_dot * next_dot * norm > dot * dot * next_norm * factor) {
                    codes[i] = static_cast<uint16_t>(next);
                    dot = next_dot;
                    norm = next_norm;
                    moved = true;
                    if (options.cosine_trace != nullptr) {
                        options.cosine_trace->push_back(dot / std::sqrt(norm * out.norm_sq));
                    }
                }
            }
        }
        if (!moved) {
            break;
        }
    }
    out.dot_oq = static_cast<float>(decoded_dot(codes, out.bits, out.v_max, o));
    return out;
}

CaqCode
caq_quantize(std::span<const float> o, unsigned bits, unsigned rounds) {
    AdjustOptions options;
    options.rounds = rounds;
    return caq_adjust(o, caq_init(o, bits), options);
}

double
caq_cosine(const CaqCode& code, std::span<const float> o) {
    check_dim(code.codes.size(), o.size(), "caq_cosine");
    if (code.degenerate()) {
        return 0.0;
    }
    auto decoded = code.reconstruct();
    double dot = 0.0;
    double norm = 0.0;
    for (size_t i = 0; i < o.size(); ++i) {
        dot += static_cast<double>(decoded[i]) * o[i];
        norm += static_cast<double>(decoded[i]) * decoded[i];
    }
    double onorm = squared_norm(o);
    if (norm == 0.0 || onorm == 0.0) {
        return 0.0;
    }
    return dot / std::sqrt(norm * onorm);
}

float
caq_raw_ip(std::span<const uint16_t> codes, unsigned bits, float v_max,
           const CaqQueryContext& ctx, unsigned shift) {
    check_dim(ctx.q.size(), codes.size(), "caq_raw_ip");
    const unsigned width = bits - shift;
    const float delta = grid_step(v_max, width);
    float dot = 0.0F;
    if (!ctx.q_int.empty()) {
        dot = static_cast<float>(code_dot_int(codes, ctx.q_int, shift)) * ctx.q_int_scale;
    } else {
        dot = code_dot(codes, ctx.q, shift);
    }
    return delta * dot + ctx.q_sum * (0.5F * delta - v_max);
}

float
caq_estimate_ip(const CaqCode& code, const CaqQueryContext& ctx) {
    if (code.degenerate()) {
        return 0.0F;
    }
    float raw = caq_raw_ip(code.codes, code.bits, code.v_max, ctx);
    return estimate_from_raw(raw, code.norm_sq, code.dot_oq, code.v_max);
}

float
caq_estimate_dist(const CaqCode& code, const CaqQueryContext& ctx) {
    return code.norm_sq + ctx.q_norm_sq - 2.0F * caq_estimate_ip(code, ctx);
}

CaqCode
caq_prefix(const CaqCode& code, unsigned b) {
    if (b < 1 || b > code.bits) {
        throw_error(ErrorCode::kInvalidArgument,
                    "caq_prefix: prefix width " + std::to_string(b) + " outside [1, " +
                        std::to_string(code.bits) + "]");
    }
    CaqCode out = code;
    const unsigned shift = code.bits - b;
    for (auto& c : out.codes) {
        c = static_cast<uint16_t>(c >> shift);
    }
    out.bits = b;
    return out;
}

CaqCodeBlock::CaqCodeBlock(size_t dim, unsigned bits) : dim_(dim), bits_(bits) {
    check_bits(bits, "CaqCodeBlock");
}

void
CaqCodeBlock::reserve(size_t n) {
    codes_.reserve(n * dim_);
    v_max_.reserve(n);
    norm_sq_.reserve(n);
    dot_oq_.reserve(n);
}

void
CaqCodeBlock::resize(size_t n) {
    codes_.resize(n * dim_);
    v_max_.resize(n);
    norm_sq_.resize(n);
    dot_oq_.resize(n);
}

void
CaqCodeBlock::set(size_t i, const CaqCode& code) {
    check_dim(code.codes.size(), dim_, "CaqCodeBlock::set");
    if (code.bits != bits_) {
        throw_error(ErrorCode::kInvalidArgument, "CaqCodeBlock::set: bit width mismatch");
    }
    std::copy(code.codes.begin(), code.codes.end(), codes_.begin() + static_cast<long>(i * dim_));
    v_max_[i] = code.v_max;
    norm_sq_[i] = code.norm_sq;
    dot_oq_[i] = code.dot_oq;
}

void
CaqCodeBlock::append(const CaqCode& code) {
    resize(size() + 1);
    set(size() - 1, code);
}

CaqCode
CaqCodeBlock::get(size_t i) const {
    CaqCode code;
    auto c = codes(i);
    code.codes.assign(c.begin(), c.end());
    code.v_max = v_max_[i];
    code.norm_sq = norm_sq_[i];
    code.dot_oq = dot_oq_[i];
    code.bits = bits_;
    return code;
}

float
CaqCodeBlock::estimate_ip(size_t i, const CaqQueryContext& ctx, unsigned prefix_bits) const {
    const float v_max = v_max_[i];
    if (v_max == 0.0F) {
        return 0.0F;
    }
    const unsigned width = prefix_bits == 0 ? bits_ : prefix_bits;
    float raw = caq_raw_ip(codes(i), bits_, v_max, ctx, bits_ - width);
    return estimate_from_raw(raw, norm_sq_[i], dot_oq_[i], v_max);
}

float
CaqCodeBlock::estimate_dist(size_t i, const CaqQueryContext& ctx, unsigned prefix_bits) const {
    return norm_sq_[i] + ctx.q_norm_sq - 2.0F * estimate_ip(i, ctx, prefix_bits);
}

size_t
CaqCodeBlock::record_bytes() const {
    return packed_size(dim_, bits_) + 3 * sizeof(float);
}

void
CaqCodeBlock::write(std::ostream& out) const {
    io::Writer w(out);
    w.magic("VQCQ");
    w.pod<uint32_t>(kCodeBlockVersion);
    w.pod<uint32_t>(static_cast<uint32_t>(dim_));
    w.pod<uint16_t>(static_cast<uint16_t>(bits_));
    w.pod<uint64_t>(static_cast<uint64_t>(size()));
    std::vector<uint8_t> packed(packed_size(dim_, bits_));
    for (size_t i = 0; i < size(); ++i) {
        pack_codes_into(codes(i), bits_, packed);
        w.array<uint8_t>(packed);
        w.pod<float>(v_max_[i]);
        w.pod<float>(norm_sq_[i]);
        w.pod<float>(dot_oq_[i]);
    }
}

CaqCodeBlock
CaqCodeBlock::read(std::istream& in, const std::string& what) {
    io::Reader r(in, what);
    r.expect_magic("VQCQ");
    auto version = r.pod<uint32_t>();
    if (version != kCodeBlockVersion) {
        throw_error(ErrorCode::kFormat, what + ": unsupported code block version");
    }
    auto dim = r.pod<uint32_t>();
    auto bits = r.pod<uint16_t>();
    auto count = r.pod<uint64_t>();
    if (bits < 1 || bits > 16) {
        throw_error(ErrorCode::kFormat, what + ": invalid bit width");
    }
    CaqCodeBlock block(dim, bits);
    block.resize(count);
    std::vector<uint8_t> packed(packed_size(dim, bits));
    for (size_t i = 0; i < count; ++i) {
        r.array_into(std::span<uint8_t>(packed));
        unpack_codes_into(packed, bits,
                          std::span<uint16_t>(block.codes_.data() + i * dim, dim));
        block.v_max_[i] = r.pod<float>();
        block.norm_sq_[i] = r.pod<float>();
        block.dot_oq_[i] = r.pod<float>();
    }
    return block;
}

void
CaqCodeBlock::save(const std::string& path) const {
    auto out = io::open_output(path);
    write(out);
}

CaqCodeBlock
CaqCodeBlock::load(const std::string& path) {
    auto in = io::open_input(path);
    return read(in, path);
}

CaqCodeBlock
caq_quantize_batch(const RowMatrixF& rotated, unsigned bits, unsigned rounds) {
    CaqCodeBlock block(static_cast<size_t>(rotated.cols()), bits);
    const auto n = static_cast<long>(rotated.rows());
    block.resize(static_cast<size_t>(n));
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        block.set(static_cast<size_t>(i), caq_quantize(row_span(rotated, i), bits, rounds));
    }
    return block;
}

}  // namespace saq
