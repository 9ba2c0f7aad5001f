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

#include "saq/eval.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <fmt/format.h>

#include "saq/error.h"

namespace saq {

const char* const kReportHeader =
    "method,B_avg,avg_rel_err,max_rel_err,recall@k,avg_distance_ratio,qps,mean_bits_accessed,"
    "quantize_seconds,code_bytes";

void
write_report(std::ostream& out, const std::vector<EvalRow>& rows) {
    out << kReportHeader << '\n';
    for (const auto& r : rows) {
        out << fmt::format("{},{:.4f},{:.6e},{:.6e},{:.6f},{:.6f},{:.2f},{:.2f},{:.4f},{}\n", r.method,
                           r.bits_avg, r.avg_rel_err, r.max_rel_err, r.recall, r.avg_distance_ratio, r.qps,
                           r.mean_bits_accessed, r.quantize_seconds, r.code_bytes);
    }
}

void
write_report(const std::string& path, const std::vector<EvalRow>& rows) {
    std::ofstream out(path);
    write_report(out, rows);
    if (!out) {
        throw_error(ErrorCode::kIo, path + ": write failed");
    }
}

double
exact_distance(std::span<const float> a, std::span<const float> b) {
    double sum = 0.0;
#pragma omp simd reduction(+ : sum)
    for (size_t i = 0; i < a.size(); ++i) {
        double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        sum += d * d;
    }
    return sum;
}

RelativeError
relative_error(const IvfIndex& index, const RowMatrixF& data, const RowMatrixF& queries,
               size_t nprobe, const ScanOptions& options) {
    const auto nq = static_cast<size_t>(queries.rows());
    std::vector<double> avg(nq, 0.0);
    std::vector<double> max(nq, 0.0);
    std::vector<size_t> count(nq, 0);
#pragma omp parallel for schedule(dynamic)
    for (long qi = 0; qi < static_cast<long>(nq); ++qi) {
        std::vector<uint32_t> ids;
        std::vector<float> est;
        auto q = row_span(queries, qi);
        index.estimate_probed(q, nprobe, options, ids, est);
        double sum = 0.0;
        double worst = 0.0;
        size_t used = 0;
        for (size_t j = 0; j < ids.size(); ++j) {
            const double real = exact_distance(row_span(data, ids[j]), q);
            if (real == 0.0) {
                continue;
            }
            const double rel = std::abs(static_cast<double>(est[j]) - real) / real;
            sum += rel;
            worst = std::max(worst, rel);
            ++used;
        }
        const auto i = static_cast<size_t>(qi);
        count[i] = used;
        avg[i] = used > 0 ? sum / static_cast<double>(used) : 0.0;
        max[i] = worst;
    }
    RelativeError out;
    size_t counted = 0;
    for (size_t i = 0; i < nq; ++i) {
        if (count[i] == 0) {
            continue;
        }
        out.avg += avg[i];
        out.max += max[i];
        out.pairs += count[i];
        ++counted;
    }
    if (counted > 0) {
        out.avg /= static_cast<double>(counted);
        out.max /= static_cast<double>(counted);
    }
    return out;
}

double
recall_at_k(const std::vector<SearchResult>& results, const RowMatrixI& truth, size_t k) {
    if (results.empty() || k == 0) {
        return 0.0;
    }
    if (static_cast<size_t>(truth.rows()) != results.size() || static_cast<size_t>(truth.cols()) < k) {
        throw_error(ErrorCode::kDimensionMismatch, "recall_at_k: ground truth does not cover the queries");
    }
    double total = 0.0;
    for (size_t q = 0; q < results.size(); ++q) {
        std::unordered_set<uint32_t> want;
        for (size_t j = 0; j < k; ++j) {
            want.insert(static_cast<uint32_t>(truth(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(j))));
        }
        size_t hit = 0;
        const auto& ids = results[q].ids;
        for (size_t j = 0; j < std::min(k, ids.size()); ++j) {
            hit += want.count(ids[j]);
        }
        total += static_cast<double>(hit) / static_cast<double>(k);
    }
    return total / static_cast<double>(results.size());
}

double
distance_ratio(const std::vector<SearchResult>& results, const RowMatrixF& data,
               const RowMatrixF& queries, const RowMatrixF& truth_distances, size_t k) {
    double total = 0.0;
    size_t slots = 0;
    for (size_t q = 0; q < results.size(); ++q) {
        const auto qv = row_span(queries, static_cast<Eigen::Index>(q));
        std::vector<float> got;
        for (auto id : results[q].ids) {
            got.push_back(static_cast<float>(exact_distance(row_span(data, id), qv)));
        }
        std::sort(got.begin(), got.end());
        const size_t n = std::min({k, got.size(), static_cast<size_t>(truth_distances.cols())});
        for (size_t j = 0; j < n; ++j) {
            const double truth = truth_distances(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(j));
            if (truth <= 0.0) {
                if (got[j] <= 0.0F) {
                    total += 1.0;
                    ++slots;
                }
                continue;
            }
            total += std::sqrt(static_cast<double>(got[j]) / truth);
            ++slots;
        }
    }
    return slots > 0 ? total / static_cast<double>(slots) : 1.0;
}

SearchRun
run_search(const IvfIndex& index, const RowMatrixF& queries, const SearchParams& params) {
    SearchRun run;
    const auto start = std::chrono::steady_clock::now();
    run.results = index.search_batch(queries, params);
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    size_t bits = 0;
    size_t candidates = 0;
    for (const auto& r : run.results) {
        bits += r.stats.bits_accessed;
        candidates += r.stats.candidates;
    }
    if (candidates > 0) {
        run.mean_bits_accessed = static_cast<double>(bits) / static_cast<double>(candidates);
    }
    if (!run.results.empty()) {
        run.mean_candidates = static_cast<double>(candidates) / static_cast<double>(run.results.size());
    }
    return run;
}

namespace {

double
qps_of(size_t queries, double seconds) {
    return seconds > 0.0 ? static_cast<double>(queries) / seconds : 0.0;
}

}  // namespace

EvalRow
evaluate_index(const IvfIndex& index, const std::string& method, double bits_avg,
               const RowMatrixF& data, const RowMatrixF& queries, const TopK& truth,
               const EvalSettings& settings) {
    EvalRow row;
    row.method = method;
    row.bits_avg = bits_avg;
    row.quantize_seconds = index.quantize_seconds();
    row.code_bytes = index.quantizer().code_bytes();
    if (queries.rows() == 0) {
        return row;
    }
    if (settings.measure_error) {
        auto err = relative_error(index, data, queries, settings.nprobe, settings.scan);
        row.avg_rel_err = err.avg;
        row.max_rel_err = err.max;
    }
    SearchParams params;
    params.k = settings.k;
    params.nprobe = settings.nprobe;
    params.rerank = settings.rerank;
    params.scan = settings.scan;
    auto run = run_search(index, queries, params);
    row.qps = qps_of(run.results.size(), run.seconds);
    row.mean_bits_accessed = run.mean_bits_accessed;
    row.recall = recall_at_k(run.results, truth.ids, std::min(settings.k, index.size()));
    row.avg_distance_ratio = distance_ratio(run.results, data, queries, truth.distances, settings.k);
    return row;
}

std::vector<EvalRow>
bench_qps(const IvfIndex& index, const std::string& method, double bits_avg, const RowMatrixF& data,
          const RowMatrixF& queries, const TopK& truth, size_t k, const std::vector<size_t>& nprobes,
          size_t runs, const ScanOptions& scan) {
    std::vector<EvalRow> rows;
    if (queries.rows() == 0) {
        return rows;
    }
    for (auto nprobe : nprobes) {
        SearchParams params;
        params.k = k;
        params.nprobe = nprobe;
        params.scan = scan;
        auto warm = run_search(index, queries, params);
        std::vector<double> qps;
        for (size_t r = 0; r < std::max<size_t>(runs, 1); ++r) {
            auto run = run_search(index, queries, params);
            qps.push_back(qps_of(run.results.size(), run.seconds));
        }
        std::sort(qps.begin(), qps.end());
        EvalRow row;
        row.method = fmt::format("{};nprobe={}", method, nprobe);
        row.bits_avg = bits_avg;
        row.qps = qps[qps.size() / 2];
        row.mean_bits_accessed = warm.mean_bits_accessed;
        row.recall = recall_at_k(warm.results, truth.ids, std::min(k, index.size()));
        row.avg_distance_ratio = distance_ratio(warm.results, data, queries, truth.distances, k);
        row.quantize_seconds = index.quantize_seconds();
        row.code_bytes = index.quantizer().code_bytes();
        rows.push_back(row);
    }
    return rows;
}

}  // namespace saq
