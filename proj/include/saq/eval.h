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
#include <ostream>
#include <string>
#include <vector>

#include "saq/data.h"
#include "saq/ivf.h"
#include "saq/types.h"

namespace saq {

/// One CSV row. Column order is fixed by write_report.
struct EvalRow {
    std::string method;
    double bits_avg = 0.0;
    double avg_rel_err = 0.0;
    double max_rel_err = 0.0;
    double recall = 0.0;
    double avg_distance_ratio = 1.0;
    double qps = 0.0;
    double mean_bits_accessed = 0.0;
    double quantize_seconds = 0.0;
    size_t code_bytes = 0;
};

extern const char* const kReportHeader;

void
write_report(std::ostream& out, const std::vector<EvalRow>& rows);

/// Writes `rows` to `path` with the header line.
void
write_report(const std::string& path, const std::vector<EvalRow>& rows);

struct RelativeError {
    /// Mean over queries of the per-query mean of |est - real| / real.
    double avg = 0.0;
    /// Mean over queries of the per-query maximum.
    double max = 0.0;
    size_t pairs = 0;
};

/// Relative error of every estimate in the probed clusters against exact
/// squared distances. Pairs with a zero exact distance are skipped.
RelativeError
relative_error(const IvfIndex& index, const RowMatrixF& data, const RowMatrixF& queries,
               size_t nprobe, const ScanOptions& options = {});

/// Exact squared distance with double accumulation.
double
exact_distance(std::span<const float> a, std::span<const float> b);

/// Fraction of the first k ground-truth ids present in each result, averaged
/// over queries.
double
recall_at_k(const std::vector<SearchResult>& results, const RowMatrixI& truth, size_t k);

/// Mean over queries and slots of sqrt(d_retrieved / d_true), where the
/// retrieved ids are re-scored exactly and sorted.
double
distance_ratio(const std::vector<SearchResult>& results, const RowMatrixF& data,
               const RowMatrixF& queries, const RowMatrixF& truth_distances, size_t k);

struct SearchRun {
    std::vector<SearchResult> results;
    double seconds = 0.0;
    double mean_bits_accessed = 0.0;  ///< per scanned candidate
    double mean_candidates = 0.0;     ///< per query
};

SearchRun
run_search(const IvfIndex& index, const RowMatrixF& queries, const SearchParams& params);

struct EvalSettings {
    size_t k = 100;
    size_t nprobe = 1;
    size_t rerank = 0;
    ScanOptions scan;
    bool measure_error = true;
};

/// Error, recall and speed of one index on one query set.
EvalRow
evaluate_index(const IvfIndex& index, const std::string& method, double bits_avg,
               const RowMatrixF& data, const RowMatrixF& queries, const TopK& truth,
               const EvalSettings& settings);

/// QPS for each nprobe; each point is the median of `runs` timed passes
/// after one warm-up pass.
std::vector<EvalRow>
bench_qps(const IvfIndex& index, const std::string& method, double bits_avg, const RowMatrixF& data,
          const RowMatrixF& queries, const TopK& truth, size_t k, const std::vector<size_t>& nprobes,
          size_t runs = 3, const ScanOptions& scan = {});

}  // namespace saq
