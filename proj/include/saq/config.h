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
#include <istream>
#include <string>
#include <vector>

#include "saq/data.h"
#include "saq/quantizers.h"

namespace saq {

struct DatasetConfig {
    /// "synthetic" or "file".
    std::string source = "synthetic";
    SyntheticSpec synthetic;
    std::string path;
    std::string format;  ///< empty: inferred from the extension
    size_t raw_dim = 0;
    /// Separate query file; when empty, `queries` rows are held out.
    std::string query_path;
    size_t queries = 100;
};

struct EvalConfig {
    /// "error" evaluates estimator error and recall; "qps" benchmarks speed.
    std::string mode = "error";
    size_t k = 100;
    size_t nlist = 0;
    std::vector<size_t> nprobe{1};
    size_t rerank = 0;
    bool prune = true;
    size_t runs = 3;
};

struct MethodConfig {
    std::string name;  ///< label prefix; defaults to the kind
    QuantizerConfig base;
    std::vector<double> bits{4.0};
    std::vector<unsigned> rounds{6};
    /// CAQ prefix widths to evaluate (0 = full code).
    std::vector<unsigned> prefix_bits{0};
    std::vector<float> confidence{4.0F};
};

struct PipelineConfig {
    uint64_t seed = 0;
    std::string output = "results";
    size_t threads = 0;  ///< 0 = all cores, capped at 24
    size_t kmeans_iters = 10;
    DatasetConfig dataset;
    EvalConfig eval;
    std::vector<MethodConfig> methods;
};

/// Parses the flat `key = value` format. Keys before the first section
/// header are global; `[dataset]` and `[eval]` appear at most once and
/// `[method]` may repeat. Unknown keys and malformed values raise kConfig
/// naming the key and line.
PipelineConfig
parse_pipeline_config(std::istream& in, const std::string& origin = "<config>");

PipelineConfig
load_pipeline_config(const std::string& path);

}  // namespace saq
