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

#include <string>
#include <vector>

#include "saq/config.h"
#include "saq/data.h"
#include "saq/eval.h"

namespace saq {

struct LoadedDataset {
    RowMatrixF base;
    RowMatrixF queries;
    TopK truth;
};

/// Loads or generates the base and query sets and their ground truth.
/// Ground truth is cached under `cache_prefix`.
LoadedDataset
load_dataset(const DatasetConfig& config, uint64_t root_seed, size_t k, const std::string& cache_prefix);

/// Threads to use for `requested` (0 = all cores, capped at 24).
size_t
resolve_threads(size_t requested);

/// Runs every method x parameter combination, writes
/// `<output>/results.csv` and `<output>/manifest.txt`, and returns the rows.
std::vector<EvalRow>
run_pipeline(const PipelineConfig& config, const std::string& config_path = "");

}  // namespace saq
