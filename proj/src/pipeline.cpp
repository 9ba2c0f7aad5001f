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

#include "saq/pipeline.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <thread>

#include <fmt/format.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "saq/error.h"
#include "saq/ivf.h"
#include "saq/seed.h"

namespace saq {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string
label(const MethodConfig& m, unsigned rounds, unsigned prefix, float confidence, size_t nprobe,
      const PipelineConfig& cfg) {
    std::string out = m.name.empty() ? std::string(to_string(m.base.kind)) : m.name;
    if (m.rounds.size() > 1) {
        out += fmt::format(";r={}", rounds);
    }
    if (prefix > 0) {
        out += fmt::format(";prefix={}", prefix);
    }
    if (m.confidence.size() > 1) {
        out += fmt::format(";m={}", confidence);
    }
    if (cfg.eval.nprobe.size() > 1 && cfg.eval.mode == "error") {
        out += fmt::format(";nprobe={}", nprobe);
    }
    return out;
}

}  // namespace

size_t
resolve_threads(size_t requested) {
    size_t n = requested;
    if (n == 0) {
        n = std::max<unsigned>(1, std::thread::hardware_concurrency());
    }
    return std::min<size_t>(n, 24);
}

LoadedDataset
load_dataset(const DatasetConfig& config, uint64_t root_seed, size_t k, const std::string& cache_prefix) {
    LoadedDataset ds;
    if (config.source == "file") {
        const auto format = config.format.empty() ? vecs_format_from_path(config.path)
                                                  : parse_vecs_format(config.format);
        RowMatrixF all = read_vecs(config.path, format, config.raw_dim);
        if (!config.query_path.empty()) {
            ds.base = std::move(all);
            const auto qformat = config.format.empty() ? vecs_format_from_path(config.query_path) : format;
            ds.queries = read_vecs(config.query_path, qformat, config.raw_dim);
        } else {
            auto split = hold_out_queries(all, config.queries, derive_seed(root_seed, "queries"));
            ds.base = std::move(split.base);
            ds.queries = std::move(split.queries);
        }
    } else {
        SyntheticSpec spec = config.synthetic;
        spec.seed = derive_seed(root_seed, "dataset");
        spec.n += config.queries;
        auto split = hold_out_queries(gen_synthetic(spec), config.queries, derive_seed(root_seed, "queries"));
        ds.base = std::move(split.base);
        ds.queries = std::move(split.queries);
    }
    const size_t kk = std::min(k, static_cast<size_t>(ds.base.rows()));
    ds.truth = cached_ground_truth(ds.base, ds.queries, kk, cache_prefix);
    return ds;
}

std::vector<EvalRow>
run_pipeline(const PipelineConfig& cfg, const std::string& config_path) {
    const size_t threads = resolve_threads(cfg.threads);
#ifdef _OPENMP
    omp_set_num_threads(static_cast<int>(threads));
#endif
    fs::create_directories(cfg.output);
    const std::string gt_prefix =
        cfg.dataset.source == "file" ? cfg.dataset.path : (fs::path(cfg.output) / "dataset").string();
    auto ds = load_dataset(cfg.dataset, cfg.seed, cfg.eval.k, gt_prefix);

    std::ofstream manifest(fs::path(cfg.output) / "manifest.txt");
    manifest << fmt::format("saqvq {}\n", kVersion);
    manifest << fmt::format("config {}\n", config_path.empty() ? "<inline>" : config_path);
    manifest << fmt::format("seed {}\n", cfg.seed);
    manifest << fmt::format("threads {}\n", threads);
    manifest << fmt::format("seed.dataset {}\n", derive_seed(cfg.seed, "dataset"));
    manifest << fmt::format("seed.queries {}\n", derive_seed(cfg.seed, "queries"));
    manifest << fmt::format("base {}x{} queries {} k {}\n", ds.base.rows(), ds.base.cols(), ds.queries.rows(),
                            cfg.eval.k);
    manifest << fmt::format("ground_truth_key {:016x}\n",
                            ground_truth_key(ds.base, ds.queries, static_cast<size_t>(ds.truth.ids.cols())));

    std::vector<EvalRow> rows;
    const size_t nlist = cfg.eval.nlist == 0 ? default_nlist(static_cast<size_t>(ds.base.rows())) : cfg.eval.nlist;
    for (const auto& method : cfg.methods) {
        const std::string kind_name(to_string(method.base.kind));
        const uint64_t method_seed = derive_seed(cfg.seed, "method:" + kind_name);
        for (double bits : method.bits) {
            for (unsigned rounds : method.rounds) {
                IvfBuildOptions options;
                options.nlist = nlist;
                options.seed = method_seed;
                options.kmeans_iters = cfg.kmeans_iters;
                options.quantizer = method.base;
                options.quantizer.bits = bits;
                options.quantizer.rounds = rounds;
                auto index = IvfIndex::build(ds.base, options);
                manifest << fmt::format("index {} bits={} rounds={} nlist={} seed={} :: {}\n", kind_name, bits,
                                        rounds, nlist, method_seed, index.quantizer().describe());
                if (cfg.eval.rerank > 0) {
                    index.attach_raw(std::make_shared<const RowMatrixF>(ds.base));
                }
                for (unsigned prefix : method.prefix_bits) {
                    for (float confidence : method.confidence) {
                        ScanOptions scan;
                        scan.prefix_bits = prefix;
                        scan.confidence = confidence;
                        scan.prune = cfg.eval.prune;
                        const double reported_bits = prefix > 0 ? prefix : bits;
                        if (cfg.eval.mode == "qps") {
                            auto bench = bench_qps(index, label(method, rounds, prefix, confidence, 0, cfg),
                                                   reported_bits, ds.base, ds.queries, ds.truth, cfg.eval.k,
                                                   cfg.eval.nprobe, cfg.eval.runs, scan);
                            rows.insert(rows.end(), bench.begin(), bench.end());
                            continue;
                        }
                        for (size_t nprobe : cfg.eval.nprobe) {
                            EvalSettings settings;
                            settings.k = cfg.eval.k;
                            settings.nprobe = std::min(nprobe, nlist);
                            settings.rerank = cfg.eval.rerank;
                            settings.scan = scan;
                            rows.push_back(evaluate_index(index, label(method, rounds, prefix, confidence, nprobe, cfg),
                                                          reported_bits, ds.base, ds.queries, ds.truth, settings));
                        }
                    }
                }
            }
        }
    }
    write_report((fs::path(cfg.output) / "results.csv").string(), rows);
    if (!manifest) {
        throw_error(ErrorCode::kIo, cfg.output + "/manifest.txt: write failed");
    }
    return rows;
}

}  // namespace saq
