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

#include <chrono>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "saq/caq.h"
#include "saq/config.h"
#include "saq/data.h"
#include "saq/error.h"
#include "saq/eval.h"
#include "saq/ivf.h"
#include "saq/pipeline.h"
#include "saq/saq.h"
#include "saq/seed.h"
#include "saq/transforms.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

int
exit_code_for(saq::ErrorCode code) {
    switch (code) {
        case saq::ErrorCode::kConfig:
        case saq::ErrorCode::kInvalidArgument:
            return kExitConfig;
        case saq::ErrorCode::kFormat:
        case saq::ErrorCode::kIo:
        case saq::ErrorCode::kDimensionMismatch:
        case saq::ErrorCode::kInsufficientData:
        case saq::ErrorCode::kUntrained:
            return kExitData;
        case saq::ErrorCode::kInternal:
            break;
    }
    return 1;
}

saq::RowMatrixF
read_matrix(const std::string& path, const std::string& format, size_t raw_dim) {
    auto fmt_kind = format.empty() ? saq::vecs_format_from_path(path) : saq::parse_vecs_format(format);
    return saq::read_vecs(path, fmt_kind, raw_dim);
}

void
set_threads(size_t threads) {
#ifdef _OPENMP
    omp_set_num_threads(static_cast<int>(saq::resolve_threads(threads)));
#else
    (void)threads;
#endif
}

struct QuantizerArgs {
    std::string method = "saq";
    double bits = 4.0;
    unsigned rounds = saq::kDefaultAdjustRounds;
    bool no_pca = false;
    size_t pq_m = 0;
    size_t granularity = saq::kDefaultSegmentGranularity;

    void
    add_to(CLI::App* app) {
        app->add_option("--method", method, "exact | caq | saq | lvq | pq | pca")->capture_default_str();
        app->add_option("--bits", bits, "Average bits per dimension")->capture_default_str();
        app->add_option("--rounds", rounds, "Code adjustment rounds")->capture_default_str();
        app->add_flag("--no-pca", no_pca, "SAQ without PCA");
        app->add_option("--pq-m", pq_m, "PQ sub-quantizers (0 = match --bits)");
        app->add_option("--granularity", granularity, "SAQ segment granularity")->capture_default_str();
    }

    saq::QuantizerConfig
    config() const {
        saq::QuantizerConfig c;
        c.kind = saq::parse_quantizer_kind(method);
        c.bits = bits;
        c.rounds = rounds;
        c.use_pca = !no_pca;
        c.pq_m = pq_m;
        c.granularity = granularity;
        return c;
    }
};

}  // namespace

int
main(int argc, char** argv) {
    CLI::App app{"saqvq: vector quantization and ANN benchmark tools"};
    app.require_subcommand(1);
    size_t threads = 0;
    app.add_option("--threads", threads, "Worker threads (0 = all cores, max 24)");

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
    std::string gen_kind = "gaussian";
    saq::SyntheticSpec spec;
    std::string gen_out;
    std::string gen_query_out;
    size_t gen_queries = 0;
    gen->add_option("--kind", gen_kind, "gaussian | skewed | clustered")->capture_default_str();
    gen->add_option("--n", spec.n, "Rows")->required();
    gen->add_option("--dim", spec.dim, "Dimension")->required();
    gen->add_option("--alpha", spec.alpha, "Spectrum decay exponent")->capture_default_str();
    gen->add_option("--clusters", spec.clusters, "Blob count")->capture_default_str();
    gen->add_option("--center-scale", spec.center_scale, "Blob centre spread")->capture_default_str();
    gen->add_option("--seed", spec.seed, "Seed")->capture_default_str();
    gen->add_option("--out", gen_out, "Output .fvecs")->required();
    gen->add_option("--queries", gen_queries, "Rows to hold out as queries");
    gen->add_option("--query-out", gen_query_out, "Query output .fvecs");

    // gt
    auto* gt = app.add_subcommand("gt", "Exact top-k ground truth");
    std::string gt_base;
    std::string gt_queries;
    std::string gt_out;
    std::string gt_format;
    size_t gt_k = 100;
    size_t raw_dim = 0;
    gt->add_option("--base", gt_base)->required();
    gt->add_option("--queries", gt_queries)->required();
    gt->add_option("--k", gt_k)->capture_default_str();
    gt->add_option("--out", gt_out, "Output prefix; writes <out>.gt.ivecs and .gt.fvecs")->required();
    gt->add_option("--format", gt_format, "fvecs | bvecs | ivecs | raw_f32");
    gt->add_option("--raw-dim", raw_dim);

    // train
    auto* train = app.add_subcommand("train", "Fit a rotation or PCA model (and optionally a plan)");
    std::string train_input;
    std::string train_kind = "pca";
    std::string train_out;
    std::string plan_out;
    double plan_bits = 0.0;
    uint64_t train_seed = 0;
    saq::PlanSearchOptions plan_options;
    train->add_option("--input", train_input)->required();
    train->add_option("--kind", train_kind, "rotation | pca")->capture_default_str();
    train->add_option("--seed", train_seed)->capture_default_str();
    train->add_option("--out", train_out, "Output .vqtm")->required();
    train->add_option("--plan-out", plan_out, "Also search a plan on the PCA spectrum");
    train->add_option("--bits", plan_bits, "Average bits per dimension for --plan-out");
    train->add_option("--granularity", plan_options.granularity)->capture_default_str();

    // quantize
    auto* quantize = app.add_subcommand("quantize", "Flat CAQ or SAQ codes for a dataset");
    std::string q_input;
    std::string q_out;
    std::string q_method = "saq";
    double q_bits = 4.0;
    unsigned q_rounds = saq::kDefaultAdjustRounds;
    uint64_t q_seed = 0;
    quantize->add_option("--input", q_input)->required();
    quantize->add_option("--out", q_out, "Output directory")->required();
    quantize->add_option("--method", q_method, "caq | saq")->capture_default_str();
    quantize->add_option("--bits", q_bits)->capture_default_str();
    quantize->add_option("--rounds", q_rounds)->capture_default_str();
    quantize->add_option("--seed", q_seed)->capture_default_str();

    // build-ivf
    auto* build = app.add_subcommand("build-ivf", "Build and save an IVF index");
    std::string b_base;
    std::string b_out;
    size_t b_nlist = 0;
    uint64_t b_seed = 0;
    QuantizerArgs b_quant;
    build->add_option("--base", b_base)->required();
    build->add_option("--out", b_out, "Index directory")->required();
    build->add_option("--nlist", b_nlist, "Clusters (0 = default for N)");
    build->add_option("--seed", b_seed)->capture_default_str();
    b_quant.add_to(build);

    // search
    auto* search = app.add_subcommand("search", "Query a saved index");
    std::string s_index;
    std::string s_queries;
    std::string s_base;
    std::string s_out;
    std::string s_gt;
    saq::SearchParams s_params;
    search->add_option("--index", s_index)->required();
    search->add_option("--queries", s_queries)->required();
    search->add_option("--k", s_params.k)->capture_default_str();
    search->add_option("--nprobe", s_params.nprobe)->capture_default_str();
    search->add_option("--rerank", s_params.rerank, "Exact re-scoring depth (needs --base)");
    search->add_option("--confidence", s_params.scan.confidence)->capture_default_str();
    search->add_option("--base", s_base, "Raw vectors for reranking");
    search->add_option("--out", s_out, "Result ids (.ivecs)");
    search->add_option("--gt", s_gt, "Ground-truth .ivecs for recall");

    // eval-error
    auto* eval = app.add_subcommand("eval-error", "Estimator error and recall of one method");
    std::string e_base;
    std::string e_queries;
    std::string e_gt_prefix;
    size_t e_nlist = 1;
    uint64_t e_seed = 0;
    saq::EvalSettings e_settings;
    QuantizerArgs e_quant;
    eval->add_option("--base", e_base)->required();
    eval->add_option("--queries", e_queries)->required();
    eval->add_option("--gt", e_gt_prefix, "Ground-truth cache prefix (default: <base>)");
    eval->add_option("--nlist", e_nlist)->capture_default_str();
    eval->add_option("--nprobe", e_settings.nprobe)->capture_default_str();
    eval->add_option("--k", e_settings.k)->capture_default_str();
    eval->add_option("--seed", e_seed)->capture_default_str();
    eval->add_option("--confidence", e_settings.scan.confidence)->capture_default_str();
    eval->add_option("--prefix-bits", e_settings.scan.prefix_bits);
    e_quant.add_to(eval);

    // bench-qps
    auto* bench = app.add_subcommand("bench-qps", "QPS and recall over nprobe values");
    std::string bq_index;
    std::string bq_base;
    std::string bq_queries;
    std::string bq_gt_prefix;
    std::vector<size_t> bq_nprobe{1};
    size_t bq_k = 100;
    size_t bq_runs = 3;
    bench->add_option("--index", bq_index)->required();
    bench->add_option("--base", bq_base, "Raw vectors (for ratios and ground truth)")->required();
    bench->add_option("--queries", bq_queries)->required();
    bench->add_option("--gt", bq_gt_prefix, "Ground-truth cache prefix (default: <base>)");
    bench->add_option("--nprobe", bq_nprobe)->delimiter(',');
    bench->add_option("--k", bq_k)->capture_default_str();
    bench->add_option("--runs", bq_runs)->capture_default_str();

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "Run a config file end to end");
    std::string config_path;
    pipeline->add_option("config", config_path, "Config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        set_threads(threads);
        if (*gen) {
            spec.kind = saq::parse_synthetic_kind(gen_kind);
            if (gen_queries > 0) {
                if (gen_query_out.empty()) {
                    throw saq::Error(saq::ErrorCode::kConfig, "--queries needs --query-out");
                }
                spec.n += gen_queries;
                auto split = saq::hold_out_queries(saq::gen_synthetic(spec), gen_queries,
                                                   saq::derive_seed(spec.seed, "queries"));
                saq::write_vecs(gen_out, split.base, saq::VecsFormat::kFvecs);
                saq::write_vecs(gen_query_out, split.queries, saq::VecsFormat::kFvecs);
            } else {
                saq::write_vecs(gen_out, saq::gen_synthetic(spec), saq::VecsFormat::kFvecs);
            }
        } else if (*gt) {
            auto base = read_matrix(gt_base, gt_format, raw_dim);
            auto queries = read_matrix(gt_queries, gt_format, raw_dim);
            auto truth = saq::cached_ground_truth(base, queries, gt_k, gt_out);
            fmt::print("ground truth: {} queries x {}\n", truth.ids.rows(), truth.ids.cols());
        } else if (*train) {
            auto data = read_matrix(train_input, "", 0);
            saq::TransformModel model;
            if (train_kind == "pca") {
                model = saq::fit_pca(data, train_seed);
            } else if (train_kind == "rotation") {
                model = saq::gen_rotation(static_cast<size_t>(data.cols()), train_seed);
            } else {
                throw saq::Error(saq::ErrorCode::kConfig, "--kind must be rotation or pca");
            }
            model.save(train_out);
            if (!plan_out.empty()) {
                if (train_kind != "pca") {
                    throw saq::Error(saq::ErrorCode::kConfig, "--plan-out needs --kind pca");
                }
                plan_options.granularity = saq::effective_granularity(model.dim(), plan_options.granularity);
                std::vector<float> spectrum(saq::padded_dim(model.dim(), plan_options.granularity), 0.0F);
                std::copy(model.variances.begin(), model.variances.end(), spectrum.begin());
                auto quota = static_cast<int64_t>(std::llround(plan_bits * static_cast<double>(model.dim())));
                auto plan = saq::search_plan(spectrum, quota, plan_options);
                plan.save(plan_out);
                fmt::print("plan: {} (modeled error {:.4e})\n", plan.summary(), plan.modeled_error);
            }
        } else if (*quantize) {
            auto data = read_matrix(q_input, "", 0);
            fs::create_directories(q_out);
            const auto start = std::chrono::steady_clock::now();
            if (q_method == "caq") {
                auto rotation = saq::gen_rotation(static_cast<size_t>(data.cols()), q_seed);
                rotation.mean = saq::column_mean(data);
                auto codes = saq::caq_quantize_batch(rotation.apply_batch(data),
                                                     static_cast<unsigned>(std::lround(q_bits)), q_rounds);
                rotation.save((fs::path(q_out) / "rotation.vqtm").string());
                codes.save((fs::path(q_out) / "codes.vqcq").string());
            } else if (q_method == "saq") {
                auto pca = saq::fit_pca(data, saq::derive_seed(q_seed, "pca"));
                saq::PlanSearchOptions options;
                options.granularity = saq::effective_granularity(pca.dim(), saq::kDefaultSegmentGranularity);
                std::vector<float> spectrum(saq::padded_dim(pca.dim(), options.granularity), 0.0F);
                std::copy(pca.variances.begin(), pca.variances.end(), spectrum.begin());
                auto quota = static_cast<int64_t>(std::llround(q_bits * static_cast<double>(pca.dim())));
                auto plan = saq::search_plan(spectrum, quota, options);
                auto codes = saq::saq_quantize(data, plan, &pca, q_seed, q_rounds);
                codes.save(q_out);
                pca.save((fs::path(q_out) / "pca.vqtm").string());
                fmt::print("plan: {} (modeled error {:.4e})\n", plan.summary(), plan.modeled_error);
            } else {
                throw saq::Error(saq::ErrorCode::kConfig, "--method must be caq or saq");
            }
            fmt::print("quantized {} vectors in {:.3f} s\n", data.rows(),
                       std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        } else if (*build) {
            auto data = read_matrix(b_base, "", 0);
            saq::IvfBuildOptions options;
            options.nlist = b_nlist;
            options.seed = b_seed;
            options.quantizer = b_quant.config();
            auto index = saq::IvfIndex::build(data, options);
            index.save(b_out);
            fmt::print("index: {} vectors, {} lists, {} ({:.3f} s quantization)\n", index.size(), index.nlist(),
                       index.quantizer().describe(), index.quantize_seconds());
        } else if (*search) {
            auto index = saq::IvfIndex::load(s_index);
            auto queries = read_matrix(s_queries, "", 0);
            if (!s_base.empty()) {
                index.attach_raw(std::make_shared<const saq::RowMatrixF>(read_matrix(s_base, "", 0)));
            }
            auto run = saq::run_search(index, queries, s_params);
            saq::RowMatrixI ids = saq::RowMatrixI::Constant(queries.rows(), static_cast<Eigen::Index>(s_params.k), -1);
            for (size_t q = 0; q < run.results.size(); ++q) {
                const auto& r = run.results[q];
                for (size_t j = 0; j < r.ids.size(); ++j) {
                    ids(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(j)) = static_cast<int32_t>(r.ids[j]);
                }
            }
            if (!s_out.empty()) {
                saq::write_ivecs(s_out, ids);
            }
            fmt::print("queries {} qps {:.1f} mean_bits_accessed {:.1f} candidates/query {:.1f}\n",
                       run.results.size(), run.seconds > 0 ? run.results.size() / run.seconds : 0.0,
                       run.mean_bits_accessed, run.mean_candidates);
            if (!s_gt.empty()) {
                auto truth = saq::read_ivecs(s_gt);
                fmt::print("recall@{} {:.4f}\n", s_params.k, saq::recall_at_k(run.results, truth, s_params.k));
            }
        } else if (*eval) {
            auto base = read_matrix(e_base, "", 0);
            auto queries = read_matrix(e_queries, "", 0);
            auto truth = saq::cached_ground_truth(base, queries, std::min<size_t>(e_settings.k, base.rows()),
                                                  e_gt_prefix.empty() ? e_base : e_gt_prefix);
            saq::IvfBuildOptions options;
            options.nlist = e_nlist;
            options.seed = e_seed;
            options.quantizer = e_quant.config();
            auto index = saq::IvfIndex::build(base, options);
            e_settings.nprobe = std::min(e_settings.nprobe, index.nlist());
            auto row = saq::evaluate_index(index, e_quant.method, e_quant.bits, base, queries, truth, e_settings);
            saq::write_report(std::cout, {row});
        } else if (*bench) {
            auto index = saq::IvfIndex::load(bq_index);
            auto base = read_matrix(bq_base, "", 0);
            auto queries = read_matrix(bq_queries, "", 0);
            const size_t k = std::min<size_t>(bq_k, base.rows());
            saq::TopK truth;
            if (queries.rows() > 0) {
                truth = saq::cached_ground_truth(base, queries, k, bq_gt_prefix.empty() ? bq_base : bq_gt_prefix);
            }
            auto rows = saq::bench_qps(index, std::string(saq::to_string(index.config().kind)), index.config().bits,
                                       base, queries, truth, k, bq_nprobe, bq_runs);
            saq::write_report(std::cout, rows);
        } else if (*pipeline) {
            auto config = saq::load_pipeline_config(config_path);
            if (threads != 0) {
                config.threads = threads;
            }
            auto rows = saq::run_pipeline(config, config_path);
            fmt::print("{} rows written to {}\n", rows.size(), (fs::path(config.output) / "results.csv").string());
        }
    } catch (const saq::Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return kExitOk;
}
