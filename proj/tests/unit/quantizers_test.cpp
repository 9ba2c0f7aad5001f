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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "saq/data.h"
#include "saq/error.h"
#include "saq/quantizers.h"
#include "saq/transforms.h"
#include "test_util.h"

namespace saq {
namespace {

RowMatrixF
skewed(size_t n, size_t dim, uint64_t seed) {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::kSkewed;
    spec.n = n;
    spec.dim = dim;
    spec.seed = seed;
    return gen_synthetic(spec);
}

struct Workload {
    RowMatrixF data;
    RowMatrixF queries;
};

// Mean relative error of estimate_all against exact distances.
double
mean_relative_error(const Quantizer& quantizer, const EncodedList& list, const Workload& w,
                    const ScanOptions& options = {}) {
    auto transformed = quantizer.transform_batch(w.queries);
    double sum = 0.0;
    size_t count = 0;
    std::vector<float> est(static_cast<size_t>(w.data.rows()));
    for (Eigen::Index j = 0; j < w.queries.rows(); ++j) {
        quantizer.estimate_all(list, row_span(transformed, j), est, options);
        for (Eigen::Index i = 0; i < w.data.rows(); ++i) {
            double real = l2_sqr(row_span(w.data, i), row_span(w.queries, j));
            sum += std::abs(est[static_cast<size_t>(i)] - real) / real;
            ++count;
        }
    }
    return sum / static_cast<double>(count);
}

class QuantizerKindTest : public ::testing::TestWithParam<QuantizerKind> {
protected:
    void
    SetUp() override {
        auto all = skewed(1200, 64, 3);
        // Residual-style data: roughly zero mean.
        auto mean = column_mean(all);
        for (Eigen::Index i = 0; i < all.rows(); ++i) {
            for (Eigen::Index j = 0; j < all.cols(); ++j) {
                all(i, j) -= mean[static_cast<size_t>(j)];
            }
        }
        work_.data = all.topRows(1000);
        work_.queries = all.bottomRows(20);
        config_.kind = GetParam();
        config_.bits = 4;
        config_.train_iters = 8;
        quantizer_ = make_quantizer(config_);
        quantizer_->train(work_.data, 42);
        list_ = quantizer_->encode(quantizer_->transform_batch(work_.data));
    }

    Workload work_;
    QuantizerConfig config_;
    std::unique_ptr<Quantizer> quantizer_;
    std::unique_ptr<EncodedList> list_;
};

}  // namespace

TEST_P(QuantizerKindTest, EncodesEveryRow) {
    EXPECT_EQ(quantizer_->kind(), GetParam());
    EXPECT_EQ(list_->size(), 1000U);
    EXPECT_EQ(quantizer_->input_dim(), 64U);
    EXPECT_GT(quantizer_->code_bytes(), 0U);
    EXPECT_FALSE(quantizer_->describe().empty());
}

TEST_P(QuantizerKindTest, EstimatesTrackExactDistances) {
    double err = mean_relative_error(*quantizer_, *list_, work_);
    if (GetParam() == QuantizerKind::kExact) {
        EXPECT_LT(err, 1e-5);
    } else {
        EXPECT_LT(err, 0.2);
    }
}

TEST_P(QuantizerKindTest, UnprunedScanMatchesEstimateAll) {
    auto tq = quantizer_->transform_batch(work_.queries);
    std::vector<uint32_t> ids(1000);
    std::iota(ids.begin(), ids.end(), 0U);
    ScanOptions opts;
    opts.prune = false;
    std::vector<float> est(1000);
    quantizer_->estimate_all(*list_, row_span(tq, 0), est, opts);
    TopKHeap heap(10);
    ScanStats stats;
    quantizer_->scan(*list_, ids, row_span(tq, 0), heap, stats, opts);
    EXPECT_EQ(stats.candidates, 1000U);
    EXPECT_EQ(stats.pruned, 0U);
    EXPECT_EQ(stats.bits_accessed, 1000U * quantizer_->code_bits());
    std::vector<std::pair<float, uint32_t>> expected;
    for (uint32_t i = 0; i < 1000; ++i) {
        expected.emplace_back(est[i], i);
    }
    std::sort(expected.begin(), expected.end());
    expected.resize(10);
    EXPECT_EQ(heap.take_sorted(), expected);
}

TEST_P(QuantizerKindTest, SaveLoadPreservesEstimates) {
    testing::TempDir dir;
    quantizer_->save(dir.path().string());
    std::ostringstream buffer;
    list_->write(buffer);

    auto loaded = make_quantizer(config_);
    loaded->load(dir.path().string());
    std::istringstream in(buffer.str());
    auto list = loaded->read_list(in, "list");
    ASSERT_EQ(list->size(), list_->size());

    auto tq = quantizer_->transform_batch(work_.queries);
    auto tq2 = loaded->transform_batch(work_.queries);
    EXPECT_TRUE(tq == tq2);
    std::vector<float> a(1000);
    std::vector<float> b(1000);
    quantizer_->estimate_all(*list_, row_span(tq, 1), a, {});
    loaded->estimate_all(*list, row_span(tq2, 1), b, {});
    EXPECT_EQ(a, b);
}

INSTANTIATE_TEST_SUITE_P(AllKinds, QuantizerKindTest,
                         ::testing::Values(QuantizerKind::kExact, QuantizerKind::kCaq,
                                           QuantizerKind::kSaq, QuantizerKind::kLvq,
                                           QuantizerKind::kPq, QuantizerKind::kPcaDrop),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(QuantizerTest, ParseKinds) {
    for (auto kind : {QuantizerKind::kExact, QuantizerKind::kCaq, QuantizerKind::kSaq,
                      QuantizerKind::kLvq, QuantizerKind::kPq, QuantizerKind::kPcaDrop}) {
        EXPECT_EQ(parse_quantizer_kind(to_string(kind)), kind);
    }
    try {
        parse_quantizer_kind("opq");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kConfig);
    }
}

TEST(QuantizerTest, PqRateMatching) {
    EXPECT_EQ(pq_subspaces_for_rate(960, 4.0), 480U);
    EXPECT_EQ(pq_subspaces_for_rate(128, 2.0), 32U);
}

TEST(QuantizerTest, CaqPrefixErrorShrinksWithPrefixWidth) {
    auto all = skewed(600, 64, 5);
    Workload w{all.topRows(500), all.bottomRows(10)};
    QuantizerConfig config;
    config.kind = QuantizerKind::kCaq;
    config.bits = 8;
    auto q = make_quantizer(config);
    q->train(w.data, 1);
    auto list = q->encode(q->transform_batch(w.data));
    double previous = 1e30;
    for (unsigned b : {2U, 4U, 6U, 8U}) {
        ScanOptions opts;
        opts.prefix_bits = b;
        double err = mean_relative_error(*q, *list, w, opts);
        EXPECT_LT(err, previous) << "prefix " << b;
        previous = err;
    }
}

TEST(QuantizerTest, SaqBitsDecreaseWithPruning) {
    auto all = skewed(2100, 128, 6);
    Workload w{all.topRows(2000), all.bottomRows(10)};
    QuantizerConfig config;
    config.kind = QuantizerKind::kSaq;
    config.bits = 4;
    auto q = make_quantizer(config);
    q->train(w.data, 2);
    auto list = q->encode(q->transform_batch(w.data));
    auto tq = q->transform_batch(w.queries);
    std::vector<uint32_t> ids(2000);
    std::iota(ids.begin(), ids.end(), 0U);
    ScanStats pruned;
    ScanStats full;
    for (Eigen::Index j = 0; j < tq.rows(); ++j) {
        TopKHeap a(10);
        TopKHeap b(10);
        q->scan(*list, ids, row_span(tq, j), a, pruned, {});
        ScanOptions off;
        off.prune = false;
        q->scan(*list, ids, row_span(tq, j), b, full, off);
    }
    EXPECT_GT(pruned.pruned, 0U);
    EXPECT_LT(pruned.bits_accessed, full.bits_accessed);
}

TEST(TopKHeapTest, ThresholdInfiniteUntilFull) {
    TopKHeap heap(3);
    EXPECT_TRUE(std::isinf(heap.threshold()));
    heap.push(5.0F, 1);
    heap.push(1.0F, 2);
    EXPECT_TRUE(std::isinf(heap.threshold()));
    heap.push(3.0F, 3);
    EXPECT_EQ(heap.threshold(), 5.0F);
    heap.push(2.0F, 4);
    EXPECT_EQ(heap.threshold(), 3.0F);
    heap.push(9.0F, 5);
    auto items = heap.take_sorted();
    EXPECT_EQ(items, (std::vector<std::pair<float, uint32_t>>{{1.0F, 2}, {2.0F, 4}, {3.0F, 3}}));
}

TEST(TopKHeapTest, TiesKeepLowerId) {
    TopKHeap heap(2);
    heap.push(1.0F, 9);
    heap.push(1.0F, 7);
    heap.push(1.0F, 3);
    heap.push(1.0F, 8);
    auto items = heap.take_sorted();
    EXPECT_EQ(items, (std::vector<std::pair<float, uint32_t>>{{1.0F, 3}, {1.0F, 7}}));
}

}  // namespace saq
