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
#include <memory>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "saq/data.h"
#include "saq/error.h"
#include "saq/eval.h"
#include "saq/ivf.h"
#include "saq/kmeans.h"
#include "saq/transforms.h"
#include "test_util.h"

namespace saq {
namespace {

RowMatrixF
clustered(size_t n, size_t dim, uint64_t seed) {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::kClustered;
    spec.n = n;
    spec.dim = dim;
    spec.clusters = 16;
    spec.center_scale = 2.0;
    spec.seed = seed;
    return gen_synthetic(spec);
}

IvfBuildOptions
options(QuantizerKind kind, size_t nlist, double bits = 4) {
    IvfBuildOptions opts;
    opts.nlist = nlist;
    opts.quantizer.kind = kind;
    opts.quantizer.bits = bits;
    opts.seed = 7;
    return opts;
}

class IvfTest : public ::testing::Test {
protected:
    static void
    SetUpTestSuite() {
        auto all = clustered(3100, 32, 1);
        split_ = new Split(hold_out_queries(all, 100, 2));
        truth_ = new TopK(brute_force_topk(split_->base, split_->queries, 10));
    }
    static void
    TearDownTestSuite() {
        delete split_;
        delete truth_;
    }

    static Split* split_;
    static TopK* truth_;
};

Split* IvfTest::split_ = nullptr;
TopK* IvfTest::truth_ = nullptr;

}  // namespace

TEST(IvfDefaultsTest, DefaultNlist) {
    EXPECT_EQ(default_nlist(1'000'000), 4096U);
    EXPECT_EQ(default_nlist(10'000), 100U);
    EXPECT_EQ(default_nlist(100), 16U);
    EXPECT_EQ(default_nlist(5), 5U);
}

TEST_F(IvfTest, EveryVectorStoredOnceInNearestList) {
    auto index = IvfIndex::build(split_->base, options(QuantizerKind::kCaq, 20));
    EXPECT_EQ(index.nlist(), 20U);
    EXPECT_EQ(index.size(), 3000U);
    auto nearest = assign_nearest(split_->base, index.centroids());
    std::vector<int> seen(3000, 0);
    for (size_t l = 0; l < index.nlist(); ++l) {
        for (uint32_t id : index.list_ids(l)) {
            ++seen[id];
            EXPECT_EQ(nearest[id], l);
        }
    }
    for (int s : seen) {
        EXPECT_EQ(s, 1);
    }
}

TEST_F(IvfTest, SingleListCentroidIsDatasetMean) {
    auto index = IvfIndex::build(split_->base, options(QuantizerKind::kCaq, 1));
    auto mean = column_mean(split_->base);
    for (size_t j = 0; j < 32; ++j) {
        EXPECT_NEAR(index.centroids()(0, static_cast<Eigen::Index>(j)), mean[j], 1e-5);
    }
    EXPECT_EQ(index.list_ids(0).size(), 3000U);
}

TEST_F(IvfTest, ExactScanOfAllListsHasPerfectRecall) {
    auto index = IvfIndex::build(split_->base, options(QuantizerKind::kExact, 10));
    SearchParams params;
    params.k = 10;
    params.nprobe = 10;
    auto results = index.search_batch(split_->queries, params);
    EXPECT_DOUBLE_EQ(recall_at_k(results, truth_->ids, 10), 1.0);
}

TEST_F(IvfTest, RecallNonDecreasingInNprobe) {
    auto index = IvfIndex::build(split_->base, options(QuantizerKind::kCaq, 30));
    SearchParams params;
    params.k = 10;
    double previous = 0.0;
    for (size_t nprobe : {1U, 2U, 4U, 8U, 16U, 30U}) {
        params.nprobe = nprobe;
        double recall = recall_at_k(index.search_batch(split_->queries, params), truth_->ids, 10);
        EXPECT_GE(recall, previous - 1e-12) << "nprobe " << nprobe;
        previous = recall;
    }
}

TEST(IvfSelfQueryTest, EightBitCaqFindsStoredVector) {
    auto data = clustered(10000, 32, 3);
    auto index = IvfIndex::build(data, options(QuantizerKind::kCaq, 50, 8));
    SearchParams params;
    params.k = 1;
    params.nprobe = 50;
    for (Eigen::Index i = 0; i < 10000; i += 97) {
        auto result = index.search(row_span(data, i), params);
        ASSERT_EQ(result.ids.size(), 1U);
        EXPECT_EQ(result.ids[0], static_cast<uint32_t>(i));
    }
}

TEST_F(IvfTest, UnprunedSearchEqualsSortedEstimates) {
    for (auto kind : {QuantizerKind::kCaq, QuantizerKind::kSaq, QuantizerKind::kPq}) {
        auto opts = options(kind, 10);
        opts.quantizer.train_iters = 5;
        auto index = IvfIndex::build(split_->base, opts);
        SearchParams params;
        params.k = 15;
        params.nprobe = 3;
        params.scan.prune = false;
        for (Eigen::Index j = 0; j < 10; ++j) {
            auto q = row_span(split_->queries, j);
            auto result = index.search(q, params);
            std::vector<uint32_t> ids;
            std::vector<float> est;
            index.estimate_probed(q, 3, params.scan, ids, est);
            std::vector<std::pair<float, uint32_t>> all;
            for (size_t i = 0; i < ids.size(); ++i) {
                all.emplace_back(est[i], ids[i]);
            }
            std::sort(all.begin(), all.end());
            ASSERT_EQ(result.ids.size(), 15U);
            for (size_t r = 0; r < 15; ++r) {
                EXPECT_EQ(result.ids[r], all[r].second);
                EXPECT_EQ(result.distances[r], all[r].first);
            }
            EXPECT_EQ(result.stats.candidates, ids.size());
        }
    }
}

TEST_F(IvfTest, FullRerankMatchesExactSearchOverProbedLists) {
    auto index = IvfIndex::build(split_->base, options(QuantizerKind::kCaq, 10, 2));
    index.attach_raw(std::make_shared<RowMatrixF>(split_->base));
    SearchParams params;
    params.k = 10;
    params.nprobe = 4;
    params.rerank = 3000;
    for (Eigen::Index j = 0; j < 20; ++j) {
        auto q = row_span(split_->queries, j);
        auto result = index.search(q, params);
        std::vector<std::pair<double, uint32_t>> exact;
        for (uint32_t list : index.probe(q, 4)) {
            for (uint32_t id : index.list_ids(list)) {
                exact.emplace_back(exact_distance(row_span(split_->base, id), q), id);
            }
        }
        std::sort(exact.begin(), exact.end());
        for (size_t r = 0; r < 10; ++r) {
            EXPECT_EQ(result.ids[r], exact[r].second);
        }
    }
}

TEST_F(IvfTest, KLargerThanNReturnsEverything) {
    auto small = RowMatrixF(split_->base.topRows(40));
    auto index = IvfIndex::build(small, options(QuantizerKind::kCaq, 4));
    SearchParams params;
    params.k = 100;
    params.nprobe = 4;
    auto result = index.search(row_span(split_->queries, 0), params);
    EXPECT_EQ(result.ids.size(), 40U);
    EXPECT_TRUE(std::is_sorted(result.distances.begin(), result.distances.end()));
}

TEST_F(IvfTest, InvalidArgumentsRejected) {
    auto index = IvfIndex::build(split_->base, options(QuantizerKind::kCaq, 8));
    SearchParams params;
    params.nprobe = 0;
    EXPECT_THROW(index.search(row_span(split_->queries, 0), params), Error);
    params.nprobe = 9;
    EXPECT_THROW(index.search(row_span(split_->queries, 0), params), Error);
    params.nprobe = 1;
    params.rerank = 10;
    EXPECT_THROW(index.search(row_span(split_->queries, 0), params), Error);
    auto tiny = RowMatrixF(split_->base.topRows(5));
    EXPECT_THROW(IvfIndex::build(tiny, options(QuantizerKind::kCaq, 6)), Error);
    std::vector<float> wrong(31, 0.0F);
    params.rerank = 0;
    EXPECT_THROW(index.search(wrong, params), Error);
}

TEST_F(IvfTest, SaveLoadGivesIdenticalResults) {
    testing::TempDir dir;
    for (auto kind : {QuantizerKind::kCaq, QuantizerKind::kSaq, QuantizerKind::kLvq,
                      QuantizerKind::kPcaDrop, QuantizerKind::kExact}) {
        auto index = IvfIndex::build(split_->base, options(kind, 12));
        auto path = dir.file(std::string(to_string(kind)));
        index.save(path);
        auto loaded = IvfIndex::load(path);
        EXPECT_EQ(loaded.nlist(), 12U);
        EXPECT_EQ(loaded.size(), index.size());
        SearchParams params;
        params.k = 10;
        params.nprobe = 3;
        auto a = index.search_batch(split_->queries, params);
        auto b = loaded.search_batch(split_->queries, params);
        for (size_t j = 0; j < a.size(); ++j) {
            EXPECT_EQ(a[j].ids, b[j].ids);
            EXPECT_EQ(a[j].distances, b[j].distances);
        }
    }
}

TEST_F(IvfTest, BatchMatchesSingleSearch) {
    auto index = IvfIndex::build(split_->base, options(QuantizerKind::kSaq, 10));
    SearchParams params;
    params.k = 5;
    params.nprobe = 2;
    auto batch = index.search_batch(split_->queries, params);
    for (Eigen::Index j = 0; j < split_->queries.rows(); ++j) {
        auto single = index.search(row_span(split_->queries, j), params);
        EXPECT_EQ(single.ids, batch[static_cast<size_t>(j)].ids);
    }
}

TEST_F(IvfTest, BuildIsDeterministic) {
    auto a = IvfIndex::build(split_->base, options(QuantizerKind::kSaq, 10));
    auto b = IvfIndex::build(split_->base, options(QuantizerKind::kSaq, 10));
    EXPECT_TRUE(a.centroids() == b.centroids());
    SearchParams params;
    params.k = 10;
    params.nprobe = 3;
    auto ra = a.search_batch(split_->queries, params);
    auto rb = b.search_batch(split_->queries, params);
    for (size_t j = 0; j < ra.size(); ++j) {
        EXPECT_EQ(ra[j].distances, rb[j].distances);
    }
}

}  // namespace saq
