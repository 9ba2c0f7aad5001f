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

#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "saq/error.h"
#include "saq/kmeans.h"
#include "test_util.h"

namespace saq {

TEST(KMeansTest, RecoversSeparatedBlobs) {
    RowMatrixF data(300, 2);
    auto noise = testing::random_matrix(300, 2, 1, 0.05F);
    const float centers[3][2] = {{0, 0}, {10, 0}, {0, 10}};
    for (Eigen::Index i = 0; i < 300; ++i) {
        data(i, 0) = centers[i % 3][0] + noise(i, 0);
        data(i, 1) = centers[i % 3][1] + noise(i, 1);
    }
    KMeansOptions opts;
    opts.seed = 4;
    auto result = kmeans(data, 3, opts);
    auto labels = assign_nearest(data, result.centroids);
    for (Eigen::Index i = 3; i < 300; ++i) {
        EXPECT_EQ(labels[static_cast<size_t>(i)], labels[static_cast<size_t>(i % 3)]);
    }
    EXPECT_EQ(std::set<uint32_t>(labels.begin(), labels.end()).size(), 3U);
}

TEST(KMeansTest, DistortionNonIncreasing) {
    auto data = testing::random_matrix(2000, 8, 2);
    for (bool pp : {true, false}) {
        KMeansOptions opts;
        opts.iters = 15;
        opts.seed = 3;
        opts.plus_plus = pp;
        auto result = kmeans(data, 32, opts);
        ASSERT_EQ(result.distortion.size(), 15U);
        for (size_t i = 1; i < result.distortion.size(); ++i) {
            EXPECT_LE(result.distortion[i], result.distortion[i - 1] * (1 + 1e-6));
        }
    }
}

TEST(KMeansTest, DeterministicPerSeed) {
    auto data = testing::random_matrix(500, 4, 5);
    KMeansOptions opts;
    opts.seed = 9;
    auto a = kmeans(data, 10, opts);
    auto b = kmeans(data, 10, opts);
    EXPECT_TRUE(a.centroids == b.centroids);
}

TEST(KMeansTest, DuplicatePointsGiveZeroDistortion) {
    RowMatrixF data(40, 3);
    for (Eigen::Index i = 0; i < 40; ++i) {
        data.row(i) << static_cast<float>(i % 4), static_cast<float>(i % 4) * 2, -1.0F;
    }
    KMeansOptions opts;
    opts.iters = 5;
    auto result = kmeans(data, 4, opts);
    EXPECT_NEAR(result.distortion.back(), 0.0, 1e-9);
}

TEST(KMeansTest, AssignmentIsNearestWithLowerIdTies) {
    RowMatrixF centroids(3, 1);
    centroids << 0, 2, 2;
    RowMatrixF data(3, 1);
    data << 0.9F, 1.0F, 3.0F;
    std::vector<float> dist;
    auto labels = assign_nearest(data, centroids, &dist);
    EXPECT_EQ(labels, (std::vector<uint32_t>{0, 0, 1}));
    EXPECT_FLOAT_EQ(dist[2], 1.0F);
}

TEST(KMeansTest, TooFewRowsRejected) {
    auto data = testing::random_matrix(3, 2, 1);
    try {
        kmeans(data, 5, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kInsufficientData);
    }
    EXPECT_THROW(kmeans(data, 0, {}), Error);
}

}  // namespace saq
