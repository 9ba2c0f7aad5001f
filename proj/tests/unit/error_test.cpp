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

#include <string>

#include <gtest/gtest.h>

#include "saq/error.h"
#include "saq/seed.h"

namespace saq {

TEST(ErrorTest, CarriesCode) {
    try {
        throw_error(ErrorCode::kFormat, "bad header");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kFormat);
        EXPECT_NE(std::string(e.what()).find("bad header"), std::string::npos);
    }
}

TEST(ErrorTest, CheckDimNamesBothSizes) {
    EXPECT_NO_THROW(check_dim(3, 3, "x"));
    try {
        check_dim(2, 3, "query");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
        EXPECT_NE(std::string(e.what()).find("query"), std::string::npos);
    }
}

TEST(SeedTest, DerivationIsStableAndLabelSensitive) {
    EXPECT_EQ(derive_seed(42, "pca"), derive_seed(42, "pca"));
    EXPECT_NE(derive_seed(42, "pca"), derive_seed(42, "rotation"));
    EXPECT_NE(derive_seed(42, "pca"), derive_seed(43, "pca"));
    EXPECT_NE(derive_seed(42, uint64_t{1}), derive_seed(42, uint64_t{2}));
}

TEST(SeedTest, Fnv1aKnownValue) {
    // FNV-1a 64 of "a".
    const std::byte a[] = {std::byte{'a'}};
    EXPECT_EQ(fnv1a64(a), 0xaf63dc4c8601ec8cULL);
}

}  // namespace saq
