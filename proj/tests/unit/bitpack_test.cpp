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

#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "saq/bitpack.h"

namespace saq {

TEST(BitpackTest, EightBitsIsIdentityLayout) {
    std::vector<uint16_t> codes = {0, 17, 181, 255};
    auto bytes = pack_codes(codes, 8);
    EXPECT_EQ(bytes, (std::vector<uint8_t>{0, 17, 181, 255}));
}

TEST(BitpackTest, OneBitMostSignificantFirst) {
    std::vector<uint16_t> codes = {1, 0, 1, 1, 0, 0, 0, 0};
    auto bytes = pack_codes(codes, 1);
    ASSERT_EQ(bytes.size(), 1U);
    EXPECT_EQ(bytes[0], 0b10110000);
}

TEST(BitpackTest, RoundTripAllWidths) {
    std::mt19937 rng(11);
    for (unsigned bits = 1; bits <= 16; ++bits) {
        for (size_t count : {1U, 7U, 64U, 129U}) {
            std::uniform_int_distribution<uint32_t> dist(0, (1U << bits) - 1);
            std::vector<uint16_t> codes(count);
            for (auto& c : codes) {
                c = static_cast<uint16_t>(dist(rng));
            }
            auto bytes = pack_codes(codes, bits);
            EXPECT_EQ(bytes.size(), packed_size(count, bits));
            EXPECT_EQ(unpack_codes(bytes, bits, count), codes) << "bits=" << bits;
        }
    }
}

TEST(BitpackTest, HighBitsFormPrefix) {
    // 181 = 0b10110101; its top 3 bits are 0b101 = 5.
    std::vector<uint16_t> codes = {181};
    auto bytes = pack_codes(codes, 8);
    EXPECT_EQ(bytes[0] >> 5, 5);
}

TEST(BitpackTest, LengthMismatchThrows) {
    std::vector<uint16_t> codes(10, 1);
    std::vector<uint8_t> small(1);
    EXPECT_ANY_THROW(pack_codes_into(codes, 4, small));
    std::vector<uint16_t> out(10);
    EXPECT_ANY_THROW(unpack_codes_into(small, 4, out));
}

}  // namespace saq
