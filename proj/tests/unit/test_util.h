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

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "saq/types.h"

namespace saq::testing {

inline RowMatrixF
random_matrix(size_t rows, size_t cols, uint64_t seed, float scale = 1.0F) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> normal(0.0F, scale);
    RowMatrixF m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = normal(rng);
    }
    return m;
}

inline std::vector<float>
random_vector(size_t dim, uint64_t seed, float scale = 1.0F) {
    auto m = random_matrix(1, dim, seed, scale);
    return {m.data(), m.data() + dim};
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        std::string name = info != nullptr ? std::string(info->test_suite_name()) + "_" + info->name() : "saqvq";
        path_ = std::filesystem::temp_directory_path() / ("saqvq_" + name + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir&
    operator=(const TempDir&) = delete;

    std::string
    file(const std::string& name) const {
        return (path_ / name).string();
    }
    const std::filesystem::path&
    path() const {
        return path_;
    }

private:
    std::filesystem::path path_;
};

}  // namespace saq::testing
