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

#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace saq::io {

static_assert(std::endian::native == std::endian::little,
              "binary formats are little-endian; big-endian hosts are not supported");

/// Thin wrapper that throws kIo on stream failure.
class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {
    }

    void
    bytes(const void* data, size_t n);

    void
    magic(std::string_view four_cc);

    template <typename T>
    void
    pod(const T& value) {
        bytes(&value, sizeof(T));
    }

    template <typename T>
    void
    array(std::span<const T> values) {
        bytes(values.data(), values.size() * sizeof(T));
    }

private:
    std::ostream& out_;
};

/// Throws kFormat on short reads or magic mismatches.
class Reader {
public:
    Reader(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {
    }

    void
    bytes(void* data, size_t n);

    void
    expect_magic(std::string_view four_cc);

    template <typename T>
    T
    pod() {
        T value{};
        bytes(&value, sizeof(T));
        return value;
    }

    template <typename T>
    std::vector<T>
    array(size_t count) {
        std::vector<T> values(count);
        bytes(values.data(), count * sizeof(T));
        return values;
    }

    template <typename T>
    void
    array_into(std::span<T> out) {
        bytes(out.data(), out.size() * sizeof(T));
    }

private:
    std::istream& in_;
    std::string what_;
};

std::ofstream
open_output(const std::string& path);

std::ifstream
open_input(const std::string& path);

}  // namespace saq::io
