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

#include "saq/binary_io.h"

#include <fstream>

#include "saq/error.h"

namespace saq::io {

void
Writer::bytes(const void* data, size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out_) {
        throw_error(ErrorCode::kIo, "write failed");
    }
}

void
Writer::magic(std::string_view four_cc) {
    bytes(four_cc.data(), four_cc.size());
}

void
Reader::bytes(void* data, size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in_.gcount()) != n) {
        throw_error(ErrorCode::kFormat, what_ + ": truncated input");
    }
}

void
Reader::expect_magic(std::string_view four_cc) {
    std::string got(four_cc.size(), '\0');
    bytes(got.data(), got.size());
    if (got != four_cc) {
        throw_error(ErrorCode::kFormat,
                    what_ + ": bad magic '" + got + "', expected '" + std::string(four_cc) + "'");
    }
}

std::ofstream
open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw_error(ErrorCode::kIo, "cannot open for writing: " + path);
    }
    return out;
}

std::ifstream
open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw_error(ErrorCode::kIo, "cannot open for reading: " + path);
    }
    return in;
}

}  // namespace saq::io
