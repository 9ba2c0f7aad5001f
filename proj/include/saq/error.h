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

#include <stdexcept>
#include <string>
#include <string_view>

namespace saq {

enum class ErrorCode {
    kInvalidArgument,
    kInsufficientData,
    kDimensionMismatch,
    kFormat,
    kIo,
    kConfig,
    kUntrained,
    kInternal,
};

std::string_view to_string(ErrorCode code);

/// Exception type thrown by every saqvq component. The code lets callers
/// (the CLI in particular) map failures onto exit statuses.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode
    code() const noexcept {
        return code_;
    }

private:
    ErrorCode code_;
};

[[noreturn]] void
throw_error(ErrorCode code, const std::string& message);

inline void
check_dim(size_t got, size_t expected, std::string_view what) {
    if (got != expected) {
        throw_error(ErrorCode::kDimensionMismatch,
                    std::string(what) + ": expected dimension " + std::to_string(expected) +
                        ", got " + std::to_string(got));
    }
}

}  // namespace saq
