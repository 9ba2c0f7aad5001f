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

#include "saq/error.h"

namespace saq {

std::string_view
to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::kInvalidArgument:
            return "invalid-argument";
        case ErrorCode::kInsufficientData:
            return "insufficient-data";
        case ErrorCode::kDimensionMismatch:
            return "dimension-mismatch";
        case ErrorCode::kFormat:
            return "format-error";
        case ErrorCode::kIo:
            return "io-error";
        case ErrorCode::kConfig:
            return "config-error";
        case ErrorCode::kUntrained:
            return "untrained";
        case ErrorCode::kInternal:
            return "internal-error";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {
}

void
throw_error(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace saq
