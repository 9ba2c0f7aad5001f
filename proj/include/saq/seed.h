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

#include <cstdint>
#include <span>
#include <string_view>

namespace saq {

uint64_t
splitmix64(uint64_t x);

/// Derives a child seed from a root seed and a component label, so that
/// every random stream in a run traces back to one configured seed.
uint64_t
derive_seed(uint64_t root, std::string_view label);

uint64_t
derive_seed(uint64_t root, uint64_t index);

/// 64-bit FNV-1a over raw bytes; used for content fingerprints.
uint64_t
fnv1a64(std::span<const std::byte> bytes, uint64_t state = 0xcbf29ce484222325ULL);

}  // namespace saq
