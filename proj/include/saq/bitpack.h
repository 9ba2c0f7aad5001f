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
#include <vector>

namespace saq {

/// Bytes needed for `count` fields of `bits` bits each.
constexpr size_t
packed_size(size_t count, unsigned bits) {
    return (count * bits + 7) / 8;
}

/// Packs B-bit codes into a contiguous bit stream, dimension-major, with
/// each field written most-significant bit first. Under this layout the top
/// b bits of every field are what a b-bit prefix code needs.
std::vector<uint8_t>
pack_codes(std::span<const uint16_t> codes, unsigned bits);

void
pack_codes_into(std::span<const uint16_t> codes, unsigned bits, std::span<uint8_t> out);

std::vector<uint16_t>
unpack_codes(std::span<const uint8_t> bytes, unsigned bits, size_t count);

void
unpack_codes_into(std::span<const uint8_t> bytes, unsigned bits, std::span<uint16_t> out);

}  // namespace saq
