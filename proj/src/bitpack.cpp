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

#include "saq/bitpack.h"

#include <algorithm>
#include <string>

#include "saq/error.h"

namespace saq {

namespace {

void
check_bits(unsigned bits) {
    if (bits < 1 || bits > 16) {
        throw_error(ErrorCode::kInvalidArgument,
                    "bit width must be in [1, 16], got " + std::to_string(bits));
    }
}

}  // namespace

void
pack_codes_into(std::span<const uint16_t> codes, unsigned bits, std::span<uint8_t> out) {
    check_bits(bits);
    if (out.size() != packed_size(codes.size(), bits)) {
        throw_error(ErrorCode::kInvalidArgument, "pack_codes: output length mismatch");
    }
    std::fill(out.begin(), out.end(), uint8_t{0});
    const uint32_t limit = 1U << bits;
    size_t bit_pos = 0;
    for (uint16_t code : codes) {
        if (code >= limit) {
            throw_error(ErrorCode::kInvalidArgument,
                        "pack_codes: code " + std::to_string(code) + " exceeds " +
                            std::to_string(bits) + " bits");
        }
        // Emit the field MSB first, filling each byte from its high bit down.
        unsigned remaining = bits;
        while (remaining > 0) {
            size_t byte = bit_pos >> 3;
            unsigned used = bit_pos & 7;
            unsigned room = 8 - used;
            unsigned take = std::min(room, remaining);
            uint32_t chunk = (static_cast<uint32_t>(code) >> (remaining - take)) & ((1U << take) - 1);
            out[byte] |= static_cast<uint8_t>(chunk << (room - take));
            remaining -= take;
            bit_pos += take;
        }
    }
}

std::vector<uint8_t>
pack_codes(std::span<const uint16_t> codes, unsigned bits) {
    check_bits(bits);
    std::vector<uint8_t> out(packed_size(codes.size(), bits));
    pack_codes_into(codes, bits, out);
    return out;
}

void
unpack_codes_into(std::span<const uint8_t> bytes, unsigned bits, std::span<uint16_t> out) {
    check_bits(bits);
    if (bytes.size() != packed_size(out.size(), bits)) {
        throw_error(ErrorCode::kInvalidArgument,
                    "unpack_codes: expected " + std::to_string(packed_size(out.size(), bits)) +
                        " bytes, got " + std::to_string(bytes.size()));
    }
    size_t bit_pos = 0;
    for (auto& code : out) {
        uint32_t value = 0;
        unsigned remaining = bits;
        while (remaining > 0) {
            size_t byte = bit_pos >> 3;
            unsigned used = bit_pos & 7;
            unsigned room = 8 - used;
            unsigned take = std::min(room, remaining);
            uint32_t chunk = (static_cast<uint32_t>(bytes[byte]) >> (room - take)) & ((1U << take) - 1);
            value = (value << take) | chunk;
            remaining -= take;
            bit_pos += take;
        }
        code = static_cast<uint16_t>(value);
    }
}

std::vector<uint16_t>
unpack_codes(std::span<const uint8_t> bytes, unsigned bits, size_t count) {
    std::vector<uint16_t> out(count);
    unpack_codes_into(bytes, bits, out);
    return out;
}

}  // namespace saq
