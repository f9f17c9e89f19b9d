// Copyright 2026-present the bmpsearch project
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
#include <vector>

namespace bmp::detail {

// Fixed-width LSB-first bit packing. Values are appended to a byte buffer as
// a contiguous bit stream; the caller tracks the bit length.

inline constexpr unsigned bits_needed(std::uint64_t max_value)
{
    return max_value == 0 ? 1U : static_cast<unsigned>(std::bit_width(max_value));
}

inline void
append_bits(std::vector<std::uint8_t>& out, std::uint64_t& bit_length, std::uint64_t value, unsigned width)
{
    for (unsigned consumed = 0; consumed < width;) {
        auto byte = bit_length >> 3;
        auto offset = static_cast<unsigned>(bit_length & 7);
        if (byte >= out.size()) {
            out.push_back(0);
        }
        auto take = std::min(8U - offset, width - consumed);
        auto chunk = static_cast<std::uint8_t>((value >> consumed) & ((1U << take) - 1U));
        out[byte] = static_cast<std::uint8_t>(out[byte] | (chunk << offset));
        consumed += take;
        bit_length += take;
    }
}

inline std::uint64_t read_bits(std::uint8_t const* data, std::uint64_t bit_position, unsigned width)
{
    std::uint64_t value = 0;
    for (unsigned got = 0; got < width;) {
        auto byte = bit_position >> 3;
        auto offset = static_cast<unsigned>(bit_position & 7);
        auto take = std::min(8U - offset, width - got);
        auto chunk = static_cast<std::uint64_t>(data[byte] >> offset) & ((1U << take) - 1U);
        value |= chunk << got;
        got += take;
        bit_position += take;
    }
    return value;
}

}  // namespace bmp::detail
