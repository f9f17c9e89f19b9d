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

#include <cstdint>
#include <span>
#include <vector>

#include "bmp/core.hpp"

namespace bmp {

/// Per-query, per-block score upper bounds, accumulated in 32 bits.
using upper_bounds = std::vector<std::uint32_t>;

/// Per-term, per-block maximum quantized impacts over blocks of `block_size`
/// consecutive doc ids.
///
/// Two layouts:
///   - raw: one dense array of num_blocks bytes per term, term-major and
///     contiguous so that the weighted aggregation runs as a flat
///     multiply-add over each term's slice;
///   - compressed: per term, only the non-zero blocks as (block id, impact)
///     pairs with delta-encoded, bit-packed block ids (minimal uniform width
///     per term) and impacts stored as plain bytes.
///
/// Both layouts answer queries identically; compressed trades aggregation
/// speed for space.
class block_max_index {
public:
    struct compressed_term {
        std::uint32_t count = 0;
        std::uint8_t delta_bits = 0;
        /// Packed deltas (ceil(count * delta_bits / 8) bytes) followed by
        /// `count` impact bytes.
        std::vector<std::uint8_t> data;

        bool operator==(compressed_term const&) const = default;
    };

    block_max_index() = default;

    [[nodiscard]] static bool supported_block_size(std::uint32_t block_size)
    {
        switch (block_size) {
        case 8:
        case 16:
        case 32:
        case 64:
        case 128:
        case 256: return true;
        default: return false;
        }
    }

    [[nodiscard]] std::uint32_t block_size() const { return m_block_size; }
    [[nodiscard]] std::uint32_t num_blocks() const { return m_num_blocks; }
    [[nodiscard]] std::uint64_t num_terms() const { return m_num_terms; }
    [[nodiscard]] bm_mode mode() const { return m_mode; }

    /// Dense block-max row for one term; equals the raw layout regardless of
    /// mode. Terms outside the vocabulary yield an all-zero row.
    [[nodiscard]] std::vector<quantized_impact> densify_term(term_id term) const;

    /// bounds[j] = sum over query entries (t, w) of w * blockmax[t][j].
    /// `bounds` must hold num_blocks() slots; it is zeroed first. Query terms
    /// outside the vocabulary contribute nothing. Throws
    /// std::invalid_argument when the query exceeds the admission limits.
    void accumulate_upper_bounds(quantized_query const& query, std::span<std::uint32_t> bounds) const;

    [[nodiscard]] upper_bounds compute_upper_bounds(quantized_query const& query) const;

    /// Raw layout storage: exactly num_terms * num_blocks bytes, term-major.
    [[nodiscard]] std::span<std::uint8_t const> raw_values() const { return m_raw; }

    [[nodiscard]] compressed_term const& compressed_entry(term_id term) const
    {
        return m_compressed[term];
    }

    bool operator==(block_max_index const&) const = default;

    /// Assembles an index from deserialized parts; validates shape.
    [[nodiscard]] static block_max_index from_parts(
        std::uint32_t block_size,
        std::uint32_t num_blocks,
        std::uint64_t num_terms,
        bm_mode mode,
        std::vector<std::uint8_t> raw,
        std::vector<compressed_term> compressed);

private:
    std::uint32_t m_block_size = 0;
    std::uint32_t m_num_blocks = 0;
    std::uint64_t m_num_terms = 0;
    bm_mode m_mode = bm_mode::raw;
    std::vector<std::uint8_t> m_raw;
    std::vector<compressed_term> m_compressed;

    void accumulate_raw_term(term_id term, std::uint32_t weight, std::span<std::uint32_t> bounds) const;
    void accumulate_compressed_term(term_id term, std::uint32_t weight, std::span<std::uint32_t> bounds) const;
};

/// Builds the block-max structure from per-term posting lists (index = term
/// id, lists sorted by doc id). Throws corrupt_input_error on doc ids >= num_docs
/// or unsorted lists, std::invalid_argument on unsupported block sizes.
[[nodiscard]] block_max_index build_block_max(
    std::span<std::vector<posting> const> term_postings,
    std::uint64_t num_docs,
    std::uint32_t block_size,
    bm_mode mode);

}  // namespace bmp
