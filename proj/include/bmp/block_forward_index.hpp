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
#include <utility>
#include <vector>

#include "bmp/core.hpp"

namespace bmp {

/// Hybrid inverted/forward layout: per block of `block_size` consecutive doc
/// ids, a sorted term directory pointing into local posting lists of
/// (local doc, impact) pairs. Supported block sizes keep local ids within one
/// byte (log2(256) = 8 bits).
class block_forward_index {
public:
    struct local_posting {
        std::uint8_t local_doc;
        quantized_impact impact;
        bool operator==(local_posting const&) const = default;
    };

    struct block_entry {
        /// Strictly ascending terms occurring in this block.
        std::vector<term_id> terms;
        /// offsets[i]..offsets[i+1] delimit the postings of terms[i];
        /// size is terms.size() + 1.
        std::vector<std::uint32_t> offsets;
        /// Per-term lists sorted by local_doc ascending, impacts >= 1.
        std::vector<local_posting> postings;

        bool operator==(block_entry const&) const = default;
    };

    block_forward_index() = default;

    [[nodiscard]] std::uint32_t block_size() const { return m_block_size; }
    [[nodiscard]] std::uint32_t num_blocks() const { return static_cast<std::uint32_t>(m_blocks.size()); }
    [[nodiscard]] std::uint64_t num_docs() const { return m_num_docs; }
    [[nodiscard]] block_entry const& block(std::uint32_t block_no) const { return m_blocks[block_no]; }

    /// Scores every document of one block against the query: merges the
    /// sorted query with the block's sorted term directory and aggregates
    /// w * impact into `accumulators` (>= block_size() slots, zeroed here).
    /// Documents with positive score are appended to `out` in ascending doc
    /// order with exact, complete scores. Throws std::invalid_argument when
    /// block_no is out of range.
    void evaluate_block(
        std::uint32_t block_no,
        quantized_query const& query,
        std::span<std::uint32_t> accumulators,
        std::vector<hit>& out) const;

    [[nodiscard]] std::vector<hit>
    evaluate_block(std::uint32_t block_no, quantized_query const& query) const;

    /// Inverse of the build: the dense collection whose postings this index
    /// stores.
    [[nodiscard]] std::vector<quantized_document> reconstruct_documents() const;

    bool operator==(block_forward_index const&) const = default;

    [[nodiscard]] static block_forward_index from_parts(
        std::uint32_t block_size, std::uint64_t num_docs, std::vector<block_entry> blocks);

private:
    std::uint32_t m_block_size = 0;
    std::uint64_t m_num_docs = 0;
    std::vector<block_entry> m_blocks;
};

/// Builds the block-forward structure from (doc id, quantized document)
/// pairs; unnamed doc ids hold empty documents. Document d lands in block
/// d / block_size with local id d % block_size. Throws corrupt_input_error on
/// duplicate or out-of-range doc ids.
[[nodiscard]] block_forward_index build_block_forward(
    std::span<std::pair<doc_id, quantized_document> const> documents,
    std::uint64_t num_docs,
    std::uint32_t block_size);

/// Convenience overload for a dense collection (index = doc id).
[[nodiscard]] block_forward_index
build_block_forward(std::vector<quantized_document> const& documents, std::uint32_t block_size);

}  // namespace bmp
