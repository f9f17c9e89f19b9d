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

#include "bmp/block_max_index.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "bmp/detail/bitpack.hpp"

namespace bmp {

namespace {

    std::uint32_t blocks_for(std::uint64_t num_docs, std::uint32_t block_size)
    {
        return static_cast<std::uint32_t>((num_docs + block_size - 1) / block_size);
    }

    block_max_index::compressed_term
    compress_term(std::span<std::pair<std::uint32_t, quantized_impact> const> blocks)
    {
        block_max_index::compressed_term term;
        term.count = static_cast<std::uint32_t>(blocks.size());
        if (blocks.empty()) {
            return term;
        }
        // Deltas: first block id as-is, then gap - 1 (ids strictly ascend).
        std::uint64_t max_delta = blocks.front().first;
        for (std::size_t i = 1; i < blocks.size(); ++i) {
            max_delta = std::max<std::uint64_t>(max_delta, blocks[i].first - blocks[i - 1].first - 1);
        }
        term.delta_bits = static_cast<std::uint8_t>(detail::bits_needed(max_delta));
        std::uint64_t bit_length = 0;
        term.data.reserve((blocks.size() * term.delta_bits + 7) / 8 + blocks.size());
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            std::uint64_t delta = i == 0 ? blocks[0].first : blocks[i].first - blocks[i - 1].first - 1;
            detail::append_bits(term.data, bit_length, delta, term.delta_bits);
        }
        for (auto const& [block, impact]: blocks) {
            term.data.push_back(impact);
        }
        return term;
    }

}  // namespace

block_max_index build_block_max(
    std::span<std::vector<posting> const> term_postings,
    std::uint64_t num_docs,
    std::uint32_t block_size,
    bm_mode mode)
{
    if (!block_max_index::supported_block_size(block_size)) {
        throw std::invalid_argument("unsupported block size " + std::to_string(block_size));
    }
    auto num_terms = static_cast<std::uint64_t>(term_postings.size());
    auto num_blocks = blocks_for(num_docs, block_size);

    std::vector<std::uint8_t> raw;
    std::vector<block_max_index::compressed_term> compressed;
    if (mode == bm_mode::raw) {
        raw.assign(num_terms * num_blocks, 0);
    } else {
        compressed.resize(num_terms);
    }

    std::vector<std::pair<std::uint32_t, quantized_impact>> term_blocks;
    for (std::uint64_t term = 0; term < num_terms; ++term) {
        term_blocks.clear();
        doc_id previous = 0;
        bool first = true;
        for (auto const& post: term_postings[term]) {
            if (post.doc >= num_docs) {
                throw corrupt_input_error(
                    "term " + std::to_string(term) + " posting doc " + std::to_string(post.doc)
                    + " outside collection of " + std::to_string(num_docs));
            }
            if (!first && post.doc <= previous) {
                throw corrupt_input_error(
                    "term " + std::to_string(term) + " posting list not sorted by doc id");
            }
            auto block = post.doc / block_size;
            if (!term_blocks.empty() && term_blocks.back().first == block) {
                term_blocks.back().second = std::max(term_blocks.back().second, post.impact);
            } else {
                term_blocks.emplace_back(block, post.impact);
            }
            previous = post.doc;
            first = false;
        }
        if (mode == bm_mode::raw) {
            auto* row = raw.data() + term * num_blocks;
            for (auto const& [block, impact]: term_blocks) {
                row[block] = impact;
            }
        } else {
            compressed[term] = compress_term(term_blocks);
        }
    }

    return block_max_index::from_parts(
        block_size, num_blocks, num_terms, mode, std::move(raw), std::move(compressed));
}

block_max_index block_max_index::from_parts(
    std::uint32_t block_size,
    std::uint32_t num_blocks,
    std::uint64_t num_terms,
    bm_mode mode,
    std::vector<std::uint8_t> raw,
    std::vector<compressed_term> compressed)
{
    if (!supported_block_size(block_size)) {
        throw std::invalid_argument("unsupported block size " + std::to_string(block_size));
    }
    if (mode == bm_mode::raw) {
        if (raw.size() != num_terms * num_blocks || !compressed.empty()) {
            throw corrupt_input_error("raw block-max payload has wrong shape");
        }
    } else {
        if (compressed.size() != num_terms || !raw.empty()) {
            throw corrupt_input_error("compressed block-max payload has wrong shape");
        }
    }
    block_max_index index;
    index.m_block_size = block_size;
    index.m_num_blocks = num_blocks;
    index.m_num_terms = num_terms;
    index.m_mode = mode;
    index.m_raw = std::move(raw);
    index.m_compressed = std::move(compressed);
    return index;
}

std::vector<quantized_impact> block_max_index::densify_term(term_id term) const
{
    std::vector<quantized_impact> row(m_num_blocks, 0);
    if (term >= m_num_terms) {
        return row;
    }
    if (m_mode == bm_mode::raw) {
        auto const* src = m_raw.data() + static_cast<std::uint64_t>(term) * m_num_blocks;
        std::copy_n(src, m_num_blocks, row.begin());
        return row;
    }
    auto const& entry = m_compressed[term];
    auto const* impacts = entry.data.data() + (static_cast<std::uint64_t>(entry.count) * entry.delta_bits + 7) / 8;
    std::uint64_t bit_position = 0;
    std::uint32_t block = 0;
    for (std::uint32_t i = 0; i < entry.count; ++i) {
        auto delta = static_cast<std::uint32_t>(
            detail::read_bits(entry.data.data(), bit_position, entry.delta_bits));
        bit_position += entry.delta_bits;
        block = i == 0 ? delta : block + delta + 1;
        row[block] = impacts[i];
    }
    return row;
}

void block_max_index::accumulate_raw_term(
    term_id term, std::uint32_t weight, std::span<std::uint32_t> bounds) const
{
    auto const* row = m_raw.data() + static_cast<std::uint64_t>(term) * m_num_blocks;
    auto* out = bounds.data();
    for (std::uint32_t j = 0; j < m_num_blocks; ++j) {
        out[j] += weight * static_cast<std::uint32_t>(row[j]);
    }
}

void block_max_index::accumulate_compressed_term(
    term_id term, std::uint32_t weight, std::span<std::uint32_t> bounds) const
{
    auto const& entry = m_compressed[term];
    if (entry.count == 0) {
        return;
    }
    auto const* impacts = entry.data.data() + (static_cast<std::uint64_t>(entry.count) * entry.delta_bits + 7) / 8;
    std::uint64_t bit_position = 0;
    std::uint32_t block = 0;
    for (std::uint32_t i = 0; i < entry.count; ++i) {
        auto delta = static_cast<std::uint32_t>(
            detail::read_bits(entry.data.data(), bit_position, entry.delta_bits));
        bit_position += entry.delta_bits;
        block = i == 0 ? delta : block + delta + 1;
        bounds[block] += weight * static_cast<std::uint32_t>(impacts[i]);
    }
}

void block_max_index::accumulate_upper_bounds(
    quantized_query const& query, std::span<std::uint32_t> bounds) const
{
    validate_query_limits(query);
    if (bounds.size() < m_num_blocks) {
        throw std::invalid_argument("upper-bound scratch smaller than num_blocks");
    }
    std::fill_n(bounds.begin(), m_num_blocks, 0U);
    for (auto const& e: query.entries) {
        if (e.term >= m_num_terms) {
            continue;  // out-of-vocabulary terms contribute nothing
        }
        if (m_mode == bm_mode::raw) {
            accumulate_raw_term(e.term, e.weight, bounds);
        } else {
            accumulate_compressed_term(e.term, e.weight, bounds);
        }
    }
}

upper_bounds block_max_index::compute_upper_bounds(quantized_query const& query) const
{
    upper_bounds bounds(m_num_blocks, 0);
    accumulate_upper_bounds(query, bounds);
    return bounds;
}

}  // namespace bmp
