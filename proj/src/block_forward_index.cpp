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

#include "bmp/block_forward_index.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <string>

#include "bmp/block_max_index.hpp"

namespace bmp {

block_forward_index build_block_forward(
    std::span<std::pair<doc_id, quantized_document> const> documents,
    std::uint64_t num_docs,
    std::uint32_t block_size)
{
    if (!block_max_index::supported_block_size(block_size)) {
        throw std::invalid_argument("unsupported block size " + std::to_string(block_size));
    }
    auto num_blocks = static_cast<std::uint32_t>((num_docs + block_size - 1) / block_size);

    // (term, local, impact) triples per block, then a counting pass per block
    // to lay out the directory.
    struct triple {
        term_id term;
        std::uint8_t local_doc;
        quantized_impact impact;
    };
    std::vector<std::vector<triple>> per_block(num_blocks);
    std::vector<bool> seen(num_docs, false);
    for (auto const& [doc, vector]: documents) {
        if (doc >= num_docs) {
            throw corrupt_input_error(
                "doc id " + std::to_string(doc) + " outside collection of "
                + std::to_string(num_docs));
        }
        if (seen[doc]) {
            throw corrupt_input_error("duplicate doc id " + std::to_string(doc));
        }
        seen[doc] = true;
        auto block = doc / block_size;
        auto local = static_cast<std::uint8_t>(doc % block_size);
        for (auto const& ti: vector) {
            if (ti.impact == 0) {
                throw corrupt_input_error(
                    "doc " + std::to_string(doc) + " stores a zero impact for term "
                    + std::to_string(ti.term));
            }
            per_block[block].push_back({ti.term, local, ti.impact});
        }
    }

    std::vector<block_forward_index::block_entry> blocks(num_blocks);
    for (std::uint32_t j = 0; j < num_blocks; ++j) {
        auto& triples = per_block[j];
        std::sort(triples.begin(), triples.end(), [](triple const& lhs, triple const& rhs) {
            if (lhs.term != rhs.term) {
                return lhs.term < rhs.term;
            }
            return lhs.local_doc < rhs.local_doc;
        });
        auto& entry = blocks[j];
        entry.offsets.push_back(0);
        for (auto const& t: triples) {
            if (entry.terms.empty() || entry.terms.back() != t.term) {
                if (!entry.terms.empty()) {
                    entry.offsets.push_back(static_cast<std::uint32_t>(entry.postings.size()));
                }
                entry.terms.push_back(t.term);
            }
            entry.postings.push_back({t.local_doc, t.impact});
        }
        entry.offsets.push_back(static_cast<std::uint32_t>(entry.postings.size()));
        if (entry.terms.empty()) {
            entry.offsets.assign(1, 0);
        }
    }

    return block_forward_index::from_parts(block_size, num_docs, std::move(blocks));
}

block_forward_index
build_block_forward(std::vector<quantized_document> const& documents, std::uint32_t block_size)
{
    std::vector<std::pair<doc_id, quantized_document>> pairs;
    pairs.reserve(documents.size());
    for (doc_id doc = 0; doc < documents.size(); ++doc) {
        pairs.emplace_back(doc, documents[doc]);
    }
    return build_block_forward(pairs, documents.size(), block_size);
}

block_forward_index block_forward_index::from_parts(
    std::uint32_t block_size, std::uint64_t num_docs, std::vector<block_entry> blocks)
{
    if (!block_max_index::supported_block_size(block_size)) {
        throw std::invalid_argument("unsupported block size " + std::to_string(block_size));
    }
    auto expected_blocks = (num_docs + block_size - 1) / block_size;
    if (blocks.size() != expected_blocks) {
        throw corrupt_input_error("block count does not match collection size");
    }
    for (auto const& entry: blocks) {
        if (entry.offsets.size() != entry.terms.size() + 1
            || entry.offsets.back() != entry.postings.size()
            || !std::is_sorted(entry.offsets.begin(), entry.offsets.end())) {
            throw corrupt_input_error("block directory offsets are inconsistent");
        }
        if (std::adjacent_find(entry.terms.begin(), entry.terms.end(), std::greater_equal<>{})
            != entry.terms.end()) {
            throw corrupt_input_error("block term directory is not strictly ascending");
        }
        for (auto const& posting: entry.postings) {
            if (posting.local_doc >= block_size || posting.impact == 0) {
                throw corrupt_input_error("block posting outside block bounds");
            }
        }
    }
    block_forward_index index;
    index.m_block_size = block_size;
    index.m_num_docs = num_docs;
    index.m_blocks = std::move(blocks);
    return index;
}

void block_forward_index::evaluate_block(
    std::uint32_t block_no,
    quantized_query const& query,
    std::span<std::uint32_t> accumulators,
    std::vector<hit>& out) const
{
    if (block_no >= m_blocks.size()) {
        throw std::invalid_argument("block " + std::to_string(block_no) + " out of range");
    }
    if (accumulators.size() < m_block_size) {
        throw std::invalid_argument("accumulator scratch smaller than block size");
    }
    std::fill_n(accumulators.begin(), m_block_size, 0U);
    out.clear();

    auto const& entry = m_blocks[block_no];
    // Linear merge of the sorted query with the sorted term directory; block
    // term lists are short.
    std::size_t qi = 0;
    std::size_t bi = 0;
    while (qi < query.entries.size() && bi < entry.terms.size()) {
        auto query_term = query.entries[qi].term;
        auto block_term = entry.terms[bi];
        if (query_term < block_term) {
            ++qi;
        } else if (block_term < query_term) {
            ++bi;
        } else {
            auto weight = query.entries[qi].weight;
            for (auto p = entry.offsets[bi]; p < entry.offsets[bi + 1]; ++p) {
                accumulators[entry.postings[p].local_doc] +=
                    weight * static_cast<std::uint32_t>(entry.postings[p].impact);
            }
            ++qi;
            ++bi;
        }
    }

    auto base = static_cast<doc_id>(block_no) * m_block_size;
    for (std::uint32_t local = 0; local < m_block_size; ++local) {
        if (accumulators[local] > 0) {
            out.push_back({base + local, accumulators[local]});
        }
    }
}

std::vector<hit>
block_forward_index::evaluate_block(std::uint32_t block_no, quantized_query const& query) const
{
    std::vector<std::uint32_t> accumulators(m_block_size, 0);
    std::vector<hit> out;
    evaluate_block(block_no, query, accumulators, out);
    return out;
}

std::vector<quantized_document> block_forward_index::reconstruct_documents() const
{
    std::vector<quantized_document> documents(m_num_docs);
    for (std::uint32_t j = 0; j < m_blocks.size(); ++j) {
        auto const& entry = m_blocks[j];
        auto base = static_cast<doc_id>(j) * m_block_size;
        for (std::size_t bi = 0; bi < entry.terms.size(); ++bi) {
            for (auto p = entry.offsets[bi]; p < entry.offsets[bi + 1]; ++p) {
                documents[base + entry.postings[p].local_doc].push_back(
                    {entry.terms[bi], entry.postings[p].impact});
            }
        }
    }
    for (auto& document: documents) {
        std::sort(document.begin(), document.end(), [](term_impact const& lhs, term_impact const& rhs) {
            return lhs.term < rhs.term;
        });
    }
    return documents;
}

}  // namespace bmp
