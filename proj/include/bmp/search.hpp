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

#include "bmp/block_forward_index.hpp"
#include "bmp/block_max_index.hpp"
#include "bmp/core.hpp"
#include "bmp/term_quantiles.hpp"

namespace bmp {

/// Keeps the ceil(beta * |q|) highest-weight query entries (weight ties keep
/// the smaller term id) and re-sorts by term. beta = 1 returns the query
/// unchanged. Throws std::invalid_argument for beta outside (0, 1].
[[nodiscard]] quantized_query prune_query_terms(quantized_query const& query, double beta);

/// Lower bound on the k-th highest query score from single-term quantiles:
/// max over query entries (t, w) of w * impact@r(t), where r is the smallest
/// stored rank >= k for which the term has a quantile. Terms without such a
/// quantile contribute 0; a zero return carries no guarantee.
[[nodiscard]] std::uint32_t
estimate_threshold(term_quantiles const& quantiles, quantized_query const& query, std::uint32_t k);

struct block_candidate {
    std::uint32_t block;
    std::uint32_t bound;
    bool operator==(block_candidate const&) const = default;
};

/// Selects exactly the blocks with bounds[j] >= threshold and bounds[j] > 0,
/// ordered (bound descending, block ascending). Counting sort over
/// [threshold, max bound]; ranges wider than 2^20 buckets fall back to a
/// comparison sort.
void partial_sort_blocks(
    std::span<std::uint32_t const> bounds, std::uint32_t threshold, std::vector<block_candidate>& out);

[[nodiscard]] std::vector<block_candidate>
partial_sort_blocks(std::span<std::uint32_t const> bounds, std::uint32_t threshold);

/// Bounded min-structure over hits under the (score desc, doc asc) order.
class top_k_heap {
public:
    explicit top_k_heap(std::uint32_t k);

    /// Current k-th best score; 0 while fewer than k hits are held.
    [[nodiscard]] std::uint32_t threshold() const;
    [[nodiscard]] bool would_enter(hit const& candidate) const;
    void insert(hit const& candidate);
    [[nodiscard]] std::size_t size() const { return m_entries.size(); }

    /// Extracts the held hits sorted by ranks_before; the heap empties.
    [[nodiscard]] top_k_result take_sorted();

private:
    std::uint32_t m_k;
    /// Heap ordered with the worst held hit at the front.
    std::vector<hit> m_entries;
};

struct search_stats {
    std::uint32_t blocks_total = 0;
    std::uint32_t blocks_candidates = 0;
    std::uint32_t blocks_evaluated = 0;
    std::uint32_t threshold_estimate = 0;
};

/// Executes one query over the shared immutable indexes. Each searcher owns
/// private scratch (bounds, accumulators, candidate queue, heap storage), so
/// use one instance per thread; distinct instances may run concurrently.
class searcher {
public:
    searcher(
        block_max_index const& block_max,
        block_forward_index const& block_forward,
        term_quantiles const& quantiles);

    /// Full pipeline: beta pruning, upper bounds, threshold estimate,
    /// partial block sort, block-at-a-time evaluation with the alpha-adjusted
    /// stop test (stop once threshold > alpha * next bound). With alpha = 1
    /// and beta = 1 the result equals the exhaustive top-k exactly.
    [[nodiscard]] top_k_result
    search(quantized_query const& query, search_params const& params, search_stats* stats = nullptr);

private:
    block_max_index const* m_block_max;
    block_forward_index const* m_block_forward;
    term_quantiles const* m_quantiles;
    std::vector<std::uint32_t> m_bounds;
    std::vector<std::uint32_t> m_accumulators;
    std::vector<block_candidate> m_queue;
    std::vector<hit> m_scored;
};

/// One-shot convenience wrapper around searcher.
[[nodiscard]] top_k_result search(
    block_max_index const& block_max,
    block_forward_index const& block_forward,
    term_quantiles const& quantiles,
    quantized_query const& query,
    search_params const& params,
    search_stats* stats = nullptr);

}  // namespace bmp
