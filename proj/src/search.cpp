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

#include "bmp/search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bmp {

namespace {

    // Max bucket span for the counting sort; pathological weight/bound
    // combinations fall back to a comparison sort with bounded memory.
    constexpr std::uint64_t max_counting_buckets = std::uint64_t{1} << 20;

    bool candidate_before(block_candidate const& lhs, block_candidate const& rhs)
    {
        if (lhs.bound != rhs.bound) {
            return lhs.bound > rhs.bound;
        }
        return lhs.block < rhs.block;
    }

}  // namespace

quantized_query prune_query_terms(quantized_query const& query, double beta)
{
    if (!std::isfinite(beta) || beta <= 0.0 || beta > 1.0) {
        throw std::invalid_argument("beta must lie in (0, 1], got " + std::to_string(beta));
    }
    if (beta == 1.0 || query.empty()) {
        return query;
    }
    auto keep = static_cast<std::size_t>(
        std::ceil(beta * static_cast<double>(query.entries.size())));

    auto pruned = query;
    // Highest weights first, weight ties keep the smaller term id.
    std::sort(pruned.entries.begin(), pruned.entries.end(), [](auto const& lhs, auto const& rhs) {
        if (lhs.weight != rhs.weight) {
            return lhs.weight > rhs.weight;
        }
        return lhs.term < rhs.term;
    });
    pruned.entries.resize(keep);
    std::sort(pruned.entries.begin(), pruned.entries.end(), [](auto const& lhs, auto const& rhs) {
        return lhs.term < rhs.term;
    });
    return pruned;
}

std::uint32_t
estimate_threshold(term_quantiles const& quantiles, quantized_query const& query, std::uint32_t k)
{
    auto ranks = quantiles.ranks();
    std::uint32_t estimate = 0;
    for (auto const& e: query.entries) {
        for (std::size_t i = 0; i < ranks.size(); ++i) {
            if (ranks[i] < k) {
                continue;
            }
            auto impact = quantiles.impact_at(e.term, i);
            if (impact > 0) {
                // >= ranks[i] >= k documents score at least w * impact on
                // this term alone.
                estimate = std::max(estimate, e.weight * static_cast<std::uint32_t>(impact));
                break;
            }
        }
    }
    return estimate;
}

void partial_sort_blocks(
    std::span<std::uint32_t const> bounds, std::uint32_t threshold, std::vector<block_candidate>& out)
{
    out.clear();
    auto low = std::max<std::uint32_t>(threshold, 1);
    std::uint32_t max_bound = 0;
    std::size_t candidates = 0;
    for (auto bound: bounds) {
        if (bound >= low) {
            max_bound = std::max(max_bound, bound);
            ++candidates;
        }
    }
    if (candidates == 0) {
        return;
    }
    out.reserve(candidates);

    auto buckets = static_cast<std::uint64_t>(max_bound) - low + 1;
    if (buckets > max_counting_buckets) {
        for (std::uint32_t j = 0; j < bounds.size(); ++j) {
            if (bounds[j] >= low) {
                out.push_back({j, bounds[j]});
            }
        }
        std::sort(out.begin(), out.end(), candidate_before);
        return;
    }

    // Counting sort: bucket b holds count of candidates with bound low + b;
    // start offsets assign descending bounds, ascending block ids within one
    // bound.
    std::vector<std::uint32_t> counts(buckets, 0);
    for (auto bound: bounds) {
        if (bound >= low) {
            ++counts[bound - low];
        }
    }
    std::vector<std::uint32_t> starts(buckets, 0);
    std::uint32_t running = 0;
    for (std::uint64_t b = buckets; b-- > 0;) {
        starts[b] = running;
        running += counts[b];
    }
    out.resize(candidates);
    for (std::uint32_t j = 0; j < bounds.size(); ++j) {
        if (bounds[j] >= low) {
            out[starts[bounds[j] - low]++] = {j, bounds[j]};
        }
    }
}

std::vector<block_candidate>
partial_sort_blocks(std::span<std::uint32_t const> bounds, std::uint32_t threshold)
{
    std::vector<block_candidate> out;
    partial_sort_blocks(bounds, threshold, out);
    return out;
}

top_k_heap::top_k_heap(std::uint32_t k): m_k(k)
{
    if (k < 1) {
        throw std::invalid_argument("k must be at least 1");
    }
    m_entries.reserve(std::min<std::size_t>(std::size_t{k} + 1, 4096));
}

namespace {
    // std::push_heap keeps the comparator's "largest" at the front; ordering
    // by ranks_before puts the worst held hit there.
    bool worst_first(hit const& lhs, hit const& rhs) { return ranks_before(lhs, rhs); }
}  // namespace

std::uint32_t top_k_heap::threshold() const
{
    return m_entries.size() < m_k ? 0 : m_entries.front().score;
}

bool top_k_heap::would_enter(hit const& candidate) const
{
    return m_entries.size() < m_k || ranks_before(candidate, m_entries.front());
}

void top_k_heap::insert(hit const& candidate)
{
    if (!would_enter(candidate)) {
        return;
    }
    m_entries.push_back(candidate);
    std::push_heap(m_entries.begin(), m_entries.end(), worst_first);
    if (m_entries.size() > m_k) {
        std::pop_heap(m_entries.begin(), m_entries.end(), worst_first);
        m_entries.pop_back();
    }
}

top_k_result top_k_heap::take_sorted()
{
    top_k_result result;
    result.hits = std::move(m_entries);
    m_entries.clear();
    std::sort(result.hits.begin(), result.hits.end(), [](hit const& lhs, hit const& rhs) {
        return ranks_before(lhs, rhs);
    });
    return result;
}

searcher::searcher(
    block_max_index const& block_max,
    block_forward_index const& block_forward,
    term_quantiles const& quantiles)
    : m_block_max(&block_max), m_block_forward(&block_forward), m_quantiles(&quantiles)
{
    if (block_max.block_size() != block_forward.block_size()
        || block_max.num_blocks() != block_forward.num_blocks()
        || block_max.num_terms() != quantiles.num_terms()) {
        throw std::invalid_argument("mismatched index parameters");
    }
    m_bounds.resize(block_max.num_blocks());
    m_accumulators.resize(block_forward.block_size());
}

top_k_result
searcher::search(quantized_query const& query, search_params const& params, search_stats* stats)
{
    params.validate();
    validate_query_limits(query);

    auto pruned = prune_query_terms(query, params.beta);
    m_block_max->accumulate_upper_bounds(pruned, m_bounds);
    auto tau = estimate_threshold(*m_quantiles, pruned, params.k);
    partial_sort_blocks(m_bounds, tau, m_queue);

    top_k_heap heap(params.k);
    std::uint32_t evaluated = 0;
    for (auto const& candidate: m_queue) {
        if (params.max_blocks && evaluated >= *params.max_blocks) {
            break;
        }
        // Stop once the running top-k threshold exceeds the alpha-adjusted
        // bound of the next block; strict comparison keeps ties exact at
        // alpha = 1.
        if (static_cast<double>(heap.threshold())
            > params.alpha * static_cast<double>(candidate.bound)) {
            break;
        }
        m_block_forward->evaluate_block(candidate.block, pruned, m_accumulators, m_scored);
        for (auto const& scored: m_scored) {
            heap.insert(scored);
        }
        ++evaluated;
    }

    if (stats != nullptr) {
        stats->blocks_total = m_block_forward->num_blocks();
        stats->blocks_candidates = static_cast<std::uint32_t>(m_queue.size());
        stats->blocks_evaluated = evaluated;
        stats->threshold_estimate = tau;
    }
    return heap.take_sorted();
}

top_k_result search(
    block_max_index const& block_max,
    block_forward_index const& block_forward,
    term_quantiles const& quantiles,
    quantized_query const& query,
    search_params const& params,
    search_stats* stats)
{
    searcher instance(block_max, block_forward, quantiles);
    return instance.search(query, params, stats);
}

}  // namespace bmp
