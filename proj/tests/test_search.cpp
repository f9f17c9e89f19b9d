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

#include <algorithm>
#include <random>
#include <thread>

#include <catch2/catch_amalgamated.hpp>

#include "bmp/oracle.hpp"
#include "bmp/search.hpp"

#include "support/synthetic.hpp"

using namespace bmp;

namespace {

quantized_query make_query(std::vector<quantized_query::entry> entries)
{
    quantized_query query;
    query.entries = std::move(entries);
    return query;
}

struct engine {
    block_max_index block_max;
    block_forward_index block_forward;
    term_quantiles quantiles;

    static engine
    build(std::vector<quantized_document> const& docs, std::uint64_t num_terms, std::uint32_t b, bm_mode mode)
    {
        auto postings = invert(docs, num_terms);
        return engine{
            build_block_max(postings, docs.size(), b, mode),
            build_block_forward(docs, b),
            build_term_quantiles(postings)};
    }
};

}  // namespace

TEST_CASE("prune_query_terms keeps the heaviest entries", "[search]")
{
    auto query = make_query({{1, 9}, {2, 1}, {3, 5}, {4, 5}});
    auto pruned = prune_query_terms(query, 0.5);
    REQUIRE(pruned == make_query({{1, 9}, {3, 5}}));  // term 3 beats term 4 on the tie

    CHECK(prune_query_terms(query, 1.0) == query);
    CHECK(prune_query_terms(make_query({{1, 9}}), 0.1) == make_query({{1, 9}}));
    CHECK(prune_query_terms(quantized_query{}, 0.5).empty());

    REQUIRE_THROWS_AS(prune_query_terms(query, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(prune_query_terms(query, 1.01), std::invalid_argument);
    REQUIRE_THROWS_AS(prune_query_terms(query, -0.5), std::invalid_argument);
}

TEST_CASE("pruned length is ceil(beta * |q|) and monotone in beta", "[search][property]")
{
    std::mt19937_64 rng(83);
    for (int round = 0; round < 50; ++round) {
        std::uniform_int_distribution<std::size_t> length(0, 40);
        std::vector<quantized_query::entry> entries;
        auto size = length(rng);
        for (term_id t = 0; t < size; ++t) {
            entries.push_back({t, static_cast<std::uint32_t>(1 + rng() % 200)});
        }
        auto query = make_query(std::move(entries));
        std::size_t previous = 0;
        for (int step = 1; step <= 10; ++step) {
            auto beta = step / 10.0;
            auto pruned = prune_query_terms(query, beta);
            auto expected = static_cast<std::size_t>(
                std::ceil(beta * static_cast<double>(query.size())));
            REQUIRE(pruned.size() == expected);
            REQUIRE(pruned.size() >= previous);
            REQUIRE(std::is_sorted(
                pruned.entries.begin(), pruned.entries.end(),
                [](auto const& a, auto const& b) { return a.term < b.term; }));
            previous = pruned.size();
        }
        REQUIRE(prune_query_terms(query, 1.0) == query);
    }
}

TEST_CASE("estimate_threshold uses single-term quantiles", "[search]")
{
    // term 0: ten postings whose 10th largest impact is 5;
    // term 1: ten postings whose 10th largest impact is 4;
    // term 2: three postings only.
    std::vector<std::vector<posting>> lists{
        {{0, 9}, {1, 8}, {2, 7}, {3, 6}, {4, 5}, {5, 5}, {6, 5}, {7, 5}, {8, 5}, {9, 5}},
        {{0, 4}, {1, 4}, {2, 4}, {3, 4}, {4, 4}, {5, 4}, {6, 4}, {7, 4}, {8, 4}, {9, 4}},
        {{0, 200}, {1, 150}, {2, 100}},
    };
    auto quantiles = build_term_quantiles(lists);

    CHECK(estimate_threshold(quantiles, make_query({{0, 2}}), 10) == 10);
    CHECK(estimate_threshold(quantiles, make_query({{2, 9}}), 10) == 0);  // list shorter than k
    CHECK(estimate_threshold(quantiles, make_query({{0, 2}, {1, 3}}), 10) == 12);  // max(10, 12)

    // Off-grid k rounds up to the next stored rank; past the largest rank the
    // estimator abstains.
    CHECK(estimate_threshold(quantiles, make_query({{0, 2}}), 7) == 10);
    CHECK(estimate_threshold(quantiles, make_query({{0, 2}}), 11) == 0);  // rank 100 absent
    CHECK(estimate_threshold(quantiles, make_query({{0, 2}}), 2000) == 0);
    CHECK(estimate_threshold(quantiles, quantized_query{}, 10) == 0);
}

TEST_CASE("estimated thresholds never exceed the true k-th score", "[search][property]")
{
    std::mt19937_64 rng(89);
    for (int round = 0; round < 20; ++round) {
        auto collection = testing::make_collection(400, 40, 8, rng());
        auto postings = invert(collection.documents, collection.num_terms);
        auto quantiles = build_term_quantiles(postings);
        auto queries = testing::quantize_queries(testing::make_queries(10, 40, 1, 12, rng()));
        for (auto const& query: queries) {
            for (std::uint32_t k: {10U, 37U, 100U, 1000U}) {
                auto tau = estimate_threshold(quantiles, query, k);
                if (tau == 0) {
                    continue;
                }
                auto exact = oracle_topk(collection.documents, query, k);
                REQUIRE(exact.size() >= k);  // tau > 0 guarantees k scoring docs
                REQUIRE(exact.hits[k - 1].score >= tau);
            }
        }
    }
}

TEST_CASE("partial_sort_blocks selects and orders candidates", "[search]")
{
    std::vector<std::uint32_t> bounds{5, 9, 9, 2};
    auto queue = partial_sort_blocks(bounds, 4);
    REQUIRE(queue == std::vector<block_candidate>{{1, 9}, {2, 9}, {0, 5}});

    std::vector<std::uint32_t> zeros{0, 0};
    CHECK(partial_sort_blocks(zeros, 0).empty());  // zero bounds are never candidates

    std::vector<std::uint32_t> below{7};
    CHECK(partial_sort_blocks(below, 8).empty());
}

TEST_CASE("partial_sort_blocks equals a comparison sort", "[search][property]")
{
    std::mt19937_64 rng(97);
    for (int round = 0; round < 200; ++round) {
        std::uniform_int_distribution<std::size_t> length(0, 2000);
        // Mix narrow ranges (counting path) and full-width values (fallback).
        bool wide = round % 3 == 0;
        std::uniform_int_distribution<std::uint32_t> value(
            0, wide ? std::numeric_limits<std::uint32_t>::max() : 50);
        std::vector<std::uint32_t> bounds(length(rng));
        for (auto& b: bounds) {
            b = value(rng);
        }
        std::uniform_int_distribution<std::uint32_t> threshold_dist(0, wide ? 1U << 30 : 60);
        auto threshold = threshold_dist(rng);

        std::vector<block_candidate> expected;
        for (std::uint32_t j = 0; j < bounds.size(); ++j) {
            if (bounds[j] >= threshold && bounds[j] > 0) {
                expected.push_back({j, bounds[j]});
            }
        }
        std::sort(expected.begin(), expected.end(), [](auto const& a, auto const& b) {
            if (a.bound != b.bound) {
                return a.bound > b.bound;
            }
            return a.block < b.block;
        });
        REQUIRE(partial_sort_blocks(bounds, threshold) == expected);
    }
}

TEST_CASE("top_k_heap maintains the k best under the tie-break order", "[search]")
{
    top_k_heap heap(2);
    CHECK(heap.threshold() == 0);
    heap.insert({5, 10});
    CHECK(heap.threshold() == 0);  // not full yet
    heap.insert({3, 20});
    CHECK(heap.threshold() == 10);
    heap.insert({9, 15});
    CHECK(heap.threshold() == 15);
    heap.insert({1, 15});  // ties with doc 9; doc 1 ranks before
    auto result = heap.take_sorted();
    REQUIRE(result.hits == std::vector<hit>{{3, 20}, {1, 15}});
}

TEST_CASE("search matches the two-block hand trace", "[search]")
{
    std::vector<quantized_document> docs(16);
    docs[0] = {{0, 3}};
    docs[8] = {{0, 7}};
    auto built = engine::build(docs, 1, 8, bm_mode::raw);
    searcher runner(built.block_max, built.block_forward, built.quantiles);

    auto query = make_query({{0, 1}});

    search_stats stats;
    auto result = runner.search(query, search_params{1, 1.0, 1.0}, &stats);
    REQUIRE(result.hits == std::vector<hit>{{8, 7}});
    CHECK(stats.blocks_total == 2);
    CHECK(stats.blocks_candidates == 2);
    CHECK(stats.blocks_evaluated == 1);  // theta=7 > 1.0 * 3 skips block 0

    // A relaxation cannot change a run that already stopped safely.
    search_stats relaxed_stats;
    auto relaxed = runner.search(query, search_params{1, 0.4, 1.0}, &relaxed_stats);
    REQUIRE(relaxed == result);
    CHECK(relaxed_stats.blocks_evaluated == stats.blocks_evaluated);
}

TEST_CASE("search validates inputs", "[search]")
{
    std::vector<quantized_document> docs(8);
    docs[0] = {{0, 3}};
    auto built = engine::build(docs, 1, 8, bm_mode::raw);
    searcher runner(built.block_max, built.block_forward, built.quantiles);

    REQUIRE_THROWS_AS(
        runner.search(make_query({{0, 1}}), search_params{10, 2.0, 1.0}), std::invalid_argument);

    // Indexes built with different block sizes cannot be paired.
    auto other = engine::build(docs, 1, 16, bm_mode::raw);
    REQUIRE_THROWS_AS(
        searcher(built.block_max, other.block_forward, built.quantiles), std::invalid_argument);

    // Queries matching nothing return an empty result, not an error.
    auto empty = runner.search(quantized_query{}, search_params{10, 1.0, 1.0});
    CHECK(empty.empty());
    auto unknown = runner.search(make_query({{55, 3}}), search_params{10, 1.0, 1.0});
    CHECK(unknown.empty());
}

TEST_CASE("safe mode equals the exhaustive oracle", "[search][property]")
{
    std::mt19937_64 rng(101);
    for (int round = 0; round < 12; ++round) {
        std::uniform_int_distribution<std::uint32_t> doc_count(1, 400);
        auto num_docs = doc_count(rng);
        auto collection = testing::make_collection(num_docs, 50, 6, rng());
        auto queries = testing::quantize_queries(testing::make_queries(8, 50, 1, 12, rng()));
        for (auto mode: {bm_mode::raw, bm_mode::compressed}) {
            for (std::uint32_t block_size: {8U, 64U, 256U}) {
                auto built = engine::build(collection.documents, collection.num_terms, block_size, mode);
                searcher runner(built.block_max, built.block_forward, built.quantiles);
                for (auto const& query: queries) {
                    for (std::uint32_t k: {1U, 3U, 10U, 100U}) {
                        auto result = runner.search(query, search_params{k, 1.0, 1.0});
                        REQUIRE(result == oracle_topk(collection.documents, query, k));
                    }
                }
            }
        }
    }
}

TEST_CASE("blocks below the estimated threshold hold no competitive documents", "[search][property]")
{
    std::mt19937_64 rng(103);
    auto collection = testing::make_collection(600, 40, 8, 107);
    auto built = engine::build(collection.documents, collection.num_terms, 16, bm_mode::raw);
    auto queries = testing::quantize_queries(testing::make_queries(20, 40, 2, 10, rng()));
    for (auto const& query: queries) {
        auto bounds = built.block_max.compute_upper_bounds(query);
        auto tau = estimate_threshold(built.quantiles, query, 10);
        for (std::uint32_t j = 0; j < bounds.size(); ++j) {
            if (bounds[j] >= tau && bounds[j] > 0) {
                continue;  // candidate, not excluded
            }
            for (auto const& h: built.block_forward.evaluate_block(j, query)) {
                REQUIRE(h.score <= tau);
            }
        }
    }
}

TEST_CASE("evaluated block count is non-decreasing in alpha", "[search][property]")
{
    std::mt19937_64 rng(109);
    auto collection = testing::make_collection(2000, 60, 8, 113);
    auto built = engine::build(collection.documents, collection.num_terms, 32, bm_mode::raw);
    searcher runner(built.block_max, built.block_forward, built.quantiles);
    auto queries = testing::quantize_queries(testing::make_queries(25, 60, 2, 12, rng()));
    for (auto const& query: queries) {
        std::uint32_t previous = 0;
        top_k_result at_alpha_one;
        for (double alpha: {0.4, 0.6, 0.75, 0.85, 1.0}) {
            search_stats stats;
            auto result = runner.search(query, search_params{10, alpha, 1.0}, &stats);
            REQUIRE(stats.blocks_evaluated >= previous);
            previous = stats.blocks_evaluated;
            at_alpha_one = std::move(result);
        }
        REQUIRE(at_alpha_one == oracle_topk(collection.documents, query, 10));
    }
}

TEST_CASE("beta = 1 reproduces the unpruned execution", "[search][property]")
{
    // Hand-rolled safe driver with no pruning step at all.
    auto unpruned_search = [](engine const& built, quantized_query const& query, std::uint32_t k) {
        auto bounds = built.block_max.compute_upper_bounds(query);
        auto tau = estimate_threshold(built.quantiles, query, k);
        auto queue = partial_sort_blocks(bounds, tau);
        top_k_heap heap(k);
        std::vector<std::uint32_t> accumulators(built.block_forward.block_size());
        std::vector<hit> scored;
        for (auto const& candidate: queue) {
            if (heap.threshold() > candidate.bound) {
                break;
            }
            built.block_forward.evaluate_block(candidate.block, query, accumulators, scored);
            for (auto const& h: scored) {
                heap.insert(h);
            }
        }
        return heap.take_sorted();
    };

    std::mt19937_64 rng(127);
    auto collection = testing::make_collection(800, 50, 6, 131);
    auto built = engine::build(collection.documents, collection.num_terms, 16, bm_mode::compressed);
    searcher runner(built.block_max, built.block_forward, built.quantiles);
    auto queries = testing::quantize_queries(testing::make_queries(20, 50, 2, 14, rng()));
    for (auto const& query: queries) {
        REQUIRE(runner.search(query, search_params{10, 1.0, 1.0}) == unpruned_search(built, query, 10));
    }
}

TEST_CASE("max_blocks caps evaluation", "[search]")
{
    auto collection = testing::make_collection(500, 30, 6, 137);
    auto built = engine::build(collection.documents, collection.num_terms, 8, bm_mode::raw);
    searcher runner(built.block_max, built.block_forward, built.quantiles);
    auto query = testing::quantize_queries(testing::make_queries(1, 30, 4, 8, 139)).front();

    search_params capped{10, 1.0, 1.0};
    capped.max_blocks = 3;
    search_stats stats;
    (void)runner.search(query, capped, &stats);
    REQUIRE(stats.blocks_evaluated <= 3);

    capped.max_blocks = 0;
    auto nothing = runner.search(query, capped, &stats);
    CHECK(stats.blocks_evaluated == 0);
    CHECK(nothing.empty());
}

TEST_CASE("an empty collection searches cleanly", "[search]")
{
    std::vector<quantized_document> docs;
    auto built = engine::build(docs, 0, 64, bm_mode::raw);
    searcher runner(built.block_max, built.block_forward, built.quantiles);
    CHECK(runner.search(make_query({{0, 5}}), search_params{10, 1.0, 1.0}).empty());
    CHECK(runner.search(quantized_query{}, search_params{10, 0.5, 0.5}).empty());
}

TEST_CASE("identical inputs give identical results across threads", "[search]")
{
    auto collection = testing::make_collection(3000, 80, 10, 149);
    auto built = engine::build(collection.documents, collection.num_terms, 64, bm_mode::raw);
    auto queries = testing::quantize_queries(testing::make_queries(40, 80, 2, 20, 151));

    search_params params{10, 0.8, 0.6};
    std::vector<top_k_result> serial;
    {
        searcher runner(built.block_max, built.block_forward, built.quantiles);
        for (auto const& query: queries) {
            serial.push_back(runner.search(query, params));
        }
    }

    std::vector<std::vector<top_k_result>> parallel(4);
    std::vector<std::thread> threads;
    for (auto& slot: parallel) {
        threads.emplace_back([&built, &queries, &params, &slot] {
            searcher runner(built.block_max, built.block_forward, built.quantiles);
            for (auto const& query: queries) {
                slot.push_back(runner.search(query, params));
            }
        });
    }
    for (auto& thread: threads) {
        thread.join();
    }
    for (auto const& slot: parallel) {
        REQUIRE(slot == serial);
    }
}
