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
#include <ostream>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "bmp/core.hpp"

namespace bmp {

/// Per-query measurement sample.
struct query_metrics {
    double rr_at_k = 0.0;
    double overlap_at_k = 0.0;
    std::uint64_t latency_ns = 0;
    std::uint32_t blocks_evaluated = 0;
    std::uint32_t blocks_total = 0;
};

/// 1/r for the 1-based rank r of the first relevant name within the top k,
/// 0 when none appears.
[[nodiscard]] double reciprocal_rank(
    std::span<std::string const> ranked_names,
    std::unordered_set<std::string> const& relevant,
    std::uint32_t k);

/// Overload mapping result doc ids through the doc-name lexicon.
[[nodiscard]] double reciprocal_rank(
    top_k_result const& result,
    std::vector<std::string> const& doc_names,
    std::unordered_set<std::string> const& relevant,
    std::uint32_t k);

/// |approx ∩ exact| / max(1, |exact|) over the top-k doc ids of each side.
[[nodiscard]] double
overlap(top_k_result const& approx, top_k_result const& exact, std::uint32_t k);

struct metrics_summary {
    double mean_rr = 0.0;
    double mean_overlap = 0.0;
    double mean_latency_ns = 0.0;
    std::uint64_t median_latency_ns = 0;
    std::uint64_t p95_latency_ns = 0;
    std::uint64_t p99_latency_ns = 0;
    double mean_evaluated_fraction = 0.0;
};

/// Arithmetic means for RR/overlap/fraction; nearest-rank order statistics
/// (rank = ceil(p * N), no interpolation) for latency. Throws
/// std::invalid_argument on empty input.
[[nodiscard]] metrics_summary aggregate(std::span<query_metrics const> metrics);

/// CSV suitable for plotting trade-off curves; one row per configuration.
void write_csv_header(std::ostream& out);
void write_csv_row(
    std::ostream& out,
    std::uint32_t block_size,
    double alpha,
    double beta,
    std::uint32_t k,
    metrics_summary const& summary);

}  // namespace bmp
