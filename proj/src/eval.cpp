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

#include "bmp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace bmp {

double reciprocal_rank(
    std::span<std::string const> ranked_names,
    std::unordered_set<std::string> const& relevant,
    std::uint32_t k)
{
    if (k < 1) {
        throw std::invalid_argument("k must be at least 1");
    }
    auto cutoff = std::min<std::size_t>(ranked_names.size(), k);
    for (std::size_t i = 0; i < cutoff; ++i) {
        if (relevant.contains(ranked_names[i])) {
            return 1.0 / static_cast<double>(i + 1);
        }
    }
    return 0.0;
}

double reciprocal_rank(
    top_k_result const& result,
    std::vector<std::string> const& doc_names,
    std::unordered_set<std::string> const& relevant,
    std::uint32_t k)
{
    std::vector<std::string> names;
    names.reserve(result.hits.size());
    for (auto const& h: result.hits) {
        names.push_back(doc_names.at(h.doc));
    }
    return reciprocal_rank(names, relevant, k);
}

double overlap(top_k_result const& approx, top_k_result const& exact, std::uint32_t k)
{
    std::unordered_set<doc_id> exact_docs;
    std::size_t exact_count = std::min<std::size_t>(exact.hits.size(), k);
    for (std::size_t i = 0; i < exact_count; ++i) {
        exact_docs.insert(exact.hits[i].doc);
    }
    std::size_t shared = 0;
    std::size_t approx_count = std::min<std::size_t>(approx.hits.size(), k);
    for (std::size_t i = 0; i < approx_count; ++i) {
        if (exact_docs.contains(approx.hits[i].doc)) {
            ++shared;
        }
    }
    return static_cast<double>(shared) / static_cast<double>(std::max<std::size_t>(1, exact_count));
}

namespace {

    std::uint64_t nearest_rank(std::vector<std::uint64_t> const& sorted, double percentile)
    {
        auto rank = static_cast<std::size_t>(
            std::ceil(percentile * static_cast<double>(sorted.size())));
        rank = std::max<std::size_t>(rank, 1);
        return sorted[rank - 1];
    }

}  // namespace

metrics_summary aggregate(std::span<query_metrics const> metrics)
{
    if (metrics.empty()) {
        throw std::invalid_argument("cannot aggregate an empty metrics sequence");
    }
    metrics_summary summary;
    std::vector<std::uint64_t> latencies;
    latencies.reserve(metrics.size());
    for (auto const& m: metrics) {
        summary.mean_rr += m.rr_at_k;
        summary.mean_overlap += m.overlap_at_k;
        summary.mean_latency_ns += static_cast<double>(m.latency_ns);
        summary.mean_evaluated_fraction += static_cast<double>(m.blocks_evaluated)
            / static_cast<double>(std::max<std::uint32_t>(1, m.blocks_total));
        latencies.push_back(m.latency_ns);
    }
    auto count = static_cast<double>(metrics.size());
    summary.mean_rr /= count;
    summary.mean_overlap /= count;
    summary.mean_latency_ns /= count;
    summary.mean_evaluated_fraction /= count;

    std::sort(latencies.begin(), latencies.end());
    summary.median_latency_ns = nearest_rank(latencies, 0.50);
    summary.p95_latency_ns = nearest_rank(latencies, 0.95);
    summary.p99_latency_ns = nearest_rank(latencies, 0.99);
    return summary;
}

void write_csv_header(std::ostream& out)
{
    out << "b,alpha,beta,k,mean_rr,mean_overlap,mrt_ms,p95_ms,evaluated_block_fraction\n";
}

void write_csv_row(
    std::ostream& out,
    std::uint32_t block_size,
    double alpha,
    double beta,
    std::uint32_t k,
    metrics_summary const& summary)
{
    out << block_size << ',' << alpha << ',' << beta << ',' << k << ',' << summary.mean_rr << ','
        << summary.mean_overlap << ',' << summary.mean_latency_ns / 1e6 << ','
        << static_cast<double>(summary.p95_latency_ns) / 1e6 << ','
        << summary.mean_evaluated_fraction << '\n';
}

}  // namespace bmp
