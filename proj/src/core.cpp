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

#include "bmp/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace bmp {

quantized_impact quantizer::quantize(double score) const
{
    if (!(score >= 0.0) || score > max_raw_score) {
        throw std::out_of_range(
            "score " + std::to_string(score) + " outside [0, " + std::to_string(max_raw_score)
            + "]");
    }
    if (score == 0.0) {
        return 0;
    }
    // Ceiling keeps quantized block maxima valid upper bounds on quantized
    // document contributions.
    double scaled = std::ceil(score / max_raw_score * static_cast<double>(levels));
    if (scaled < 1.0) {
        return 1;
    }
    if (scaled > static_cast<double>(levels)) {
        return static_cast<quantized_impact>(levels);
    }
    return static_cast<quantized_impact>(scaled);
}

quantizer fit_quantizer(double max_raw_score)
{
    if (!std::isfinite(max_raw_score) || max_raw_score <= 0.0) {
        throw std::invalid_argument(
            "quantizer requires a positive finite maximum score, got "
            + std::to_string(max_raw_score));
    }
    return quantizer{max_raw_score};
}

sparse_vector sparse_vector::from_entries(std::vector<entry> entries)
{
    for (auto const& e: entries) {
        if (!std::isfinite(e.weight) || e.weight < 0.0) {
            throw corrupt_input_error(
                "term " + std::to_string(e.term) + " has invalid weight "
                + std::to_string(e.weight));
        }
    }
    std::erase_if(entries, [](entry const& e) { return e.weight == 0.0; });
    std::sort(entries.begin(), entries.end(), [](entry const& lhs, entry const& rhs) {
        return lhs.term < rhs.term;
    });
    auto duplicate = std::adjacent_find(
        entries.begin(), entries.end(), [](entry const& lhs, entry const& rhs) {
            return lhs.term == rhs.term;
        });
    if (duplicate != entries.end()) {
        throw corrupt_input_error("duplicate term " + std::to_string(duplicate->term));
    }
    return sparse_vector{std::move(entries)};
}

quantized_query quantize_query(sparse_vector const& query, double scale)
{
    if (!std::isfinite(scale) || scale <= 0.0) {
        throw std::invalid_argument("query scale must be positive, got " + std::to_string(scale));
    }
    quantized_query quantized;
    quantized.entries.reserve(query.entries.size());
    for (auto const& e: query.entries) {
        auto product = e.weight * scale;
        if (product > static_cast<double>(std::numeric_limits<std::uint32_t>::max())) {
            throw std::invalid_argument(
                "scaled query weight overflows 32 bits: " + std::to_string(e.weight) + " * "
                + std::to_string(scale));
        }
        auto weight = static_cast<std::uint32_t>(std::max<long long>(1, std::llround(product)));
        quantized.entries.push_back({e.term, weight});
    }
    return quantized;
}

double default_query_scale(std::span<sparse_vector const> queries)
{
    for (auto const& query: queries) {
        for (auto const& e: query.entries) {
            if (e.weight != std::floor(e.weight)) {
                return 100.0;
            }
        }
    }
    return 1.0;
}

void validate_query_limits(quantized_query const& query)
{
    if (query.entries.size() > max_query_terms) {
        throw std::invalid_argument(
            "query has " + std::to_string(query.entries.size()) + " terms, limit is "
            + std::to_string(max_query_terms));
    }
    for (auto const& e: query.entries) {
        if (e.weight > max_query_weight) {
            throw std::invalid_argument(
                "query weight " + std::to_string(e.weight) + " exceeds limit "
                + std::to_string(max_query_weight));
        }
    }
}

void search_params::validate() const
{
    if (k < 1) {
        throw std::invalid_argument("k must be at least 1");
    }
    if (!std::isfinite(alpha) || alpha <= 0.0 || alpha > 1.0) {
        throw std::invalid_argument("alpha must lie in (0, 1], got " + std::to_string(alpha));
    }
    if (!std::isfinite(beta) || beta <= 0.0 || beta > 1.0) {
        throw std::invalid_argument("beta must lie in (0, 1], got " + std::to_string(beta));
    }
}

quantized_document quantize_document(sparse_vector const& vector, quantizer const& quant)
{
    quantized_document document;
    document.reserve(vector.entries.size());
    for (auto const& e: vector.entries) {
        document.push_back({e.term, quant.quantize(e.weight)});
    }
    return document;
}

std::vector<std::vector<posting>>
invert(std::vector<quantized_document> const& documents, std::uint64_t num_terms)
{
    std::vector<std::vector<posting>> lists(num_terms);
    for (doc_id doc = 0; doc < documents.size(); ++doc) {
        term_id previous = 0;
        bool first = true;
        for (auto const& ti: documents[doc]) {
            if (ti.term >= num_terms) {
                throw corrupt_input_error(
                    "document " + std::to_string(doc) + " references term "
                    + std::to_string(ti.term) + " outside vocabulary of "
                    + std::to_string(num_terms));
            }
            if (!first && ti.term <= previous) {
                throw corrupt_input_error(
                    "document " + std::to_string(doc) + " has unsorted or duplicate terms");
            }
            if (ti.impact == 0) {
                throw corrupt_input_error(
                    "document " + std::to_string(doc) + " stores a zero impact for term "
                    + std::to_string(ti.term));
            }
            lists[ti.term].push_back({doc, ti.impact});
            previous = ti.term;
            first = false;
        }
    }
    return lists;
}

}  // namespace bmp
