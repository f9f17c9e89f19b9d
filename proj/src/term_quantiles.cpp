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

#include "bmp/term_quantiles.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <string>

namespace bmp {

namespace {

    void validate_ranks(std::vector<std::uint32_t> const& ranks)
    {
        if (ranks.empty() || ranks.front() == 0
            || std::adjacent_find(ranks.begin(), ranks.end(), std::greater_equal<>{})
                != ranks.end()) {
            throw std::invalid_argument("quantile ranks must be positive and strictly ascending");
        }
    }

}  // namespace

term_quantiles term_quantiles::from_parts(
    std::vector<std::uint32_t> ranks, std::uint64_t num_terms, std::vector<quantized_impact> values)
{
    validate_ranks(ranks);
    if (values.size() != num_terms * ranks.size()) {
        throw corrupt_input_error("quantile payload has wrong shape");
    }
    term_quantiles quantiles;
    quantiles.m_ranks = std::move(ranks);
    quantiles.m_num_terms = num_terms;
    quantiles.m_values = std::move(values);
    return quantiles;
}

term_quantiles build_term_quantiles(
    std::span<std::vector<posting> const> term_postings, std::span<std::uint32_t const> ranks)
{
    std::vector<std::uint32_t> rank_vec(ranks.begin(), ranks.end());
    validate_ranks(rank_vec);
    auto num_terms = static_cast<std::uint64_t>(term_postings.size());
    std::vector<quantized_impact> values(num_terms * rank_vec.size(), 0);

    std::vector<quantized_impact> impacts;
    for (std::uint64_t term = 0; term < num_terms; ++term) {
        auto const& list = term_postings[term];
        impacts.clear();
        impacts.reserve(list.size());
        for (auto const& post: list) {
            impacts.push_back(post.impact);
        }
        std::sort(impacts.begin(), impacts.end(), std::greater<>{});
        for (std::size_t i = 0; i < rank_vec.size(); ++i) {
            auto rank = rank_vec[i];
            if (impacts.size() >= rank) {
                values[term * rank_vec.size() + i] = impacts[rank - 1];
            }
        }
    }
    return term_quantiles::from_parts(std::move(rank_vec), num_terms, std::move(values));
}

}  // namespace bmp
