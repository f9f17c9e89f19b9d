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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "bmp/core.hpp"

namespace bmp {

/// Per-term impacts at fixed ranks: the r-th largest quantized impact in the
/// term's posting list, 0 (absent) when the list holds fewer than r postings.
/// Backs the single-term top-k threshold estimator.
class term_quantiles {
public:
    static constexpr std::array<std::uint32_t, 3> default_ranks{10, 100, 1000};

    term_quantiles() = default;

    [[nodiscard]] std::span<std::uint32_t const> ranks() const { return m_ranks; }
    [[nodiscard]] std::uint64_t num_terms() const { return m_num_terms; }

    /// Impact at ranks()[rank_index] for `term`; 0 when absent or when the
    /// term is outside the vocabulary.
    [[nodiscard]] quantized_impact impact_at(term_id term, std::size_t rank_index) const
    {
        if (term >= m_num_terms) {
            return 0;
        }
        return m_values[static_cast<std::uint64_t>(term) * m_ranks.size() + rank_index];
    }

    bool operator==(term_quantiles const&) const = default;

    [[nodiscard]] static term_quantiles from_parts(
        std::vector<std::uint32_t> ranks, std::uint64_t num_terms, std::vector<quantized_impact> values);

private:
    std::vector<std::uint32_t> m_ranks;
    std::uint64_t m_num_terms = 0;
    /// num_terms * ranks.size() values, term-major.
    std::vector<quantized_impact> m_values;
};

/// Computes the rank-r impacts per term from posting lists (index = term id).
/// Ranks must be positive and strictly ascending.
[[nodiscard]] term_quantiles build_term_quantiles(
    std::span<std::vector<posting> const> term_postings,
    std::span<std::uint32_t const> ranks = term_quantiles::default_ranks);

}  // namespace bmp
