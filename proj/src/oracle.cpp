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

#include "bmp/oracle.hpp"

#include <algorithm>

namespace bmp {

std::uint32_t score_document(quantized_document const& document, quantized_query const& query)
{
    std::uint32_t score = 0;
    std::size_t di = 0;
    std::size_t qi = 0;
    while (di < document.size() && qi < query.entries.size()) {
        if (document[di].term < query.entries[qi].term) {
            ++di;
        } else if (query.entries[qi].term < document[di].term) {
            ++qi;
        } else {
            score += query.entries[qi].weight * static_cast<std::uint32_t>(document[di].impact);
            ++di;
            ++qi;
        }
    }
    return score;
}

top_k_result oracle_topk(
    std::vector<quantized_document> const& documents,
    quantized_query const& query,
    std::uint32_t k)
{
    std::vector<hit> scored;
    for (doc_id doc = 0; doc < documents.size(); ++doc) {
        auto score = score_document(documents[doc], query);
        if (score > 0) {
            scored.push_back({doc, score});
        }
    }
    std::sort(scored.begin(), scored.end(), [](hit const& lhs, hit const& rhs) {
        return ranks_before(lhs, rhs);
    });
    if (scored.size() > k) {
        scored.resize(k);
    }
    return top_k_result{std::move(scored)};
}

}  // namespace bmp
