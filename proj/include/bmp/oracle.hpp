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
#include <vector>

#include "bmp/core.hpp"

namespace bmp {

/// Integer dot product of a quantized document with a quantized query, both
/// sorted by term.
[[nodiscard]] std::uint32_t
score_document(quantized_document const& document, quantized_query const& query);

/// Exhaustive reference scorer: scores every document and returns the top k
/// under (score desc, doc asc). Documents scoring 0 are never returned. This
/// is a correctness instrument, deliberately free of any pruning machinery.
[[nodiscard]] top_k_result oracle_topk(
    std::vector<quantized_document> const& documents,
    quantized_query const& query,
    std::uint32_t k);

}  // namespace bmp
