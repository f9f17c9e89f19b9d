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

#include <filesystem>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "bmp/core.hpp"

namespace bmp {

/// Appends one TREC run block: "qid Q0 docname rank score runtag", ranks
/// 1-based, scores printed as the integer quantized score.
void write_run(
    std::ostream& out,
    std::string const& query_id,
    top_k_result const& result,
    std::vector<std::string> const& doc_names,
    std::string const& run_tag);

/// Ranked doc names per query, in first-seen query order.
using trec_run = std::vector<std::pair<std::string, std::vector<std::string>>>;

[[nodiscard]] trec_run read_run(std::filesystem::path const& path);

/// Relevant doc names per query from 4-column qrels ("qid 0 docid rel");
/// only judgments with relevance > 0 count. Malformed lines raise
/// corrupt_input_error naming the line number.
[[nodiscard]] std::unordered_map<std::string, std::unordered_set<std::string>>
read_qrels(std::filesystem::path const& path);

}  // namespace bmp
