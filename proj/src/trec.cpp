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

#include "bmp/trec.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace bmp {

void write_run(
    std::ostream& out,
    std::string const& query_id,
    top_k_result const& result,
    std::vector<std::string> const& doc_names,
    std::string const& run_tag)
{
    std::uint32_t rank = 1;
    for (auto const& h: result.hits) {
        out << query_id << " Q0 " << doc_names.at(h.doc) << ' ' << rank << ' ' << h.score << ' '
            << run_tag << '\n';
        ++rank;
    }
}

trec_run read_run(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in) {
        throw corrupt_input_error("cannot open " + path.string());
    }
    struct ranked_doc {
        std::uint64_t rank;
        std::string name;
    };
    std::vector<std::pair<std::string, std::vector<ranked_doc>>> per_query;
    std::unordered_map<std::string, std::size_t> index_of;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) {
            continue;
        }
        std::istringstream fields(line);
        std::string qid;
        std::string q0;
        std::string doc;
        std::uint64_t rank = 0;
        double score = 0.0;
        std::string tag;
        if (!(fields >> qid >> q0 >> doc >> rank >> score >> tag)) {
            throw corrupt_input_error(
                path.filename().string() + " line " + std::to_string(line_no)
                + ": expected \"qid Q0 docname rank score runtag\"");
        }
        auto [it, inserted] = index_of.emplace(qid, per_query.size());
        if (inserted) {
            per_query.emplace_back(qid, std::vector<ranked_doc>{});
        }
        per_query[it->second].second.push_back({rank, doc});
    }

    trec_run run;
    run.reserve(per_query.size());
    for (auto& [qid, docs]: per_query) {
        std::stable_sort(docs.begin(), docs.end(), [](ranked_doc const& lhs, ranked_doc const& rhs) {
            return lhs.rank < rhs.rank;
        });
        std::vector<std::string> names;
        names.reserve(docs.size());
        for (auto& doc: docs) {
            names.push_back(std::move(doc.name));
        }
        run.emplace_back(qid, std::move(names));
    }
    return run;
}

std::unordered_map<std::string, std::unordered_set<std::string>>
read_qrels(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in) {
        throw corrupt_input_error("cannot open " + path.string());
    }
    std::unordered_map<std::string, std::unordered_set<std::string>> qrels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) {
            continue;
        }
        std::istringstream fields(line);
        std::string qid;
        std::string iteration;
        std::string doc;
        long long relevance = 0;
        if (!(fields >> qid >> iteration >> doc >> relevance)) {
            throw corrupt_input_error(
                path.filename().string() + " line " + std::to_string(line_no)
                + ": expected \"qid 0 docid relevance\"");
        }
        if (relevance > 0) {
            qrels[qid].insert(doc);
        }
    }
    return qrels;
}

}  // namespace bmp
