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
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bmp/block_forward_index.hpp"
#include "bmp/block_max_index.hpp"
#include "bmp/core.hpp"
#include "bmp/term_quantiles.hpp"

namespace bmp {

class storage_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class bad_magic_error final : public storage_error {
public:
    using storage_error::storage_error;
};

class bad_version_error final : public storage_error {
public:
    using storage_error::storage_error;
};

class truncated_error final : public storage_error {
public:
    using storage_error::storage_error;
};

class checksum_error final : public storage_error {
public:
    using storage_error::storage_error;
};

/// Collection-level metadata: sizes, the fitted quantizer, and the two
/// lexicons (bijections between external names and dense ids).
struct collection_manifest {
    std::uint64_t num_docs = 0;
    std::uint64_t num_terms = 0;
    quantizer quant;
    std::vector<std::string> doc_names;   // index = doc id
    std::vector<std::string> term_names;  // index = term id

    [[nodiscard]] std::optional<term_id> term_of(std::string const& name) const;
    [[nodiscard]] std::optional<doc_id> doc_of(std::string const& name) const;

    /// Rebuilds the name -> id maps after the name vectors change.
    void rebuild_lookup();

    bool operator==(collection_manifest const& other) const
    {
        return num_docs == other.num_docs && num_terms == other.num_terms && quant == other.quant
            && doc_names == other.doc_names && term_names == other.term_names;
    }

private:
    std::unordered_map<std::string, term_id> m_term_ids;
    std::unordered_map<std::string, doc_id> m_doc_ids;
};

/// One line of the document/query file: an external id and the term-weight
/// map in file order.
struct parsed_record {
    std::string id;
    std::vector<std::pair<std::string, double>> weights;
};

/// Parses a line-delimited record file: one JSON object per line with an
/// "id" string and a "vector" object of non-negative weights. Malformed
/// lines raise corrupt_input_error naming the line number.
[[nodiscard]] std::vector<parsed_record> read_records(std::filesystem::path const& path);

struct ingest_result {
    collection_manifest manifest;
    std::vector<quantized_document> documents;  // index = doc id
};

/// Reads a collection, assigns dense term ids by first occurrence, fits the
/// quantizer on the global maximum weight, and quantizes every document.
/// When a permutation file is given (line i = external id of the document
/// assigned doc id i; must be a bijection over the collection), doc ids
/// follow it; otherwise input order. Documents with empty vectors are
/// admitted and simply never match.
[[nodiscard]] ingest_result ingest_collection(
    std::filesystem::path const& documents_path,
    std::optional<std::filesystem::path> const& permutation_path = {});

/// Parses a query file (same record shape, external id = query id) against
/// an existing manifest. Out-of-vocabulary terms are silently dropped;
/// queries keep their file order.
[[nodiscard]] std::vector<std::pair<std::string, sparse_vector>>
load_queries(std::filesystem::path const& path, collection_manifest const& manifest);

inline constexpr std::uint32_t section_lexicons = 1;
inline constexpr std::uint32_t section_block_max = 2;
inline constexpr std::uint32_t section_block_forward = 3;
inline constexpr std::uint32_t section_term_quantiles = 4;

struct section_info {
    std::uint32_t id;
    std::uint64_t offset;
    std::uint64_t length;
    std::uint64_t checksum;
};

struct index_file_info {
    std::uint16_t version;
    bm_mode mode;
    std::uint32_t block_size;
    std::uint64_t num_docs;
    std::uint64_t num_terms;
    double quantizer_max;
    std::vector<section_info> sections;
};

struct loaded_index {
    collection_manifest manifest;
    block_max_index block_max;
    block_forward_index block_forward;
    term_quantiles quantiles;
};

/// Writes the versioned binary index file ("BMPI", little-endian, one
/// checksummed section per structure). Writing the same structures twice
/// yields byte-identical files. Throws std::invalid_argument when the
/// structures disagree on block size, document or term counts.
void write_index(
    collection_manifest const& manifest,
    block_max_index const& block_max,
    block_forward_index const& block_forward,
    term_quantiles const& quantiles,
    std::filesystem::path const& path);

/// Inverse of write_index. Distinguishes bad magic, unknown version,
/// truncation and checksum mismatches as separate error types.
[[nodiscard]] loaded_index read_index(std::filesystem::path const& path);

/// Header and section table only; no payload decoding beyond validation of
/// the table itself.
[[nodiscard]] index_file_info inspect_index(std::filesystem::path const& path);

}  // namespace bmp
