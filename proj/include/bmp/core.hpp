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
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace bmp {

/// Document identifiers are dense: a collection of n documents uses exactly
/// the ids [0, n).
using doc_id = std::uint32_t;

/// Term identifiers are dense over the vocabulary assigned at ingestion time.
using term_id = std::uint32_t;

/// Quantized term-document impact. 0 means "term absent from document";
/// stored postings always carry a value >= 1.
using quantized_impact = std::uint8_t;

/// Thrown when input data (collection files, postings, permutations) violates
/// structural requirements.
class corrupt_input_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Storage layout of the block-max structure.
enum class bm_mode : std::uint8_t { raw = 0, compressed = 1 };

/// Maps real-valued scores in [0, max_raw_score] onto {0} u {1..255} with a
/// ceiling rule, so that a quantized maximum is always an upper bound on the
/// quantized values it covers. 0 is reserved for absence.
struct quantizer {
    static constexpr std::uint32_t levels = 255;

    /// 0 means "unfitted": such a quantizer only accepts s = 0.
    double max_raw_score = 0.0;

    [[nodiscard]] quantized_impact quantize(double score) const;
    [[nodiscard]] double dequantize(quantized_impact value) const
    {
        return static_cast<double>(value) * max_raw_score / levels;
    }

    bool operator==(quantizer const&) const = default;
};

/// Fits a quantizer to the largest raw score observed in a collection.
/// Throws std::invalid_argument if max_raw_score is not positive and finite.
[[nodiscard]] quantizer fit_quantizer(double max_raw_score);

/// A sparse vector over the term vocabulary: entries sorted strictly
/// ascending by term, all weights > 0. The unit of both documents and
/// queries before quantization.
struct sparse_vector {
    struct entry {
        term_id term;
        double weight;
        bool operator==(entry const&) const = default;
    };

    std::vector<entry> entries;

    [[nodiscard]] std::size_t size() const { return entries.size(); }
    [[nodiscard]] bool empty() const { return entries.empty(); }
    bool operator==(sparse_vector const&) const = default;

    /// Normalizes arbitrary input: sorts by term and drops zero-weight
    /// entries. Negative, non-finite or duplicate terms are rejected with
    /// corrupt_input_error.
    static sparse_vector from_entries(std::vector<entry> entries);
};

/// A query with integral weights (>= 1), sorted strictly ascending by term.
struct quantized_query {
    struct entry {
        term_id term;
        std::uint32_t weight;
        bool operator==(entry const&) const = default;
    };

    std::vector<entry> entries;

    [[nodiscard]] std::size_t size() const { return entries.size(); }
    [[nodiscard]] bool empty() const { return entries.empty(); }
    bool operator==(quantized_query const&) const = default;
};

/// Makes query weights integral: w -> max(1, round(w * scale)). Entry order
/// is preserved and no entries are dropped.
[[nodiscard]] quantized_query quantize_query(sparse_vector const& query, double scale);

/// Default query scale: 1 when every weight in the set is already integral
/// (uniCOIL-style small-integer weights), otherwise 100.
[[nodiscard]] double default_query_scale(std::span<sparse_vector const> queries);

/// Admission limits under which 32-bit score accumulation cannot overflow:
/// max_query_terms * max_query_weight * 255 < 2^32.
inline constexpr std::size_t max_query_terms = std::size_t{1} << 15;
inline constexpr std::uint32_t max_query_weight = std::uint32_t{1} << 8;

/// Throws std::invalid_argument when a query exceeds the admission limits.
void validate_query_limits(quantized_query const& query);

/// One retrieved document with its integer quantized score.
struct hit {
    doc_id doc;
    std::uint32_t score;
    bool operator==(hit const&) const = default;
};

/// The global tie-break order: (score descending, doc ascending). A strict
/// total order over hits with distinct docs, shared by the engine and the
/// exhaustive oracle so that safe-mode equality is exact.
[[nodiscard]] constexpr bool ranks_before(hit const& lhs, hit const& rhs)
{
    if (lhs.score != rhs.score) {
        return lhs.score > rhs.score;
    }
    return lhs.doc < rhs.doc;
}

/// Ranked retrieval output: at most k hits, all scores > 0, sorted by
/// ranks_before.
struct top_k_result {
    std::vector<hit> hits;

    [[nodiscard]] std::size_t size() const { return hits.size(); }
    [[nodiscard]] bool empty() const { return hits.empty(); }
    bool operator==(top_k_result const&) const = default;
};

/// Tuning knobs for one search. alpha = 1 and beta = 1 is safe mode.
/// `mode` records the block-max layout of the target index (bookkeeping;
/// the index itself knows its layout). `max_blocks`, when set, caps the
/// number of evaluated blocks regardless of the alpha test.
struct search_params {
    std::uint32_t k = 10;
    double alpha = 1.0;
    double beta = 1.0;
    bm_mode mode = bm_mode::raw;
    std::optional<std::uint32_t> max_blocks{};

    /// Throws std::invalid_argument when k < 1 or alpha/beta are outside (0, 1].
    void validate() const;
};

/// One quantized posting inside a document: (term, impact >= 1), entries
/// sorted strictly ascending by term.
struct term_impact {
    term_id term;
    quantized_impact impact;
    bool operator==(term_impact const&) const = default;
};

using quantized_document = std::vector<term_impact>;

/// Quantizes all weights of a document vector. Weights are > 0 by
/// sparse_vector construction, so every produced impact is >= 1.
[[nodiscard]] quantized_document quantize_document(sparse_vector const& vector, quantizer const& quant);

/// One posting inside a term's list: (doc, impact >= 1), lists sorted by doc.
struct posting {
    doc_id doc;
    quantized_impact impact;
    bool operator==(posting const&) const = default;
};

/// Transposes a dense collection (index = doc id) into per-term posting
/// lists (index = term id). Lists come out sorted by doc id. Throws
/// corrupt_input_error on terms >= num_terms or malformed documents.
[[nodiscard]] std::vector<std::vector<posting>>
invert(std::vector<quantized_document> const& documents, std::uint64_t num_terms);

}  // namespace bmp
