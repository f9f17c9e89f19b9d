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

#include "bmp/storage.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <span>

#include <json.hpp>

#include "bmp/detail/bitpack.hpp"

namespace bmp {

namespace {

    constexpr char index_magic[4] = {'B', 'M', 'P', 'I'};
    constexpr std::uint16_t index_version = 1;

    std::uint64_t fnv1a64(std::span<std::uint8_t const> bytes)
    {
        std::uint64_t hash = 0xcbf29ce484222325ULL;
        for (auto byte: bytes) {
            hash ^= byte;
            hash *= 0x100000001b3ULL;
        }
        return hash;
    }

    // Little-endian scalar framing over a growable byte buffer.
    class byte_writer {
    public:
        explicit byte_writer(std::vector<std::uint8_t>& out): m_out(out) {}

        void u8(std::uint8_t value) { m_out.push_back(value); }
        void u16(std::uint16_t value) { scalar(value); }
        void u32(std::uint32_t value) { scalar(value); }
        void u64(std::uint64_t value) { scalar(value); }
        void f64(double value) { scalar(std::bit_cast<std::uint64_t>(value)); }
        void bytes(std::span<std::uint8_t const> data)
        {
            m_out.insert(m_out.end(), data.begin(), data.end());
        }
        void str(std::string const& value)
        {
            u32(static_cast<std::uint32_t>(value.size()));
            m_out.insert(m_out.end(), value.begin(), value.end());
        }

    private:
        template <typename T>
        void scalar(T value)
        {
            for (std::size_t i = 0; i < sizeof(T); ++i) {
                m_out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
            }
        }

        std::vector<std::uint8_t>& m_out;
    };

    class byte_reader {
    public:
        explicit byte_reader(std::span<std::uint8_t const> data): m_data(data) {}

        [[nodiscard]] std::size_t remaining() const { return m_data.size() - m_pos; }

        std::uint8_t u8() { return take(1)[0]; }
        std::uint16_t u16() { return scalar<std::uint16_t>(); }
        std::uint32_t u32() { return scalar<std::uint32_t>(); }
        std::uint64_t u64() { return scalar<std::uint64_t>(); }
        double f64() { return std::bit_cast<double>(scalar<std::uint64_t>()); }
        std::span<std::uint8_t const> bytes(std::size_t count) { return take(count); }
        std::string str()
        {
            auto length = u32();
            auto data = take(length);
            return std::string(data.begin(), data.end());
        }

    private:
        std::span<std::uint8_t const> take(std::size_t count)
        {
            if (remaining() < count) {
                throw truncated_error("unexpected end of data");
            }
            auto slice = m_data.subspan(m_pos, count);
            m_pos += count;
            return slice;
        }

        template <typename T>
        T scalar()
        {
            auto data = take(sizeof(T));
            T value = 0;
            for (std::size_t i = 0; i < sizeof(T); ++i) {
                value = static_cast<T>(value | (static_cast<T>(data[i]) << (8 * i)));
            }
            return value;
        }

        std::span<std::uint8_t const> m_data;
        std::size_t m_pos = 0;
    };

}  // namespace

std::optional<term_id> collection_manifest::term_of(std::string const& name) const
{
    auto it = m_term_ids.find(name);
    if (it == m_term_ids.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<doc_id> collection_manifest::doc_of(std::string const& name) const
{
    auto it = m_doc_ids.find(name);
    if (it == m_doc_ids.end()) {
        return std::nullopt;
    }
    return it->second;
}

void collection_manifest::rebuild_lookup()
{
    m_term_ids.clear();
    m_term_ids.reserve(term_names.size());
    for (term_id t = 0; t < term_names.size(); ++t) {
        m_term_ids.emplace(term_names[t], t);
    }
    m_doc_ids.clear();
    m_doc_ids.reserve(doc_names.size());
    for (doc_id d = 0; d < doc_names.size(); ++d) {
        m_doc_ids.emplace(doc_names[d], d);
    }
}

std::vector<parsed_record> read_records(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in) {
        throw corrupt_input_error("cannot open " + path.string());
    }
    std::vector<parsed_record> records;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](std::string const& message) {
        throw corrupt_input_error(path.filename().string() + " line " + std::to_string(line_no) + ": " + message);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        nlohmann::ordered_json record;
        try {
            record = nlohmann::ordered_json::parse(line);
        } catch (nlohmann::json::parse_error const& error) {
            fail(error.what());
        }
        if (!record.is_object() || !record.contains("id") || !record["id"].is_string()
            || !record.contains("vector") || !record["vector"].is_object()) {
            fail(R"(expected {"id": <string>, "vector": {<term>: <weight>, ...}})");
        }
        parsed_record parsed;
        parsed.id = record["id"].get<std::string>();
        for (auto const& [term, value]: record["vector"].items()) {
            if (!value.is_number()) {
                fail("weight of term \"" + term + "\" is not a number");
            }
            auto weight = value.get<double>();
            if (!std::isfinite(weight) || weight < 0.0) {
                fail("weight of term \"" + term + "\" must be finite and non-negative");
            }
            parsed.weights.emplace_back(term, weight);
        }
        records.push_back(std::move(parsed));
    }
    return records;
}

namespace {

    std::vector<std::string> read_permutation_names(std::filesystem::path const& path)
    {
        std::ifstream in(path);
        if (!in) {
            throw corrupt_input_error("cannot open " + path.string());
        }
        std::vector<std::string> names;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (!line.empty()) {
                names.push_back(line);
            }
        }
        return names;
    }

}  // namespace

ingest_result ingest_collection(
    std::filesystem::path const& documents_path,
    std::optional<std::filesystem::path> const& permutation_path)
{
    auto records = read_records(documents_path);

    collection_manifest manifest;
    manifest.num_docs = records.size();
    manifest.doc_names.reserve(records.size());

    std::unordered_map<std::string, term_id> term_ids;
    std::vector<sparse_vector> vectors;
    vectors.reserve(records.size());
    double max_weight = 0.0;

    for (auto const& record: records) {
        std::vector<sparse_vector::entry> entries;
        entries.reserve(record.weights.size());
        for (auto const& [term, weight]: record.weights) {
            if (weight == 0.0) {
                continue;  // zero-weight entries never enter the vocabulary
            }
            auto [it, inserted] = term_ids.emplace(term, static_cast<term_id>(term_ids.size()));
            if (inserted) {
                manifest.term_names.push_back(term);
            }
            entries.push_back({it->second, weight});
            max_weight = std::max(max_weight, weight);
        }
        vectors.push_back(sparse_vector::from_entries(std::move(entries)));
        manifest.doc_names.push_back(record.id);
    }
    manifest.num_terms = term_ids.size();

    {
        std::unordered_map<std::string, std::size_t> seen;
        for (std::size_t i = 0; i < manifest.doc_names.size(); ++i) {
            auto [it, inserted] = seen.emplace(manifest.doc_names[i], i);
            if (!inserted) {
                throw corrupt_input_error(
                    "duplicate document id \"" + manifest.doc_names[i] + "\"");
            }
        }
    }

    if (permutation_path) {
        auto order = read_permutation_names(*permutation_path);
        if (order.size() != records.size()) {
            throw corrupt_input_error(
                "permutation lists " + std::to_string(order.size()) + " documents, collection has "
                + std::to_string(records.size()));
        }
        std::unordered_map<std::string, doc_id> original;
        original.reserve(manifest.doc_names.size());
        for (doc_id d = 0; d < manifest.doc_names.size(); ++d) {
            original.emplace(manifest.doc_names[d], d);
        }
        std::vector<sparse_vector> permuted_vectors;
        std::vector<std::string> permuted_names;
        permuted_vectors.reserve(order.size());
        permuted_names.reserve(order.size());
        std::vector<bool> used(records.size(), false);
        for (auto const& name: order) {
            auto it = original.find(name);
            if (it == original.end()) {
                throw corrupt_input_error("permutation names unknown document \"" + name + "\"");
            }
            if (used[it->second]) {
                throw corrupt_input_error("permutation repeats document \"" + name + "\"");
            }
            used[it->second] = true;
            permuted_vectors.push_back(std::move(vectors[it->second]));
            permuted_names.push_back(name);
        }
        vectors = std::move(permuted_vectors);
        manifest.doc_names = std::move(permuted_names);
    }

    // An all-empty collection has no weights to fit; the default quantizer
    // (max 0) accepts only zero scores, which never occur.
    manifest.quant = max_weight > 0.0 ? fit_quantizer(max_weight) : quantizer{};

    ingest_result result;
    result.documents.reserve(vectors.size());
    for (auto const& vector: vectors) {
        result.documents.push_back(quantize_document(vector, manifest.quant));
    }
    manifest.rebuild_lookup();
    result.manifest = std::move(manifest);
    return result;
}

std::vector<std::pair<std::string, sparse_vector>>
load_queries(std::filesystem::path const& path, collection_manifest const& manifest)
{
    auto records = read_records(path);
    std::vector<std::pair<std::string, sparse_vector>> queries;
    queries.reserve(records.size());
    for (auto const& record: records) {
        std::vector<sparse_vector::entry> entries;
        for (auto const& [term, weight]: record.weights) {
            auto id = manifest.term_of(term);
            if (id) {
                entries.push_back({*id, weight});
            }
        }
        queries.emplace_back(record.id, sparse_vector::from_entries(std::move(entries)));
    }
    return queries;
}

namespace {

    std::vector<std::uint8_t> encode_lexicons(collection_manifest const& manifest)
    {
        std::vector<std::uint8_t> buffer;
        byte_writer out(buffer);
        out.u64(manifest.doc_names.size());
        for (auto const& name: manifest.doc_names) {
            out.str(name);
        }
        out.u64(manifest.term_names.size());
        for (auto const& name: manifest.term_names) {
            out.str(name);
        }
        return buffer;
    }

    collection_manifest decode_lexicons(
        byte_reader& in, std::uint64_t num_docs, std::uint64_t num_terms, double quantizer_max)
    {
        collection_manifest manifest;
        manifest.num_docs = num_docs;
        manifest.num_terms = num_terms;
        manifest.quant = quantizer{quantizer_max};
        auto doc_count = in.u64();
        if (doc_count != num_docs) {
            throw storage_error("lexicon document count disagrees with header");
        }
        manifest.doc_names.reserve(doc_count);
        for (std::uint64_t i = 0; i < doc_count; ++i) {
            manifest.doc_names.push_back(in.str());
        }
        auto term_count = in.u64();
        if (term_count != num_terms) {
            throw storage_error("lexicon term count disagrees with header");
        }
        manifest.term_names.reserve(term_count);
        for (std::uint64_t i = 0; i < term_count; ++i) {
            manifest.term_names.push_back(in.str());
        }
        manifest.rebuild_lookup();
        return manifest;
    }

    std::vector<std::uint8_t> encode_block_max(block_max_index const& index)
    {
        std::vector<std::uint8_t> buffer;
        byte_writer out(buffer);
        if (index.mode() == bm_mode::raw) {
            // Exactly num_terms * num_blocks bytes: the raw size law is
            // byte-exact with zero section-local bookkeeping.
            out.bytes(index.raw_values());
        } else {
            for (term_id t = 0; t < index.num_terms(); ++t) {
                auto const& entry = index.compressed_entry(t);
                out.u32(entry.count);
                out.u8(entry.delta_bits);
                out.bytes(entry.data);
            }
        }
        return buffer;
    }

    block_max_index decode_block_max(
        byte_reader& in,
        bm_mode mode,
        std::uint32_t block_size,
        std::uint32_t num_blocks,
        std::uint64_t num_terms)
    {
        if (mode == bm_mode::raw) {
            auto data = in.bytes(num_terms * num_blocks);
            return block_max_index::from_parts(
                block_size,
                num_blocks,
                num_terms,
                mode,
                std::vector<std::uint8_t>(data.begin(), data.end()),
                {});
        }
        std::vector<block_max_index::compressed_term> terms(num_terms);
        for (auto& term: terms) {
            term.count = in.u32();
            term.delta_bits = in.u8();
            auto payload = term.count == 0
                ? std::size_t{0}
                : (static_cast<std::size_t>(term.count) * term.delta_bits + 7) / 8 + term.count;
            auto data = in.bytes(payload);
            term.data.assign(data.begin(), data.end());
            // The aggregation indexes blocks straight from the decoded ids;
            // reject files whose deltas walk past the block range.
            std::uint64_t bit_position = 0;
            std::uint64_t block = 0;
            for (std::uint32_t i = 0; i < term.count; ++i) {
                auto delta = detail::read_bits(term.data.data(), bit_position, term.delta_bits);
                bit_position += term.delta_bits;
                block = i == 0 ? delta : block + delta + 1;
                if (block >= num_blocks) {
                    throw storage_error("compressed block-max entry outside block range");
                }
            }
        }
        return block_max_index::from_parts(block_size, num_blocks, num_terms, mode, {}, std::move(terms));
    }

    std::vector<std::uint8_t> encode_block_forward(block_forward_index const& index)
    {
        std::vector<std::uint8_t> buffer;
        byte_writer out(buffer);
        out.u32(index.num_blocks());
        for (std::uint32_t j = 0; j < index.num_blocks(); ++j) {
            auto const& block = index.block(j);
            out.u32(static_cast<std::uint32_t>(block.terms.size()));
            for (auto term: block.terms) {
                out.u32(term);
            }
            for (auto offset: block.offsets) {
                out.u32(offset);
            }
            // Local ids fit one byte for every supported block size
            // (log2(256) = 8 bits, byte-aligned).
            for (auto const& posting: block.postings) {
                out.u8(posting.local_doc);
                out.u8(posting.impact);
            }
        }
        return buffer;
    }

    block_forward_index
    decode_block_forward(byte_reader& in, std::uint32_t block_size, std::uint64_t num_docs)
    {
        auto num_blocks = in.u32();
        std::vector<block_forward_index::block_entry> blocks(num_blocks);
        for (auto& block: blocks) {
            auto term_count = in.u32();
            block.terms.reserve(term_count);
            for (std::uint32_t i = 0; i < term_count; ++i) {
                block.terms.push_back(in.u32());
            }
            block.offsets.reserve(term_count + 1);
            for (std::uint32_t i = 0; i < term_count + 1; ++i) {
                block.offsets.push_back(in.u32());
            }
            auto posting_count = block.offsets.back();
            block.postings.reserve(posting_count);
            for (std::uint32_t i = 0; i < posting_count; ++i) {
                auto local = in.u8();
                auto impact = in.u8();
                block.postings.push_back({local, impact});
            }
        }
        return block_forward_index::from_parts(block_size, num_docs, std::move(blocks));
    }

    std::vector<std::uint8_t> encode_term_quantiles(term_quantiles const& quantiles)
    {
        std::vector<std::uint8_t> buffer;
        byte_writer out(buffer);
        auto ranks = quantiles.ranks();
        out.u32(static_cast<std::uint32_t>(ranks.size()));
        for (auto rank: ranks) {
            out.u32(rank);
        }
        for (term_id t = 0; t < quantiles.num_terms(); ++t) {
            for (std::size_t i = 0; i < ranks.size(); ++i) {
                out.u8(quantiles.impact_at(t, i));
            }
        }
        return buffer;
    }

    term_quantiles decode_term_quantiles(byte_reader& in, std::uint64_t num_terms)
    {
        auto rank_count = in.u32();
        std::vector<std::uint32_t> ranks;
        ranks.reserve(rank_count);
        for (std::uint32_t i = 0; i < rank_count; ++i) {
            ranks.push_back(in.u32());
        }
        auto data = in.bytes(num_terms * rank_count);
        return term_quantiles::from_parts(
            std::move(ranks), num_terms, std::vector<quantized_impact>(data.begin(), data.end()));
    }

}  // namespace

void write_index(
    collection_manifest const& manifest,
    block_max_index const& block_max,
    block_forward_index const& block_forward,
    term_quantiles const& quantiles,
    std::filesystem::path const& path)
{
    if (block_max.block_size() != block_forward.block_size()
        || block_max.num_blocks() != block_forward.num_blocks()
        || block_max.num_terms() != manifest.num_terms
        || quantiles.num_terms() != manifest.num_terms
        || block_forward.num_docs() != manifest.num_docs) {
        throw std::invalid_argument("index structures are mutually inconsistent");
    }

    std::vector<std::pair<std::uint32_t, std::vector<std::uint8_t>>> sections;
    sections.emplace_back(section_lexicons, encode_lexicons(manifest));
    sections.emplace_back(section_block_max, encode_block_max(block_max));
    sections.emplace_back(section_block_forward, encode_block_forward(block_forward));
    sections.emplace_back(section_term_quantiles, encode_term_quantiles(quantiles));

    std::vector<std::uint8_t> file;
    byte_writer out(file);
    out.bytes(std::span<std::uint8_t const>(
        reinterpret_cast<std::uint8_t const*>(index_magic), sizeof(index_magic)));
    out.u16(index_version);
    out.u8(static_cast<std::uint8_t>(block_max.mode()));
    out.u8(0);
    out.u32(block_max.block_size());
    out.u64(manifest.num_docs);
    out.u64(manifest.num_terms);
    out.f64(manifest.quant.max_raw_score);
    out.u32(static_cast<std::uint32_t>(sections.size()));

    auto table_offset = file.size();
    constexpr std::size_t table_row_bytes = 4 + 8 + 8 + 8;
    auto payload_offset = table_offset + sections.size() * table_row_bytes;

    std::uint64_t offset = payload_offset;
    for (auto const& [id, payload]: sections) {
        out.u32(id);
        out.u64(offset);
        out.u64(payload.size());
        out.u64(fnv1a64(payload));
        offset += payload.size();
    }
    for (auto const& section: sections) {
        out.bytes(section.second);
    }

    std::ofstream stream(path, std::ios::binary | std::ios::trunc);
    if (!stream) {
        throw storage_error("cannot open " + path.string() + " for writing");
    }
    stream.write(reinterpret_cast<char const*>(file.data()), static_cast<std::streamsize>(file.size()));
    if (!stream) {
        throw storage_error("short write to " + path.string());
    }
}

namespace {

    std::vector<std::uint8_t> read_file_bytes(std::filesystem::path const& path)
    {
        std::ifstream stream(path, std::ios::binary);
        if (!stream) {
            throw storage_error("cannot open " + path.string());
        }
        std::vector<std::uint8_t> bytes(
            (std::istreambuf_iterator<char>(stream)), std::istreambuf_iterator<char>());
        return bytes;
    }

    index_file_info parse_header(std::vector<std::uint8_t> const& file)
    {
        byte_reader in(file);
        std::array<std::uint8_t, 4> magic{};
        try {
            auto data = in.bytes(4);
            std::copy(data.begin(), data.end(), magic.begin());
        } catch (truncated_error const&) {
            throw truncated_error("file too short for magic");
        }
        if (std::memcmp(magic.data(), index_magic, 4) != 0) {
            throw bad_magic_error("not an index file (bad magic)");
        }
        index_file_info info;
        info.version = in.u16();
        if (info.version != index_version) {
            throw bad_version_error("unknown index version " + std::to_string(info.version));
        }
        auto mode = in.u8();
        if (mode > 1) {
            throw storage_error("invalid block-max mode flag");
        }
        info.mode = static_cast<bm_mode>(mode);
        in.u8();  // reserved
        info.block_size = in.u32();
        if (!block_max_index::supported_block_size(info.block_size)) {
            throw storage_error("invalid block size " + std::to_string(info.block_size));
        }
        info.num_docs = in.u64();
        info.num_terms = in.u64();
        info.quantizer_max = in.f64();
        auto section_count = in.u32();
        info.sections.reserve(section_count);
        for (std::uint32_t i = 0; i < section_count; ++i) {
            section_info section{};
            section.id = in.u32();
            section.offset = in.u64();
            section.length = in.u64();
            section.checksum = in.u64();
            info.sections.push_back(section);
        }

        // Sections must lie within the file and must not overlap.
        std::uint64_t previous_end = 0;
        auto ordered = info.sections;
        std::sort(ordered.begin(), ordered.end(), [](auto const& lhs, auto const& rhs) {
            return lhs.offset < rhs.offset;
        });
        for (auto const& section: ordered) {
            if (section.offset < previous_end) {
                throw storage_error("section table entries overlap");
            }
            if (section.offset + section.length > file.size()) {
                throw truncated_error(
                    "section " + std::to_string(section.id) + " extends past end of file");
            }
            previous_end = section.offset + section.length;
        }
        return info;
    }

    std::span<std::uint8_t const> section_bytes(
        std::vector<std::uint8_t> const& file, index_file_info const& info, std::uint32_t id)
    {
        for (auto const& section: info.sections) {
            if (section.id == id) {
                std::span<std::uint8_t const> bytes(file.data() + section.offset, section.length);
                if (fnv1a64(bytes) != section.checksum) {
                    throw checksum_error("checksum mismatch in section " + std::to_string(id));
                }
                return bytes;
            }
        }
        throw storage_error("missing section " + std::to_string(id));
    }

}  // namespace

index_file_info inspect_index(std::filesystem::path const& path)
{
    auto file = read_file_bytes(path);
    return parse_header(file);
}

loaded_index read_index(std::filesystem::path const& path)
{
    auto file = read_file_bytes(path);
    auto info = parse_header(file);

    auto num_blocks = static_cast<std::uint32_t>(
        (info.num_docs + info.block_size - 1) / info.block_size);

    loaded_index loaded;
    {
        byte_reader in(section_bytes(file, info, section_lexicons));
        loaded.manifest = decode_lexicons(in, info.num_docs, info.num_terms, info.quantizer_max);
        if (in.remaining() != 0) {
            throw storage_error("lexicon section has trailing bytes");
        }
    }
    {
        byte_reader in(section_bytes(file, info, section_block_max));
        loaded.block_max =
            decode_block_max(in, info.mode, info.block_size, num_blocks, info.num_terms);
        if (in.remaining() != 0) {
            throw storage_error("block-max section has trailing bytes");
        }
    }
    {
        byte_reader in(section_bytes(file, info, section_block_forward));
        loaded.block_forward = decode_block_forward(in, info.block_size, info.num_docs);
        if (in.remaining() != 0) {
            throw storage_error("block-forward section has trailing bytes");
        }
    }
    {
        byte_reader in(section_bytes(file, info, section_term_quantiles));
        loaded.quantiles = decode_term_quantiles(in, info.num_terms);
        if (in.remaining() != 0) {
            throw storage_error("term-quantile section has trailing bytes");
        }
    }
    return loaded;
}

}  // namespace bmp
