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

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bmp/block_forward_index.hpp"
#include "bmp/block_max_index.hpp"
#include "bmp/core.hpp"
#include "bmp/eval.hpp"
#include "bmp/oracle.hpp"
#include "bmp/search.hpp"
#include "bmp/storage.hpp"
#include "bmp/term_quantiles.hpp"
#include "bmp/trec.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_data = 2;

struct index_options {
    std::string input;
    std::string output;
    std::uint32_t block_size = 64;
    std::string bm_mode_name = "raw";
    std::string permutation;
    std::vector<std::uint32_t> quantile_ranks;
};

struct search_options {
    std::string index;
    std::string queries;
    std::string output;
    std::uint32_t k = 10;
    double alpha = 1.0;
    double beta = 1.0;
    double query_scale = 0.0;  // 0 = auto
    std::string run_tag = "bmp";
};

struct bench_options {
    std::string index;
    std::string queries;
    std::string qrels;
    std::string output;
    std::uint32_t k = 10;
    double alpha = 1.0;
    double beta = 1.0;
    double query_scale = 0.0;
    std::uint32_t warmup = 1;
    std::uint32_t runs = 3;
};

struct eval_options {
    std::string run;
    std::string qrels;
    std::uint32_t k = 10;
};

struct compare_options {
    std::string index;
    std::string queries;
    std::uint32_t k = 10;
    double query_scale = 0.0;
};

bmp::bm_mode parse_mode(std::string const& name)
{
    if (name == "raw") {
        return bmp::bm_mode::raw;
    }
    if (name == "compressed") {
        return bmp::bm_mode::compressed;
    }
    throw std::invalid_argument("bm-mode must be raw or compressed, got " + name);
}

std::vector<bmp::quantized_query> quantize_all(
    std::vector<std::pair<std::string, bmp::sparse_vector>> const& queries, double scale_flag)
{
    std::vector<bmp::sparse_vector> vectors;
    vectors.reserve(queries.size());
    for (auto const& [id, vector]: queries) {
        vectors.push_back(vector);
    }
    auto scale = scale_flag > 0.0 ? scale_flag : bmp::default_query_scale(vectors);
    std::vector<bmp::quantized_query> quantized;
    quantized.reserve(queries.size());
    for (auto const& [id, vector]: queries) {
        quantized.push_back(bmp::quantize_query(vector, scale));
    }
    return quantized;
}

int run_index(index_options const& options)
{
    auto mode = parse_mode(options.bm_mode_name);
    if (!bmp::block_max_index::supported_block_size(options.block_size)) {
        std::cerr << "unsupported block size " << options.block_size << "\n";
        return exit_usage;
    }

    std::optional<std::filesystem::path> permutation;
    if (!options.permutation.empty()) {
        permutation = options.permutation;
    }
    auto [manifest, documents] = bmp::ingest_collection(options.input, permutation);
    auto postings = bmp::invert(documents, manifest.num_terms);

    auto block_max =
        bmp::build_block_max(postings, manifest.num_docs, options.block_size, mode);
    auto block_forward = bmp::build_block_forward(documents, options.block_size);
    auto quantiles = options.quantile_ranks.empty()
        ? bmp::build_term_quantiles(postings)
        : bmp::build_term_quantiles(postings, options.quantile_ranks);

    bmp::write_index(manifest, block_max, block_forward, quantiles, options.output);

    auto info = bmp::inspect_index(options.output);
    std::cout << "documents: " << info.num_docs << "\n"
              << "terms: " << info.num_terms << "\n"
              << "blocks: " << block_max.num_blocks() << " (block size " << info.block_size
              << ", bm-mode " << options.bm_mode_name << ")\n";
    std::uint64_t total = 0;
    auto section_name = [](std::uint32_t id) -> char const* {
        switch (id) {
        case bmp::section_lexicons: return "lexicons";
        case bmp::section_block_max: return "block-max";
        case bmp::section_block_forward: return "block-forward";
        case bmp::section_term_quantiles: return "term-quantiles";
        default: return "unknown";
        }
    };
    for (auto const& section: info.sections) {
        std::cout << "section " << section_name(section.id) << ": " << section.length
                  << " bytes\n";
        total += section.length;
    }
    std::cout << "total sections: " << total << " bytes\n";
    return exit_ok;
}

int run_search(search_options const& options)
{
    bmp::search_params params{options.k, options.alpha, options.beta};
    params.validate();

    auto loaded = bmp::read_index(options.index);
    params.mode = loaded.block_max.mode();
    auto queries = bmp::load_queries(options.queries, loaded.manifest);
    auto quantized = quantize_all(queries, options.query_scale);

    std::ofstream out(options.output);
    if (!out) {
        throw bmp::storage_error("cannot open " + options.output + " for writing");
    }
    bmp::searcher searcher(loaded.block_max, loaded.block_forward, loaded.quantiles);
    for (std::size_t i = 0; i < queries.size(); ++i) {
        auto result = searcher.search(quantized[i], params);
        bmp::write_run(out, queries[i].first, result, loaded.manifest.doc_names, options.run_tag);
    }
    return exit_ok;
}

int run_bench(bench_options const& options)
{
    bmp::search_params params{options.k, options.alpha, options.beta};
    params.validate();
    if (options.runs < 1) {
        std::cerr << "--runs must be at least 1\n";
        return exit_usage;
    }

    auto loaded = bmp::read_index(options.index);
    params.mode = loaded.block_max.mode();
    auto queries = bmp::load_queries(options.queries, loaded.manifest);
    auto quantized = quantize_all(queries, options.query_scale);

    std::unordered_map<std::string, std::unordered_set<std::string>> qrels;
    if (!options.qrels.empty()) {
        qrels = bmp::read_qrels(options.qrels);
    }

    bmp::searcher searcher(loaded.block_max, loaded.block_forward, loaded.quantiles);

    // Safe baseline for overlap; untimed.
    bmp::search_params safe_params{options.k, 1.0, 1.0};
    safe_params.mode = params.mode;
    std::vector<bmp::top_k_result> baselines;
    baselines.reserve(quantized.size());
    for (auto const& query: quantized) {
        baselines.push_back(searcher.search(query, safe_params));
    }

    for (std::uint32_t pass = 0; pass < options.warmup; ++pass) {
        for (auto const& query: quantized) {
            (void)searcher.search(query, params);
        }
    }

    std::vector<bmp::query_metrics> samples;
    samples.reserve(static_cast<std::size_t>(options.runs) * quantized.size());
    for (std::uint32_t pass = 0; pass < options.runs; ++pass) {
        for (std::size_t i = 0; i < quantized.size(); ++i) {
            bmp::search_stats stats;
            auto start = std::chrono::steady_clock::now();
            auto result = searcher.search(quantized[i], params, &stats);
            auto stop = std::chrono::steady_clock::now();

            bmp::query_metrics sample;
            sample.latency_ns = static_cast<std::uint64_t>(
                std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count());
            sample.blocks_evaluated = stats.blocks_evaluated;
            sample.blocks_total = stats.blocks_total;
            sample.overlap_at_k = bmp::overlap(result, baselines[i], options.k);
            auto judgments = qrels.find(queries[i].first);
            if (judgments != qrels.end()) {
                sample.rr_at_k = bmp::reciprocal_rank(
                    result, loaded.manifest.doc_names, judgments->second, options.k);
            }
            samples.push_back(sample);
        }
    }

    if (samples.empty()) {
        std::cerr << "no queries to benchmark\n";
        return exit_data;
    }
    auto summary = bmp::aggregate(samples);

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!options.output.empty()) {
        file.open(options.output);
        if (!file) {
            throw bmp::storage_error("cannot open " + options.output + " for writing");
        }
        out = &file;
    }
    bmp::write_csv_header(*out);
    bmp::write_csv_row(*out, loaded.block_max.block_size(), options.alpha, options.beta, options.k, summary);
    return exit_ok;
}

int run_eval(eval_options const& options)
{
    if (options.k < 1) {
        std::cerr << "--k must be at least 1\n";
        return exit_usage;
    }
    auto run = bmp::read_run(options.run);
    auto qrels = bmp::read_qrels(options.qrels);

    double sum = 0.0;
    for (auto const& [qid, ranked]: run) {
        auto judgments = qrels.find(qid);
        if (judgments != qrels.end()) {
            sum += bmp::reciprocal_rank(ranked, judgments->second, options.k);
        }
    }
    auto mean = run.empty() ? 0.0 : sum / static_cast<double>(run.size());
    std::cout << "queries: " << run.size() << "\n";
    std::cout.precision(4);
    std::cout << std::fixed << "RR@" << options.k << ": " << mean << "\n";
    return exit_ok;
}

int run_compare(compare_options const& options)
{
    auto loaded = bmp::read_index(options.index);
    auto queries = bmp::load_queries(options.queries, loaded.manifest);
    auto quantized = quantize_all(queries, options.query_scale);
    auto documents = loaded.block_forward.reconstruct_documents();

    bmp::search_params params{options.k, 1.0, 1.0};
    params.mode = loaded.block_max.mode();
    bmp::searcher searcher(loaded.block_max, loaded.block_forward, loaded.quantiles);

    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < quantized.size(); ++i) {
        auto engine = searcher.search(quantized[i], params);
        auto exact = bmp::oracle_topk(documents, quantized[i], options.k);
        if (engine != exact) {
            ++mismatches;
            if (mismatches <= 10) {
                std::cerr << "mismatch on query " << queries[i].first << ": engine "
                          << engine.size() << " hits, oracle " << exact.size() << " hits\n";
            }
        }
    }
    std::cout << "compared " << quantized.size() << " queries at k=" << options.k << ": "
              << (quantized.size() - mismatches) << " match, " << mismatches << " mismatch\n";
    return mismatches == 0 ? exit_ok : exit_data;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"block-max pruning search over learned sparse vectors"};
    app.require_subcommand(1);

    index_options index_opts;
    auto* cmd_index = app.add_subcommand("index", "ingest a collection and build an index file");
    cmd_index->add_option("--input", index_opts.input, "line-delimited document records")->required();
    cmd_index->add_option("--output", index_opts.output, "index file to write")->required();
    cmd_index->add_option("--block-size", index_opts.block_size, "documents per block (8..256, power of two)");
    cmd_index->add_option("--bm-mode", index_opts.bm_mode_name, "block-max layout: raw or compressed");
    cmd_index->add_option("--permutation", index_opts.permutation, "doc-id assignment, one external id per line");
    cmd_index->add_option("--quantile-ranks", index_opts.quantile_ranks, "threshold estimator ranks")->delimiter(',');

    search_options search_opts;
    auto* cmd_search = app.add_subcommand("search", "run queries and write a TREC run file");
    cmd_search->add_option("--index", search_opts.index)->required();
    cmd_search->add_option("--queries", search_opts.queries)->required();
    cmd_search->add_option("--k", search_opts.k, "results per query");
    cmd_search->add_option("--alpha", search_opts.alpha, "early-termination factor in (0,1]; 1 = safe");
    cmd_search->add_option("--beta", search_opts.beta, "fraction of query terms kept in (0,1]");
    cmd_search->add_option("--output", search_opts.output, "run file to write")->required();
    cmd_search->add_option("--run-tag", search_opts.run_tag);
    cmd_search->add_option("--query-scale", search_opts.query_scale, "query weight scale; 0 = auto");

    bench_options bench_opts;
    auto* cmd_bench = app.add_subcommand("bench", "time queries single-threaded and emit a CSV summary");
    cmd_bench->add_option("--index", bench_opts.index)->required();
    cmd_bench->add_option("--queries", bench_opts.queries)->required();
    cmd_bench->add_option("--k", bench_opts.k);
    cmd_bench->add_option("--alpha", bench_opts.alpha);
    cmd_bench->add_option("--beta", bench_opts.beta);
    cmd_bench->add_option("--warmup", bench_opts.warmup, "untimed passes");
    cmd_bench->add_option("--runs", bench_opts.runs, "timed passes");
    cmd_bench->add_option("--qrels", bench_opts.qrels, "optional qrels for the RR column");
    cmd_bench->add_option("--output", bench_opts.output, "CSV path (default stdout)");
    cmd_bench->add_option("--query-scale", bench_opts.query_scale);

    eval_options eval_opts;
    auto* cmd_eval = app.add_subcommand("eval", "mean reciprocal rank of a run file against qrels");
    cmd_eval->add_option("--run", eval_opts.run)->required();
    cmd_eval->add_option("--qrels", eval_opts.qrels)->required();
    cmd_eval->add_option("--k", eval_opts.k);

    compare_options compare_opts;
    auto* cmd_compare =
        app.add_subcommand("compare", "verify safe mode against the exhaustive oracle");
    cmd_compare->add_option("--index", compare_opts.index)->required();
    cmd_compare->add_option("--queries", compare_opts.queries)->required();
    cmd_compare->add_option("--k", compare_opts.k);
    cmd_compare->add_option("--query-scale", compare_opts.query_scale);

    try {
        app.parse(argc, argv);
    } catch (CLI::CallForHelp const& help) {
        return app.exit(help);
    } catch (CLI::ParseError const& error) {
        app.exit(error);
        return exit_usage;
    }

    try {
        if (cmd_index->parsed()) {
            return run_index(index_opts);
        }
        if (cmd_search->parsed()) {
            return run_search(search_opts);
        }
        if (cmd_bench->parsed()) {
            return run_bench(bench_opts);
        }
        if (cmd_eval->parsed()) {
            return run_eval(eval_opts);
        }
        if (cmd_compare->parsed()) {
            return run_compare(compare_opts);
        }
    } catch (std::invalid_argument const& error) {
        std::cerr << "error: " << error.what() << "\n";
        return exit_usage;
    } catch (std::exception const& error) {
        std::cerr << "error: " << error.what() << "\n";
        return exit_data;
    }
    return exit_usage;
}
