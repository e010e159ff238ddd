// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 profret Contributors

#pragma once

// Command-line front end: ingest -> gen-queries -> train -> build-index ->
// search / eval / bench. Settings come from built-in defaults, then a JSON
// config file (--config or $PROFRET_CONFIG), then flags.
//
// Exit status: 0 success, 1 usage error, 2 data/validation error, 3 numeric error.

#include "profret/bench.hpp"
#include "profret/context.hpp"
#include "profret/corpus.hpp"
#include "profret/encoder.hpp"
#include "profret/error.hpp"
#include "profret/evaluation.hpp"
#include "profret/index.hpp"
#include "profret/training.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace profret::cli {

inline constexpr const char* kConfigEnv = "PROFRET_CONFIG";

struct RunConfig {
    std::string corpus_path;
    std::string model_path;
    std::string index_path;
    EncoderConfig encoder;
    TrainConfig train;
    std::vector<std::size_t> cutoffs{1, 10};
    std::size_t bench_batch_size = kDefaultBenchBatch;
};

inline RunConfig run_config_from_json(const nlohmann::json& j, RunConfig c = {}) {
    if (!j.is_object()) {
        throw DataError("config: top level must be an object");
    }
    try {
        if (j.contains("corpus_path")) c.corpus_path = j.at("corpus_path").get<std::string>();
        if (j.contains("model_path")) c.model_path = j.at("model_path").get<std::string>();
        if (j.contains("index_path")) c.index_path = j.at("index_path").get<std::string>();
        if (j.contains("encoder")) c.encoder = encoder_config_from_json(j.at("encoder"), c.encoder);
        if (j.contains("train")) c.train = train_config_from_json(j.at("train"), c.train);
        if (j.contains("cutoffs")) c.cutoffs = j.at("cutoffs").get<std::vector<std::size_t>>();
        if (j.contains("bench_batch_size")) c.bench_batch_size = j.at("bench_batch_size").get<std::size_t>();
    } catch (const nlohmann::json::exception& ex) {
        throw DataError(std::string("config: ") + ex.what());
    }
    return c;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open config file \"" + path + "\"");
    }
    try {
        return run_config_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& ex) {
        throw DataError("config \"" + path + "\": " + ex.what());
    }
}

inline void require_path(const std::string& value, const char* what) {
    if (value.empty()) {
        throw UsageError(std::string("missing ") + what + " path");
    }
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write \"" + path + "\"");
    }
    return out;
}

inline std::string epoch_log_path(const std::string& model_path) { return model_path + ".log.jsonl"; }

// ---------------------------------------------------------------------------
// Commands

inline int cmd_ingest(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    require_path(cfg.corpus_path, "corpus");
    const auto report = ingest_corpus_file(cfg.corpus_path);
    if (report.accepted.empty() && report.issues.empty()) {
        err << "error: empty corpus\n";
        return static_cast<int>(ErrorKind::data);
    }
    std::map<std::string, std::size_t> by_domain;
    for (const auto& e : report.accepted) {
        ++by_domain[e.domain];
    }
    if (report.clean()) {
        out << report.accepted.size() << " entries OK\n";
    } else {
        out << report.accepted.size() << " entries accepted, " << report.issues.size() << " rejected\n";
    }
    for (const auto& [domain, count] : by_domain) {
        out << "  " << (domain.empty() ? "(none)" : domain) << ": " << count << '\n';
    }
    if (!report.clean()) {
        err << "error: " << report.issues.front().describe() << '\n';
        return static_cast<int>(ErrorKind::data);
    }
    return 0;
}

inline int cmd_gen_queries(const RunConfig& cfg, std::size_t per_entry, const std::string& out_path,
                           std::ostream& out) {
    require_path(cfg.corpus_path, "corpus");
    if (per_entry == 0) {
        throw UsageError("--per-entry must be positive");
    }
    const auto corpus = load_corpus(cfg.corpus_path);
    const auto triples = generate_synthetic_triples(corpus, per_entry, cfg.train.shuffle_seed);
    std::ofstream file;
    std::ostream* sink = &out;
    if (!out_path.empty()) {
        file = open_output(out_path);
        sink = &file;
    }
    for (const auto& t : triples) {
        *sink << to_json(to_query_line(t)).dump() << '\n';
    }
    if (!out_path.empty()) {
        out << triples.size() << " queries written to " << out_path << '\n';
    }
    return 0;
}

inline int cmd_train(const RunConfig& cfg, bool synthetic, std::size_t per_entry, const std::string& queries_path,
                     std::ostream& out, std::ostream& err) {
    require_path(cfg.corpus_path, "corpus");
    require_path(cfg.model_path, "model");
    const auto corpus = load_corpus(cfg.corpus_path);
    std::vector<TrainingTriple> triples;
    if (synthetic) {
        if (per_entry == 0) {
            throw UsageError("--per-entry must be positive");
        }
        triples = generate_synthetic_triples(corpus, per_entry, cfg.train.shuffle_seed);
    } else if (!queries_path.empty()) {
        triples = triples_from_queries(load_queries(queries_path));
    } else {
        throw UsageError("train needs --synthetic or --queries");
    }

    const auto result = train(corpus, triples, cfg.encoder, cfg.train, [&err](const EpochLog& e) {
        err << "epoch " << e.epoch << " loss " << e.loss << " ndcg@10 " << e.ndcg_at_10 << " recall@1 "
            << e.recall_at_1 << '\n';
    });

    save_checkpoint(cfg.model_path, result.best);
    auto log = open_output(epoch_log_path(cfg.model_path));
    for (const auto& e : result.log) {
        log << to_json(e).dump() << '\n';
    }

    nlohmann::ordered_json summary;
    summary["best_epoch"] = result.best_epoch;
    summary["train_size"] = result.train_size;
    summary["test_size"] = result.test_size;
    summary["tau"] = std::exp(result.best.log_tau);
    summary["initial"] = to_json(result.initial_metrics);
    summary["held_out"] = to_json(result.best_metrics);
    out << summary.dump(2) << '\n';
    return 0;
}

inline int cmd_build_index(const RunConfig& cfg, std::ostream& out) {
    require_path(cfg.corpus_path, "corpus");
    require_path(cfg.model_path, "model");
    require_path(cfg.index_path, "index");
    const auto corpus = load_corpus(cfg.corpus_path);
    const auto model = load_model(cfg.model_path);
    const auto store = build_index(corpus, HashedNgramEncoder(model.config, model.params));
    save_index(cfg.index_path, store);
    out << store.size() << " vectors (dim " << store.dim() << ") written to " << cfg.index_path << '\n';
    return 0;
}

/// Loads the index file if configured, otherwise embeds the corpus in memory.
inline VectorStore obtain_index(const RunConfig& cfg, const ModelFile& model) {
    if (!cfg.index_path.empty()) {
        auto store = load_index(cfg.index_path);
        if (store.dim() != model.config.embed_dim) {
            throw DataError("index dimension does not match the model");
        }
        return store;
    }
    if (!cfg.corpus_path.empty()) {
        return build_index(load_corpus(cfg.corpus_path), HashedNgramEncoder(model.config, model.params));
    }
    throw UsageError("missing index path (or a corpus path to build one)");
}

inline int cmd_search(const RunConfig& cfg, const std::string& query, const std::string& profile_json,
                      std::size_t k, bool context, std::ostream& out) {
    require_path(cfg.model_path, "model");
    if (k == 0) {
        throw UsageError("--k must be positive");
    }
    if (tokenize(query).empty()) {
        throw NumericError("empty input text");
    }
    QueryRecord record;
    record.query_text = query;
    if (!profile_json.empty()) {
        try {
            record.query_profile = query_profile_from_json(nlohmann::json::parse(profile_json));
        } catch (const nlohmann::json::parse_error& ex) {
            throw DataError(std::string("--profile: ") + ex.what());
        }
    }
    const auto model = load_model(cfg.model_path);
    const HashedNgramEncoder encoder(model.config, model.params);
    const auto store = obtain_index(cfg, model);
    if (context) {
        require_path(cfg.corpus_path, "corpus");
        const auto corpus = load_corpus(cfg.corpus_path);
        out << render_context_block(build_tool_context(store, corpus, encoder, record, k));
        return 0;
    }
    char score[32];
    for (const auto& r : search(store, encoder.encode_text(fuse_query_text(record)), k)) {
        std::snprintf(score, sizeof score, "%.6f", r.score);
        out << r.rank << '\t' << score << '\t' << r.fc_id << '\n';
    }
    return 0;
}

inline int cmd_eval(const RunConfig& cfg, const std::string& queries_path, const std::string& out_path,
                    std::ostream& out) {
    require_path(cfg.model_path, "model");
    require_path(queries_path, "queries");
    const auto model = load_model(cfg.model_path);
    const auto store = obtain_index(cfg, model);
    const auto lines = load_queries(queries_path);
    std::vector<EvalQuery> queries;
    queries.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!lines[i].ground_truth) {
            throw DataError(queries_path + ": query " + std::to_string(i + 1) + " has no ground_truth");
        }
        queries.push_back({lines[i].record, *lines[i].ground_truth});
    }
    const auto report = evaluate(store, HashedNgramEncoder(model.config, model.params), queries, cfg.cutoffs);
    const auto text = to_json(report).dump(2);
    out << text << '\n';
    if (!out_path.empty()) {
        open_output(out_path) << text << '\n';
    }
    return 0;
}

inline int cmd_bench(const RunConfig& cfg, const std::string& queries_path, const std::string& out_path,
                     std::ostream& out) {
    require_path(cfg.model_path, "model");
    require_path(queries_path, "queries");
    const auto model = load_model(cfg.model_path);
    std::vector<std::string> texts;
    for (const auto& q : load_queries(queries_path)) {
        texts.push_back(fuse_query_text(q.record));
    }
    const auto report = run_bench(HashedNgramEncoder(model.config, model.params), texts, cfg.bench_batch_size);
    const auto text = to_json(report).dump(2);
    out << text << '\n';
    if (!out_path.empty()) {
        open_output(out_path) << text << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"profret: profile-aware retrieval over statistical function corpora", "profret"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    app.add_option("--config", config_path, "JSON run configuration")->envname(kConfigEnv);

    // Flag overrides shared by several subcommands.
    std::optional<std::string> corpus, model, index;
    std::optional<std::uint64_t> seed;
    auto add_paths = [&](CLI::App* sub, bool with_corpus, bool with_model, bool with_index) {
        if (with_corpus) sub->add_option("--corpus", corpus, "corpus JSON Lines file");
        if (with_model) sub->add_option("--model", model, "model checkpoint file");
        if (with_index) sub->add_option("--index", index, "vector index file");
    };

    auto* ingest = app.add_subcommand("ingest", "validate a corpus file");
    add_paths(ingest, true, false, false);

    std::size_t per_entry = 0;
    std::string out_path;
    auto* gen = app.add_subcommand("gen-queries", "write template-generated training queries");
    add_paths(gen, true, false, false);
    gen->add_option("--per-entry", per_entry, "queries per corpus entry")->required();
    gen->add_option("--seed", seed, "generation seed");
    gen->add_option("--out", out_path, "output file (default: stdout)");

    bool synthetic = false;
    std::string queries_path;
    std::optional<std::size_t> epochs, batch_size;
    std::optional<double> lr;
    auto* trn = app.add_subcommand("train", "fine-tune the encoder");
    add_paths(trn, true, true, false);
    trn->add_flag("--synthetic", synthetic, "generate training queries from the corpus");
    trn->add_option("--per-entry", per_entry, "synthetic queries per entry");
    trn->add_option("--queries", queries_path, "training queries JSON Lines file");
    trn->add_option("--seed", seed, "encoder and shuffle seed");
    trn->add_option("--epochs", epochs, "training epochs");
    trn->add_option("--batch-size", batch_size, "training batch size");
    trn->add_option("--lr", lr, "learning rate");

    auto* bidx = app.add_subcommand("build-index", "embed the corpus into an index file");
    add_paths(bidx, true, true, true);

    std::string query, profile_json;
    std::optional<std::size_t> k;
    bool context = false;
    auto* srch = app.add_subcommand("search", "retrieve the top-k functions for a query");
    add_paths(srch, true, true, true);
    srch->add_option("--query,-q", query, "natural-language request")->required();
    srch->add_option("--profile", profile_json, "query data profile as a JSON object");
    srch->add_option("--k", k, "number of results (default 10)");
    srch->add_flag("--context", context, "print the rendered documentation block");

    std::optional<std::vector<std::size_t>> cutoffs;
    auto* evl = app.add_subcommand("eval", "retrieval metrics over labelled queries");
    add_paths(evl, true, true, true);
    evl->add_option("--queries", queries_path, "EvalQuery JSON Lines file")->required();
    evl->add_option("--cutoffs", cutoffs, "metric cutoffs");
    evl->add_option("--out", out_path, "also write the report here");

    auto* bnch = app.add_subcommand("bench", "encoding latency and throughput");
    add_paths(bnch, false, true, false);
    bnch->add_option("--queries", queries_path, "query JSON Lines file")->required();
    bnch->add_option("--batch-size", batch_size, "throughput batch size (default 128)");
    bnch->add_option("--out", out_path, "also write the report here");

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.emplace_back("profret");
    for (auto& a : args) {
        argv_storage.push_back(std::move(a));
    }
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) {
        argv.push_back(a.c_str());
    }

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& ex) {
        err << "error: " << ex.what() << '\n';
        return static_cast<int>(ErrorKind::usage);
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
        if (corpus) cfg.corpus_path = *corpus;
        if (model) cfg.model_path = *model;
        if (index) cfg.index_path = *index;
        if (seed) {
            cfg.encoder.seed = *seed;
            cfg.train.shuffle_seed = *seed;
        }
        if (epochs) cfg.train.epochs = *epochs;
        if (lr) cfg.train.learning_rate = *lr;
        if (cutoffs) cfg.cutoffs = *cutoffs;
        if (batch_size) {
            (bnch->parsed() ? cfg.bench_batch_size : cfg.train.batch_size) = *batch_size;
        }

        if (ingest->parsed()) return cmd_ingest(cfg, out, err);
        if (gen->parsed()) return cmd_gen_queries(cfg, per_entry, out_path, out);
        if (trn->parsed()) return cmd_train(cfg, synthetic, per_entry, queries_path, out, err);
        if (bidx->parsed()) return cmd_build_index(cfg, out);
        if (srch->parsed()) return cmd_search(cfg, query, profile_json, k.value_or(10), context, out);
        if (evl->parsed()) return cmd_eval(cfg, queries_path, out_path, out);
        if (bnch->parsed()) return cmd_bench(cfg, queries_path, out_path, out);
        throw UsageError("no subcommand");
    } catch (const Error& ex) {
        err << "error: " << ex.what() << '\n';
        return ex.exit_code();
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return static_cast<int>(ErrorKind::numeric);
    }
}

} // namespace profret::cli
