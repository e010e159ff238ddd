// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 profret Contributors

#include "profret/cli.hpp"
#include "support/synthetic_corpus.hpp"
#include "support/temp_dir.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace profret {
namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

std::size_t line_count(const std::string& s) {
    std::size_t n = 0;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);) {
        if (!line.empty()) ++n;
    }
    return n;
}

void write_corpus_file(const std::string& path, const Corpus& corpus) {
    std::ofstream f(path);
    write_corpus(f, corpus);
}

void write_queries(const std::string& path, const std::vector<QueryLine>& lines) {
    std::ofstream f(path);
    for (const auto& q : lines) f << to_json(q).dump() << '\n';
}

/// One small trained model shared by the read-only commands.
class CliModel : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = new testing::TempDir();
        corpus_ = new Corpus(testing::synthetic_corpus(40, 17));
        write_corpus_file(corpus_path(), *corpus_);
        write_text(config_path(), R"({"encoder": {"hash_dim": 4096, "embed_dim": 16},
                                    "train": {"epochs": 2, "batch_size": 32, "learning_rate": 0.001}})");
        const auto r = run({"train", "--config", config_path(), "--corpus", corpus_path(), "--model", model_path(),
                            "--synthetic", "--per-entry", "5", "--seed", "9"});
        ASSERT_EQ(r.code, 0) << r.err;
    }
    static void TearDownTestSuite() {
        delete corpus_;
        delete dir_;
    }

    static void write_text(const std::string& path, const std::string& text) { testing::write_text(path, text); }
    static std::string corpus_path() { return dir_->file("corpus.jsonl"); }
    static std::string config_path() { return dir_->file("config.json"); }
    static std::string model_path() { return dir_->file("model.bin"); }

    static testing::TempDir* dir_;
    static Corpus* corpus_;
};

testing::TempDir* CliModel::dir_ = nullptr;
Corpus* CliModel::corpus_ = nullptr;

TEST(CliIngest, ExampleRecordsOk) {
    const auto r = run({"ingest", "--corpus", testing::example_records_path()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("3 entries OK"), std::string::npos) << r.out;
}

TEST(CliIngest, DuplicateIsDataError) {
    testing::TempDir dir;
    std::ifstream in(testing::example_records_path());
    std::string first;
    std::getline(in, first);
    testing::write_text(dir.file("dup.jsonl"), first + "\n" + first + "\n");
    const auto r = run({"ingest", "--corpus", dir.file("dup.jsonl")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("duplicate"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST(CliIngest, EmptyCorpus) {
    testing::TempDir dir;
    testing::write_text(dir.file("empty.jsonl"), "\n");
    const auto r = run({"ingest", "--corpus", dir.file("empty.jsonl")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("empty corpus"), std::string::npos) << r.err;
}

TEST(CliUsage, ExitsWithOne) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"search", "--model", "m.bin"}).code, 1); // --query is required
    EXPECT_EQ(run({"gen-queries", "--corpus", "c.jsonl"}).code, 1);
    EXPECT_EQ(run({"ingest"}).code, 1); // no corpus path anywhere
    EXPECT_EQ(run({"train", "--corpus", testing::example_records_path(), "--model", "m.bin"}).code, 1);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(CliTrain, MissingCorpusFails) {
    testing::TempDir dir;
    const auto r = run({"train", "--corpus", dir.file("nope.jsonl"), "--model", dir.file("m.bin"), "--synthetic",
                        "--per-entry", "2"});
    EXPECT_NE(r.code, 0);
    EXPECT_FALSE(std::filesystem::exists(dir.file("m.bin")));
}

TEST_F(CliModel, TrainWritesCheckpointAndLog) {
    EXPECT_TRUE(std::filesystem::exists(model_path()));
    const auto model = load_model(model_path());
    EXPECT_EQ(model.config.hash_dim, 4096u);
    EXPECT_EQ(model.config.embed_dim, 16u);
    EXPECT_EQ(model.config.seed, 9u);
    std::ifstream log(cli::epoch_log_path(model_path()));
    std::stringstream text;
    text << log.rdbuf();
    EXPECT_EQ(line_count(text.str()), 2u);
    std::istringstream lines(text.str());
    std::string first;
    std::getline(lines, first);
    const auto j = nlohmann::json::parse(first);
    EXPECT_EQ(j["epoch"], 1);
    EXPECT_TRUE(j.contains("ndcg@10"));
}

TEST_F(CliModel, SearchTopK) {
    const auto r = run({"search", "--model", model_path(), "--corpus", corpus_path(), "-q",
                        (*corpus_)[3].ground_truth_doc, "--k", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(line_count(r.out), 3u);
    EXPECT_EQ(r.out.rfind("1\t", 0), 0u);
}

TEST_F(CliModel, SearchWithIndexFile) {
    const auto index = dir_->file("corpus.idx");
    const auto b = run({"build-index", "--model", model_path(), "--corpus", corpus_path(), "--index", index});
    ASSERT_EQ(b.code, 0) << b.err;
    const auto viaIndex = run({"search", "--model", model_path(), "--index", index, "-q", "estimate density"});
    const auto viaCorpus = run({"search", "--model", model_path(), "--corpus", corpus_path(), "-q", "estimate density"});
    ASSERT_EQ(viaIndex.code, 0) << viaIndex.err;
    EXPECT_EQ(viaIndex.out, viaCorpus.out);
    EXPECT_EQ(line_count(viaIndex.out), 10u);
}

TEST_F(CliModel, SearchContextBlock) {
    const auto r = run({"search", "--model", model_path(), "--corpus", corpus_path(), "-q", "cluster networks",
                        "--profile", R"({"data_modality": "graph"})", "--k", "2", "--context"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("Retrieved R Documentation", 0), 0u);
    EXPECT_NE(r.out.find("2. [ID: "), std::string::npos);
}

TEST_F(CliModel, SearchErrors) {
    auto r = run({"search", "--model", model_path(), "--corpus", corpus_path(), "-q", "?!... --"});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("empty input text"), std::string::npos) << r.err;
    r = run({"search", "--model", model_path(), "--corpus", corpus_path(), "-q", "x", "--profile",
             R"({"data_modality": "spreadsheet"})"});
    EXPECT_EQ(r.code, 2);
    r = run({"search", "--model", model_path(), "--corpus", corpus_path(), "-q", "x", "--k", "0"});
    EXPECT_EQ(r.code, 1);
    r = run({"search", "--model", dir_->file("missing.bin"), "--corpus", corpus_path(), "-q", "x"});
    EXPECT_EQ(r.code, 2);
}

TEST_F(CliModel, EvalReport) {
    // A query that is exactly an entry's fused document text ranks it first.
    const auto& e = (*corpus_)[5];
    const auto qpath = dir_->file("eval_one.jsonl");
    write_queries(qpath, {QueryLine{QueryRecord{e.ground_truth_doc, e.data_profile}, e.fc_id}});
    const auto r = run({"eval", "--model", model_path(), "--corpus", corpus_path(), "--queries", qpath});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    ASSERT_TRUE(j.contains("1"));
    ASSERT_TRUE(j.contains("10"));
    for (const char* k : {"1", "10"}) {
        EXPECT_EQ(j[k]["recall"], 1.0);
        EXPECT_EQ(j[k]["ndcg"], 1.0);
        EXPECT_EQ(j[k]["mrr"], 1.0);
    }

    const auto out = dir_->file("eval.json");
    const auto r2 = run({"eval", "--model", model_path(), "--corpus", corpus_path(), "--queries", qpath,
                         "--cutoffs", "1", "5", "--out", out});
    ASSERT_EQ(r2.code, 0) << r2.err;
    std::ifstream f(out);
    const auto written = nlohmann::json::parse(f);
    EXPECT_TRUE(written.contains("5"));
    EXPECT_FALSE(written.contains("10"));
}

TEST_F(CliModel, EvalUnknownGroundTruth) {
    const auto qpath = dir_->file("eval_ghost.jsonl");
    write_queries(qpath, {QueryLine{QueryRecord{"estimate density", {}}, std::string("ghost::fn")}});
    const auto r = run({"eval", "--model", model_path(), "--corpus", corpus_path(), "--queries", qpath});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("ghost::fn"), std::string::npos) << r.err;
}

TEST_F(CliModel, GenQueriesThenBench) {
    const auto qpath = dir_->file("bench_queries.jsonl");
    const auto g = run({"gen-queries", "--corpus", corpus_path(), "--per-entry", "13", "--seed", "2", "--out", qpath});
    ASSERT_EQ(g.code, 0) << g.err;
    EXPECT_EQ(load_queries(qpath).size(), 520u);

    const auto r = run({"bench", "--model", model_path(), "--queries", qpath, "--batch-size", "64"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["query_count"], 520);
    EXPECT_EQ(j["batch_size"], 64);
    EXPECT_GT(j["latency_ms"].get<double>(), 0.0);
    EXPECT_GT(j["qps"].get<double>(), 0.0);
}

TEST_F(CliModel, GenQueriesToStdoutIsDeterministic) {
    const auto a = run({"gen-queries", "--corpus", corpus_path(), "--per-entry", "2", "--seed", "4"});
    const auto b = run({"gen-queries", "--corpus", corpus_path(), "--per-entry", "2", "--seed", "4"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(line_count(a.out), 80u);
}

TEST_F(CliModel, ConfigFromEnvironment) {
    const auto cfg = dir_->file("env_config.json");
    write_text(cfg, nlohmann::json{{"corpus_path", corpus_path()}, {"model_path", model_path()}}.dump());
    ::setenv(cli::kConfigEnv, cfg.c_str(), 1);
    const auto r = run({"search", "-q", "estimate density", "--k", "2"});
    ::unsetenv(cli::kConfigEnv);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(line_count(r.out), 2u);
}

TEST_F(CliModel, BadConfigIsDataError) {
    const auto cfg = dir_->file("bad_config.json");
    write_text(cfg, "{not json");
    EXPECT_EQ(run({"ingest", "--config", cfg, "--corpus", corpus_path()}).code, 2);
    write_text(cfg, R"({"encoder": {"hash_dim": "big"}})");
    EXPECT_EQ(run({"ingest", "--config", cfg, "--corpus", corpus_path()}).code, 2);
}

} // namespace
} // namespace profret
