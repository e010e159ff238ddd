// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 profret Contributors

#include "profret/context.hpp"
#include "profret/training.hpp"
#include "support/synthetic_corpus.hpp"
#include "support/temp_dir.hpp"

#include <gtest/gtest.h>

namespace profret {
namespace {

std::size_t count_of(const std::string& hay, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
    return n;
}

struct Fixture {
    Corpus corpus;
    EncoderConfig config;
    EncoderParams params;
    VectorStore store;

    explicit Fixture(Corpus c) : corpus(std::move(c)) {
        config.hash_dim = 4096;
        config.embed_dim = 16;
        config.seed = 4;
        params = init_params(config);
        store = build_index(corpus, HashedNgramEncoder(config, params));
    }
    HashedNgramEncoder encoder() const { return HashedNgramEncoder(config, params); }
};

QueryRecord query_for(const FunctionEntry& e) { return QueryRecord{e.ground_truth_doc, e.data_profile}; }

TEST(Context, SingleItemHasOneMarker) {
    const Fixture f(testing::synthetic_corpus(6, 3));
    const auto ctx = build_tool_context(f.store, f.corpus, f.encoder(), query_for(f.corpus[2]), 1);
    ASSERT_EQ(ctx.items.size(), 1u);
    EXPECT_EQ(ctx.items[0].fc_id, f.corpus[2].fc_id);
    const auto block = render_context_block(ctx);
    EXPECT_EQ(count_of(block, "[ID:"), 1u);
    EXPECT_EQ(block.rfind(kContextHeader, 0), 0u);
    EXPECT_NE(block.find("[ID: " + f.corpus[2].fc_id + "]"), std::string::npos);
}

TEST(Context, ItemsFollowSearchOrder) {
    const Fixture f(testing::synthetic_corpus(10, 5));
    const auto q = query_for(f.corpus[4]);
    const auto ctx = build_tool_context(f.store, f.corpus, f.encoder(), q, 4);
    const auto hits = search(f.store, f.encoder().encode_text(fuse_query_text(q)), 4);
    ASSERT_EQ(ctx.items.size(), hits.size());
    for (std::size_t i = 0; i < hits.size(); ++i) {
        EXPECT_EQ(ctx.items[i].fc_id, hits[i].fc_id);
        EXPECT_EQ(ctx.items[i].rank, i + 1);
        EXPECT_EQ(ctx.items[i].score, hits[i].score);
    }
    EXPECT_EQ(count_of(render_context_block(ctx), "[ID:"), 4u);
    EXPECT_EQ(ctx.k_requested, 4u);
}

TEST(Context, EmptyExampleSectionOmitted) {
    const Fixture f(testing::synthetic_corpus(6, 3));
    ASSERT_TRUE(f.corpus[0].example_code.empty());
    ASSERT_FALSE(f.corpus[1].example_code.empty());
    auto ctx = build_tool_context(f.store, f.corpus, f.encoder(), query_for(f.corpus[0]), 1);
    ASSERT_EQ(ctx.items[0].fc_id, f.corpus[0].fc_id);
    EXPECT_EQ(render_context_block(ctx).find("Example:"), std::string::npos);
    ctx = build_tool_context(f.store, f.corpus, f.encoder(), query_for(f.corpus[1]), 1);
    ASSERT_EQ(ctx.items[0].fc_id, f.corpus[1].fc_id);
    EXPECT_NE(render_context_block(ctx).find("Example:"), std::string::npos);
}

TEST(Context, RenderingIsDeterministic) {
    const Fixture f(testing::synthetic_corpus(12, 9));
    const auto q = query_for(f.corpus[7]);
    const auto a = render_context_block(build_tool_context(f.store, f.corpus, f.encoder(), q, 5));
    const auto b = render_context_block(build_tool_context(f.store, f.corpus, f.encoder(), q, 5));
    EXPECT_EQ(a, b);
}

TEST(Context, RejectsZeroK) {
    const Fixture f(testing::synthetic_corpus(3, 1));
    EXPECT_THROW(build_tool_context(f.store, f.corpus, f.encoder(), query_for(f.corpus[0]), 0), UsageError);
}

TEST(Context, MissingCorpusEntryIsDataError) {
    const Fixture f(testing::synthetic_corpus(3, 1));
    const Corpus partial(std::vector<FunctionEntry>{f.corpus[0]});
    EXPECT_THROW(build_tool_context(f.store, partial, f.encoder(), query_for(f.corpus[0]), 3), DataError);
}

TEST(Context, UsagePassedThroughVerbatim) {
    auto entries = testing::synthetic_corpus(2, 1).entries();
    entries[1].usage_guidance = "fit(x, y,\n    weights = NULL)  # trailing";
    const Fixture f{Corpus(entries)};
    const auto ctx = build_tool_context(f.store, f.corpus, f.encoder(), query_for(f.corpus[1]), 2);
    bool seen = false;
    for (const auto& item : ctx.items) {
        if (item.fc_id == f.corpus[1].fc_id) {
            EXPECT_EQ(item.usage_guidance, entries[1].usage_guidance);
            seen = true;
        }
    }
    EXPECT_TRUE(seen);
    const auto block = render_context_block(ctx);
    EXPECT_NE(block.find("fit(x, y,\n"), std::string::npos);
    EXPECT_NE(block.find("    weights = NULL)  # trailing\n"), std::string::npos);
}

TEST(Context, ToJson) {
    const Fixture f(testing::synthetic_corpus(5, 2));
    const auto ctx = build_tool_context(f.store, f.corpus, f.encoder(), query_for(f.corpus[3]), 2);
    const auto j = to_json(ctx);
    EXPECT_EQ(j["k"], 2);
    ASSERT_EQ(j["items"].size(), 2u);
    EXPECT_EQ(j["items"][0]["rank"], 1);
    EXPECT_EQ(j["items"][0]["fc_id"], ctx.items[0].fc_id);
    EXPECT_EQ(j["items"][0]["package_name"], std::string(f.corpus.find(ctx.items[0].fc_id)->package_name()));
    EXPECT_TRUE(j["items"][1]["data_profile"].contains("data_modality"));
}

TEST(Truncate, RespectsBudget) {
    EXPECT_EQ(truncate_utf8("abcdef", 10), "abcdef");
    EXPECT_EQ(truncate_utf8("abcdef", 6), "abcdef");
    EXPECT_EQ(truncate_utf8("abcdef", 3), "abc" + std::string(kTruncationMarker));
    EXPECT_EQ(truncate_utf8("", 0), "");
    // "é" is two bytes and "€" three; the cut must land on a code point boundary.
    const std::string s = "a\xC3\xA9\xE2\x82\xAC" "b";
    EXPECT_EQ(truncate_utf8(s, 2), "a\xC3\xA9" + std::string(kTruncationMarker));
    EXPECT_EQ(truncate_utf8(s, 3), "a\xC3\xA9\xE2\x82\xAC" + std::string(kTruncationMarker));
    EXPECT_EQ(truncate_utf8(s, 4), s);
}

TEST(Truncate, AppliedToDescriptions) {
    auto entries = testing::synthetic_corpus(2, 1).entries();
    entries[0].ground_truth_doc = std::string(500, 'x') + " tail words";
    const Fixture f{Corpus(entries)};
    const auto ctx = build_tool_context(f.store, f.corpus, f.encoder(), query_for(f.corpus[0]), 2,
                                        ContextOptions{100});
    for (const auto& item : ctx.items) {
        if (item.fc_id == f.corpus[0].fc_id) {
            EXPECT_EQ(item.description, std::string(100, 'x') + std::string(kTruncationMarker));
        }
    }
}

// The genomic case study: a request for regulatory-score estimation on count
// data should surface sharpr2 ahead of its package page and call_sig_reg.
TEST(Context, RegulatoryScoreQueryFindsSharpr2) {
    const auto family = load_corpus(std::string(PROFRET_TEST_DATA) + "/sharpr2_entries.jsonl");
    auto entries = testing::synthetic_corpus(60, 31).entries();
    for (const auto& e : family.entries()) entries.push_back(e);
    const Corpus corpus(entries);

    EncoderConfig enc;
    enc.hash_dim = std::size_t{1} << 14;
    enc.seed = 3;
    TrainConfig cfg;
    cfg.batch_size = 64;
    cfg.epochs = 12;
    cfg.learning_rate = 1e-3;
    cfg.shuffle_seed = 5;
    const auto triples = generate_synthetic_triples(corpus, 10, 11);
    const auto result = train(corpus, triples, enc, cfg);
    const HashedNgramEncoder encoder(result.best.encoder, result.best.params);
    const auto store = build_index(corpus, encoder);

    QueryRecord q;
    q.query_text =
        "I have a high-dimensional genomic dataset named hidra_ex_1_2000.csv in my environment. I need to identify "
        "driver elements by estimating regulatory scores based on the counts provided in the data.";
    q.query_profile.data_modality = DataModality::genomic_sequence;
    q.query_profile.feature_type = FeatureType::numerical;
    q.query_profile.distribution_assumption = "poisson";
    q.query_profile.dimensionality = Dimensionality::high;

    const auto ctx = build_tool_context(store, corpus, encoder, q, 3);
    ASSERT_EQ(ctx.items.size(), 3u);
    EXPECT_EQ(ctx.items[0].fc_id, "Estimating_Regulatory_Scores_and_Identifying_ATAC-STARR_Data::sharpr2");
    EXPECT_EQ(ctx.items[0].function_name, "sharpr2");
    const auto block = render_context_block(ctx);
    EXPECT_NE(block.find("f_dna = 5"), std::string::npos);
    EXPECT_EQ(count_of(block, "[ID:"), 3u);
}

} // namespace
} // namespace profret
