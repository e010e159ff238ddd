// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 profret Contributors

#include "profret/encoder.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace profret {
namespace {

using Tokens = std::vector<std::string>;

EncoderConfig small_config(std::size_t d, std::size_t m, std::uint64_t seed = 1) {
    EncoderConfig c;
    c.hash_dim = d;
    c.embed_dim = m;
    c.seed = seed;
    return c;
}

// Independent FNV-1a 64 reference using the published test vectors.
TEST(Hash, Fnv1aVectors) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Tokenize, Examples) {
    EXPECT_EQ(tokenize("Fit a GLM (Poisson)!"), (Tokens{"fit", "a", "glm", "poisson"}));
    EXPECT_EQ(tokenize(""), Tokens{});
    EXPECT_EQ(tokenize("glm.nb"), (Tokens{"glm", "nb"}));
    EXPECT_EQ(tokenize("log_tau  x2\tY"), (Tokens{"log_tau", "x2", "y"}));
    EXPECT_EQ(tokenize("?!... --"), Tokens{});
}

TEST(Featurize, RepeatedUnigram) {
    auto cfg = small_config(1 << 16, 8);
    cfg.ngram_orders = {1};
    const auto f = featurize(Tokens{"a", "a"}, cfg);
    ASSERT_EQ(f.size(), 1u);
    EXPECT_EQ(f.indices[0], fnv1a64("a") % cfg.hash_dim);
    EXPECT_DOUBLE_EQ(f.values[0], 1.0);
}

TEST(Featurize, EmptyTokens) {
    EXPECT_TRUE(featurize(Tokens{}, small_config(64, 4)).empty());
}

TEST(Featurize, UnigramsAndBigram) {
    const auto cfg = small_config(1 << 16, 8);
    const auto f = featurize(Tokens{"a", "b"}, cfg);
    ASSERT_EQ(f.size(), 3u);
    std::vector<std::uint32_t> expected{feature_bucket("a", cfg.hash_dim), feature_bucket("b", cfg.hash_dim),
                                        feature_bucket("a_b", cfg.hash_dim)};
    std::sort(expected.begin(), expected.end());
    EXPECT_EQ(f.indices, expected);
    for (const double v : f.values) {
        EXPECT_NEAR(v, 1.0 / std::sqrt(3.0), 1e-15);
    }
}

TEST(Featurize, CollisionsAccumulateAndNormalize) {
    // D = 1 sends every n-gram to bucket 0.
    auto cfg = small_config(1, 1);
    const auto f = featurize(Tokens{"x", "y", "z"}, cfg);
    ASSERT_EQ(f.size(), 1u);
    EXPECT_EQ(f.indices[0], 0u);
    EXPECT_DOUBLE_EQ(f.values[0], 1.0);
}

TEST(Featurize, SortedPositiveUnitNorm) {
    const auto cfg = small_config(97, 4);
    const auto f = featurize_text("the quick brown fox jumps over the lazy dog the end", cfg);
    double sq = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (i > 0) {
            EXPECT_LT(f.indices[i - 1], f.indices[i]);
        }
        EXPECT_GT(f.values[i], 0.0);
        EXPECT_LT(f.indices[i], 97u);
        sq += f.values[i] * f.values[i];
    }
    EXPECT_NEAR(sq, 1.0, 1e-12);
    EXPECT_EQ(f, featurize_text("the quick brown fox jumps over the lazy dog the end", cfg));
}

TEST(Encode, EmptyFeaturesRejected) {
    const auto cfg = small_config(16, 4);
    const auto p = init_params(cfg);
    try {
        encode(p, SparseFeatures{});
        FAIL();
    } catch (const NumericError& ex) {
        EXPECT_STREQ(ex.what(), "empty input text");
    }
}

TEST(Encode, ZeroProjectionGivesZeroEmbedding) {
    const EncoderParams zero(4, 16);
    const auto e = encode(zero, SparseFeatures{{3, 7}, {0.6, 0.8}});
    EXPECT_EQ(e.values, std::vector<double>(4, 0.0));
}

TEST(Encode, IdentityProjection) {
    EncoderParams eye(5, 5);
    for (std::size_t i = 0; i < 5; ++i) {
        eye.at(i, i) = 1.0;
    }
    for (std::uint32_t j = 0; j < 5; ++j) {
        const auto e = encode(eye, SparseFeatures{{j}, {1.0}});
        for (std::size_t r = 0; r < 5; ++r) {
            EXPECT_EQ(e.values[r], r == j ? 1.0 : 0.0);
        }
    }
}

TEST(Encode, Linear) {
    const auto cfg = small_config(32, 6, 9);
    const auto p = init_params(cfg);
    const SparseFeatures x1{{1, 4, 9}, {0.5, 0.25, 2.0}};
    const SparseFeatures x2{{4, 20}, {1.5, 0.75}};
    const SparseFeatures sum{{1, 4, 9, 20}, {0.5, 1.75, 2.0, 0.75}};
    const auto a = encode(p, x1);
    const auto b = encode(p, x2);
    const auto c = encode(p, sum);
    for (std::size_t r = 0; r < 6; ++r) {
        EXPECT_NEAR(c.values[r], a.values[r] + b.values[r], 1e-14);
    }
}

TEST(Encode, MatchesDenseProduct) {
    const auto cfg = small_config(12, 4, 5);
    const auto p = init_params(cfg);
    const SparseFeatures x{{0, 5, 11}, {0.2, 0.3, 0.9}};
    const auto e = encode(p, x);
    std::vector<double> dense(12, 0.0);
    dense[0] = 0.2;
    dense[5] = 0.3;
    dense[11] = 0.9;
    for (std::size_t r = 0; r < 4; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < 12; ++c) {
            s += p.at(r, c) * dense[c];
        }
        EXPECT_NEAR(e.values[r], s, 1e-15);
    }
}

TEST(Cosine, Examples) {
    EXPECT_DOUBLE_EQ(cosine({{1, 0}}, {{1, 0}}), 1.0);
    EXPECT_DOUBLE_EQ(cosine({{1, 0}}, {{0, 1}}), 0.0);
    EXPECT_NEAR(cosine({{1, 1}}, {{1, 0}}), 0.70710678, 1e-8);
    EXPECT_THROW(cosine({{0, 0}}, {{1, 0}}), NumericError);
    EXPECT_THROW(cosine({{1, 0}}, {{1e-13, 0}}), NumericError);
}

TEST(Cosine, SymmetryScaleAndBounds) {
    Rng rng(17);
    for (int t = 0; t < 200; ++t) {
        Embedding a, b;
        for (int i = 0; i < 7; ++i) {
            a.values.push_back(rng.uniform(-1, 1));
            b.values.push_back(rng.uniform(-1, 1));
        }
        EXPECT_EQ(cosine(a, b), cosine(b, a));
        EXPECT_LE(std::abs(cosine(a, b)), 1.0 + 1e-12);
        Embedding scaled = a;
        const double c = rng.uniform(0.01, 100.0);
        for (double& v : scaled.values) {
            v *= c;
        }
        EXPECT_NEAR(cosine(a, scaled), 1.0, 1e-12);
    }
}

TEST(Cosine, ScaledParamsKeepScores) {
    const auto cfg = small_config(64, 8, 2);
    const auto p = init_params(cfg);
    auto p3 = p;
    for (double& v : p3.values()) {
        v *= 3.0;
    }
    const HashedNgramEncoder e1(cfg, p), e3(cfg, p3);
    const auto q = "fit a poisson model";
    const auto d = "poisson regression for counts";
    EXPECT_NEAR(cosine(e1.encode_text(q), e1.encode_text(d)), cosine(e3.encode_text(q), e3.encode_text(d)), 1e-12);
}

TEST(InitParams, SeededAndBounded) {
    const auto cfg = small_config(100, 8, 42);
    const auto a = init_params(cfg);
    EXPECT_EQ(a, init_params(cfg));
    EXPECT_NE(a, init_params(small_config(100, 8, 43)));
    const double bound = 1.0 / std::sqrt(100.0);
    for (const double v : a.values()) {
        EXPECT_GE(v, -bound);
        EXPECT_LE(v, bound);
    }
}

TEST(Config, Validation) {
    EXPECT_NO_THROW(EncoderConfig{}.validate());
    auto c = small_config(4, 8);
    EXPECT_THROW(c.validate(), UsageError);
    c = small_config(16, 4);
    c.ngram_orders = {};
    EXPECT_THROW(c.validate(), UsageError);
    c.ngram_orders = {2, 1};
    EXPECT_THROW(c.validate(), UsageError);
    c.ngram_orders = {1, 1};
    EXPECT_THROW(c.validate(), UsageError);
    c.ngram_orders = {0};
    EXPECT_THROW(c.validate(), UsageError);
}

TEST(ModelFile, BitExactRoundTrip) {
    auto cfg = small_config(257, 7, 99);
    cfg.ngram_orders = {1, 2, 3};
    auto p = init_params(cfg);
    p.at(0, 0) = 0.1 + 0.2; // not representable in short decimal
    p.at(6, 256) = -0.0;
    p.at(3, 3) = 5e-324;
    std::stringstream buf;
    write_model(buf, cfg, p, -2.659260036932778, 12);
    const auto m = read_model(buf);
    EXPECT_EQ(m.config.hash_dim, cfg.hash_dim);
    EXPECT_EQ(m.config.embed_dim, cfg.embed_dim);
    EXPECT_EQ(m.config.ngram_orders, cfg.ngram_orders);
    EXPECT_EQ(m.config.seed, cfg.seed);
    ASSERT_EQ(m.params.values().size(), p.values().size());
    EXPECT_EQ(std::memcmp(m.params.values().data(), p.values().data(), p.values().size() * sizeof(double)), 0);
    EXPECT_EQ(m.log_tau.value(), -2.659260036932778);
    EXPECT_EQ(m.step_count, 12u);

    std::stringstream again;
    write_model(again, m.config, m.params, m.log_tau, m.step_count);
    buf.clear();
    buf.seekg(0);
    EXPECT_EQ(again.str(), buf.str());
}

TEST(ModelFile, RejectsCorruption) {
    const auto cfg = small_config(16, 4);
    const auto p = init_params(cfg);
    std::stringstream buf;
    write_model(buf, cfg, p);
    const auto bytes = buf.str();

    std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
    EXPECT_THROW(read_model(truncated), DataError);
    std::stringstream extra(bytes + "x");
    EXPECT_THROW(read_model(extra), DataError);
    std::stringstream garbage("not a header\n");
    EXPECT_THROW(read_model(garbage), DataError);
    std::stringstream plain(bytes);
    EXPECT_FALSE(read_model(plain).log_tau.has_value());
}

} // namespace
} // namespace profret
