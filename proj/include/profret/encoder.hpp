// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 profret Contributors

#pragma once

// Text encoders. Anything satisfying TextEncoder can drive indexing, evaluation
// and benchmarking; HashedNgramEncoder is the built-in trainable one:
//
//   text -> tokens -> hashed n-gram counts (L2-normalized) -> linear map -> R^m

#include "profret/error.hpp"
#include "profret/persist.hpp"
#include "profret/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace profret {

struct EncoderConfig {
    std::size_t hash_dim = std::size_t{1} << 16; // D
    std::size_t embed_dim = 64;                  // m
    std::vector<int> ngram_orders{1, 2};
    std::uint64_t seed = 0;

    void validate() const {
        if (hash_dim == 0 || embed_dim == 0) {
            throw UsageError("encoder: hash_dim and embed_dim must be positive");
        }
        if (embed_dim > hash_dim) {
            throw UsageError("encoder: embed_dim must not exceed hash_dim");
        }
        if (hash_dim > UINT32_MAX) {
            throw UsageError("encoder: hash_dim too large");
        }
        if (ngram_orders.empty()) {
            throw UsageError("encoder: ngram_orders must be non-empty");
        }
        for (std::size_t i = 0; i < ngram_orders.size(); ++i) {
            if (ngram_orders[i] <= 0 || (i > 0 && ngram_orders[i] <= ngram_orders[i - 1])) {
                throw UsageError("encoder: ngram_orders must be positive and strictly increasing");
            }
        }
    }

    bool operator==(const EncoderConfig&) const = default;
};

/// The m x D projection. Storage is bucket-major: the m weights for hash bucket
/// k are contiguous, since every access pattern (encode, gradient scatter) walks
/// the buckets present in one sparse input.
class EncoderParams {
public:
    EncoderParams() = default;
    EncoderParams(std::size_t embed_dim, std::size_t hash_dim)
        : embed_dim_(embed_dim), hash_dim_(hash_dim), data_(embed_dim * hash_dim, 0.0) {}

    std::size_t embed_dim() const noexcept { return embed_dim_; }
    std::size_t hash_dim() const noexcept { return hash_dim_; }

    double& at(std::size_t row, std::size_t col) { return data_[col * embed_dim_ + row]; }
    double at(std::size_t row, std::size_t col) const { return data_[col * embed_dim_ + row]; }

    std::span<double> column(std::size_t col) { return {data_.data() + col * embed_dim_, embed_dim_}; }
    std::span<const double> column(std::size_t col) const {
        return {data_.data() + col * embed_dim_, embed_dim_};
    }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    bool operator==(const EncoderParams&) const = default;

private:
    std::size_t embed_dim_ = 0;
    std::size_t hash_dim_ = 0;
    std::vector<double> data_;
};

struct SparseFeatures {
    std::vector<std::uint32_t> indices; // strictly increasing
    std::vector<double> values;         // > 0

    bool empty() const noexcept { return indices.empty(); }
    std::size_t size() const noexcept { return indices.size(); }

    bool operator==(const SparseFeatures&) const = default;
};

struct Embedding {
    std::vector<double> values;

    std::size_t dim() const noexcept { return values.size(); }
    double norm() const {
        double s = 0.0;
        for (const double v : values) {
            s += v * v;
        }
        return std::sqrt(s);
    }

    bool operator==(const Embedding&) const = default;
};

inline constexpr double kMinNorm = 1e-12;

// ---------------------------------------------------------------------------

/// Lowercases ASCII and splits on anything that is not a letter, digit or '_'.
/// Bytes >= 0x80 count as word characters so UTF-8 words stay whole.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (const char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        const bool word = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                          c == '_' || c >= 0x80;
        if (word) {
            current.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

/// Bucket of an n-gram string: FNV-1a 64 modulo D.
inline std::uint32_t feature_bucket(std::string_view gram, std::size_t hash_dim) {
    return static_cast<std::uint32_t>(fnv1a64(gram) % hash_dim);
}

inline SparseFeatures featurize(std::span<const std::string> tokens, const EncoderConfig& cfg) {
    std::vector<std::uint32_t> buckets;
    std::string gram;
    for (const int n : cfg.ngram_orders) {
        const auto order = static_cast<std::size_t>(n);
        if (tokens.size() < order) {
            continue;
        }
        for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
            gram = tokens[i];
            for (std::size_t k = 1; k < order; ++k) {
                gram += '_';
                gram += tokens[i + k];
            }
            buckets.push_back(feature_bucket(gram, cfg.hash_dim));
        }
    }
    std::sort(buckets.begin(), buckets.end());

    SparseFeatures f;
    for (std::size_t i = 0; i < buckets.size();) {
        std::size_t j = i;
        while (j < buckets.size() && buckets[j] == buckets[i]) {
            ++j;
        }
        f.indices.push_back(buckets[i]);
        f.values.push_back(static_cast<double>(j - i));
        i = j;
    }
    double sq = 0.0;
    for (const double v : f.values) {
        sq += v * v;
    }
    if (sq > 0.0) {
        const double inv = 1.0 / std::sqrt(sq);
        for (double& v : f.values) {
            v *= inv;
        }
    }
    return f;
}

inline SparseFeatures featurize_text(std::string_view text, const EncoderConfig& cfg) {
    const auto tokens = tokenize(text);
    return featurize(tokens, cfg);
}

/// e = P x. Throws NumericError("empty input text") for empty x.
inline Embedding encode(const EncoderParams& params, const SparseFeatures& x) {
    if (x.empty()) {
        throw NumericError("empty input text");
    }
    Embedding e{std::vector<double>(params.embed_dim(), 0.0)};
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (x.indices[k] >= params.hash_dim()) {
            throw UsageError("feature index out of range for this projection");
        }
        const auto col = params.column(x.indices[k]);
        const double w = x.values[k];
        for (std::size_t r = 0; r < col.size(); ++r) {
            e.values[r] += col[r] * w;
        }
    }
    return e;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

inline double cosine(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim()) {
        throw UsageError("cosine: dimension mismatch");
    }
    const double na = a.norm();
    const double nb = b.norm();
    if (na < kMinNorm || nb < kMinNorm) {
        throw NumericError("cosine: zero-norm operand");
    }
    return dot(a.values, b.values) / (na * nb);
}

// ---------------------------------------------------------------------------

/// Contract for pluggable encoders.
template <typename E>
concept TextEncoder = requires(const E& enc, std::string_view text) {
    { enc.encode_text(text) } -> std::same_as<Embedding>;
    { enc.dim() } -> std::convertible_to<std::size_t>;
};

/// Non-owning view pairing a config with a projection.
class HashedNgramEncoder {
public:
    HashedNgramEncoder(const EncoderConfig& cfg, const EncoderParams& params) : cfg_(&cfg), params_(&params) {
        if (params.embed_dim() != cfg.embed_dim || params.hash_dim() != cfg.hash_dim) {
            throw UsageError("encoder: projection shape does not match config");
        }
    }

    std::size_t dim() const noexcept { return cfg_->embed_dim; }
    const EncoderConfig& config() const noexcept { return *cfg_; }
    const EncoderParams& params() const noexcept { return *params_; }

    SparseFeatures features(std::string_view text) const { return featurize_text(text, *cfg_); }

    Embedding encode_text(std::string_view text) const { return encode(*params_, features(text)); }

private:
    const EncoderConfig* cfg_;
    const EncoderParams* params_;
};

static_assert(TextEncoder<HashedNgramEncoder>);

/// Entries i.i.d. uniform on [-1/sqrt(D), 1/sqrt(D)], drawn in storage order.
inline EncoderParams init_params(const EncoderConfig& cfg) {
    cfg.validate();
    EncoderParams p(cfg.embed_dim, cfg.hash_dim);
    const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.hash_dim));
    Rng rng(cfg.seed);
    for (double& v : p.values()) {
        v = rng.uniform(-bound, bound);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Model files
//
// Header fields: format, version, encoder{hash_dim, embed_dim, ngram_orders, seed},
// shape [m, D], layout "bucket-major" (payload is D groups of m values, i.e. the
// transpose of P in row-major order), plus optional log_tau and step_count for
// training checkpoints.

inline constexpr std::string_view kModelFormat = "profret-model";

struct ModelFile {
    EncoderConfig config;
    EncoderParams params;
    std::optional<double> log_tau;
    std::uint64_t step_count = 0;
};

inline nlohmann::ordered_json to_json(const EncoderConfig& cfg) {
    nlohmann::ordered_json j;
    j["hash_dim"] = cfg.hash_dim;
    j["embed_dim"] = cfg.embed_dim;
    j["ngram_orders"] = cfg.ngram_orders;
    j["seed"] = cfg.seed;
    return j;
}

inline EncoderConfig encoder_config_from_json(const nlohmann::json& j, EncoderConfig cfg = {}) {
    if (!j.is_object()) {
        throw DataError("encoder config must be an object");
    }
    try {
        if (j.contains("hash_dim")) cfg.hash_dim = j.at("hash_dim").get<std::size_t>();
        if (j.contains("embed_dim")) cfg.embed_dim = j.at("embed_dim").get<std::size_t>();
        if (j.contains("ngram_orders")) cfg.ngram_orders = j.at("ngram_orders").get<std::vector<int>>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& ex) {
        throw DataError(std::string("encoder config: ") + ex.what());
    }
    return cfg;
}

inline void write_model(std::ostream& out, const EncoderConfig& cfg, const EncoderParams& params,
                        std::optional<double> log_tau = std::nullopt, std::uint64_t step_count = 0) {
    nlohmann::ordered_json h;
    h["format"] = kModelFormat;
    h["version"] = 1;
    h["encoder"] = to_json(cfg);
    h["shape"] = {params.embed_dim(), params.hash_dim()};
    h["layout"] = "bucket-major";
    h["dtype"] = "float64-le";
    if (log_tau) {
        h["log_tau"] = *log_tau;
        h["step_count"] = step_count;
    }
    persist::write_header(out, h);
    persist::write_f64_block(out, params.values());
}

inline void save_model(const std::string& path, const EncoderConfig& cfg, const EncoderParams& params,
                       std::optional<double> log_tau = std::nullopt, std::uint64_t step_count = 0) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write model file \"" + path + "\"");
    }
    write_model(out, cfg, params, log_tau, step_count);
    if (!out) {
        throw DataError("failed writing model file \"" + path + "\"");
    }
}

inline ModelFile read_model(std::istream& in, const std::string& what = "model") {
    const auto h = persist::read_header(in, what);
    if (persist::header_get<std::string>(h, "format", what) != kModelFormat) {
        throw DataError(what + ": not a model file");
    }
    if (persist::header_get<std::string>(h, "layout", what) != "bucket-major" ||
        persist::header_get<std::string>(h, "dtype", what) != "float64-le") {
        throw DataError(what + ": unsupported payload layout");
    }
    ModelFile m;
    m.config = encoder_config_from_json(persist::header_get<nlohmann::json>(h, "encoder", what));
    try {
        m.config.validate();
    } catch (const UsageError& ex) {
        throw DataError(what + ": " + ex.what());
    }
    const auto shape = persist::header_get<std::vector<std::size_t>>(h, "shape", what);
    if (shape.size() != 2 || shape[0] != m.config.embed_dim || shape[1] != m.config.hash_dim) {
        throw DataError(what + ": shape does not match encoder config");
    }
    if (h.contains("log_tau")) {
        m.log_tau = persist::header_get<double>(h, "log_tau", what);
        m.step_count = persist::header_get<std::uint64_t>(h, "step_count", what);
    }
    m.params = EncoderParams(m.config.embed_dim, m.config.hash_dim);
    const auto values = persist::read_f64_block(in, m.params.values().size(), what);
    std::copy(values.begin(), values.end(), m.params.values().begin());
    if (!m.params.all_finite()) {
        throw DataError(what + ": non-finite weights");
    }
    return m;
}

inline ModelFile load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open model file \"" + path + "\"");
    }
    return read_model(in, path);
}

} // namespace profret
