// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 profret Contributors

#pragma once

// Contrastive fine-tuning of the hashed n-gram encoder.
//
// For a batch of N (query, target document) pairs the loss is the mean over rows
// of the softmax cross-entropy of S / tau against the diagonal, where
// S[i][j] = cos(P x_i, P y_j). Every other document in the batch is a negative,
// including duplicates of the row's own target. tau = exp(log_tau) is trained
// alongside the projection P; gradients are derived by hand and checked against
// finite differences in the test suite.

#include "profret/corpus.hpp"
#include "profret/encoder.hpp"
#include "profret/error.hpp"
#include "profret/evaluation.hpp"
#include "profret/index.hpp"
#include "profret/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace profret {

struct TrainingTriple {
    QueryRecord query;
    std::string target_fc_id;
};

struct TrainConfig {
    std::size_t batch_size = 256;
    std::size_t epochs = 100;
    double learning_rate = 1e-4;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double tau_init = 0.07;
    double split_fraction = 0.85;
    std::uint64_t shuffle_seed = 0;

    void validate() const {
        if (batch_size < 2) {
            throw UsageError("train: batch_size must be at least 2");
        }
        if (!(learning_rate > 0.0) || !(weight_decay >= 0.0) || !(epsilon > 0.0)) {
            throw UsageError("train: learning_rate and epsilon must be positive, weight_decay non-negative");
        }
        if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
            throw UsageError("train: beta1 and beta2 must lie in [0, 1)");
        }
        if (!(tau_init > 0.0) || !std::isfinite(tau_init)) {
            throw UsageError("train: tau_init must be positive");
        }
        if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
            throw UsageError("train: split_fraction must lie in (0, 1)");
        }
    }
};

inline nlohmann::ordered_json to_json(const TrainConfig& c) {
    return {{"batch_size", c.batch_size},     {"epochs", c.epochs},       {"learning_rate", c.learning_rate},
            {"weight_decay", c.weight_decay}, {"beta1", c.beta1},         {"beta2", c.beta2},
            {"epsilon", c.epsilon},           {"tau_init", c.tau_init},   {"split_fraction", c.split_fraction},
            {"shuffle_seed", c.shuffle_seed}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c = {}) {
    if (!j.is_object()) {
        throw DataError("train config must be an object");
    }
    try {
        if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<std::size_t>();
        if (j.contains("epochs")) c.epochs = j.at("epochs").get<std::size_t>();
        if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate").get<double>();
        if (j.contains("weight_decay")) c.weight_decay = j.at("weight_decay").get<double>();
        if (j.contains("beta1")) c.beta1 = j.at("beta1").get<double>();
        if (j.contains("beta2")) c.beta2 = j.at("beta2").get<double>();
        if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
        if (j.contains("tau_init")) c.tau_init = j.at("tau_init").get<double>();
        if (j.contains("split_fraction")) c.split_fraction = j.at("split_fraction").get<double>();
        if (j.contains("shuffle_seed")) c.shuffle_seed = j.at("shuffle_seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& ex) {
        throw DataError(std::string("train config: ") + ex.what());
    }
    return c;
}

/// Parameters plus AdamW moments. Owned exclusively by the training loop.
struct TrainState {
    EncoderConfig encoder;
    EncoderParams params;
    double log_tau = 0.0;
    EncoderParams moment1; // same shape as params
    EncoderParams moment2;
    double tau_moment1 = 0.0;
    double tau_moment2 = 0.0;
    std::uint64_t step_count = 0;

    double tau() const { return std::exp(log_tau); }
    HashedNgramEncoder view() const { return HashedNgramEncoder(encoder, params); }
};

inline TrainState init_train_state(const EncoderConfig& enc, const TrainConfig& cfg) {
    enc.validate();
    cfg.validate();
    TrainState s;
    s.encoder = enc;
    s.params = init_params(enc);
    s.log_tau = std::log(cfg.tau_init);
    s.moment1 = EncoderParams(enc.embed_dim, enc.hash_dim);
    s.moment2 = EncoderParams(enc.embed_dim, enc.hash_dim);
    return s;
}

/// The parts of a TrainState that are persisted and served.
struct Checkpoint {
    EncoderConfig encoder;
    EncoderParams params;
    double log_tau = 0.0;
    std::uint64_t step_count = 0;

    HashedNgramEncoder view() const { return HashedNgramEncoder(encoder, params); }
};

inline Checkpoint checkpoint_of(const TrainState& s) { return {s.encoder, s.params, s.log_tau, s.step_count}; }

inline void save_checkpoint(const std::string& path, const Checkpoint& c) {
    save_model(path, c.encoder, c.params, c.log_tau, c.step_count);
}

// ---------------------------------------------------------------------------
// Dataset split

/// Seeded shuffle, then the first floor(fraction * M) triples train and the rest
/// test; the train side is clamped to [1, M - 1] so neither side is empty.
inline std::pair<std::vector<TrainingTriple>, std::vector<TrainingTriple>>
split_dataset(std::span<const TrainingTriple> triples, const TrainConfig& cfg) {
    if (triples.size() < 2) {
        throw UsageError("split: need at least two triples");
    }
    if (!(cfg.split_fraction > 0.0 && cfg.split_fraction < 1.0)) {
        throw UsageError("split: fraction must lie in (0, 1)");
    }
    std::vector<std::size_t> order(triples.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    Rng rng(cfg.shuffle_seed);
    rng.shuffle(order);

    const auto m = triples.size();
    auto n_train = static_cast<std::size_t>(std::floor(cfg.split_fraction * static_cast<double>(m)));
    n_train = std::clamp<std::size_t>(n_train, 1, m - 1);

    std::pair<std::vector<TrainingTriple>, std::vector<TrainingTriple>> out;
    out.first.reserve(n_train);
    out.second.reserve(m - n_train);
    for (std::size_t i = 0; i < m; ++i) {
        (i < n_train ? out.first : out.second).push_back(triples[order[i]]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Forward pass

/// Row-major dense matrix for the N x N similarity block and its gradient.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    bool operator==(const Matrix&) const = default;
};

struct FeaturePair {
    const SparseFeatures* query;
    const SparseFeatures* target;
};

namespace detail {

/// Embeddings of both sides of a batch, their norms and unit directions.
struct BatchForward {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<double> q_unit, f_unit; // n x m
    std::vector<double> q_norm, f_norm; // n
    Matrix sim;
};

inline BatchForward forward_batch(const EncoderParams& params, std::span<const FeaturePair> batch) {
    BatchForward fw;
    fw.n = batch.size();
    fw.m = params.embed_dim();
    fw.q_unit.resize(fw.n * fw.m);
    fw.f_unit.resize(fw.n * fw.m);
    fw.q_norm.resize(fw.n);
    fw.f_norm.resize(fw.n);
    auto embed_side = [&](const SparseFeatures& x, std::size_t row, std::vector<double>& unit,
                          std::vector<double>& norms, const char* side) {
        if (x.empty()) {
            throw NumericError(std::string("batch row ") + std::to_string(row) + ": empty " + side + " features");
        }
        const auto e = encode(params, x);
        const double nrm = e.norm();
        if (!(nrm >= kMinNorm) || !std::isfinite(nrm)) {
            throw NumericError(std::string("batch row ") + std::to_string(row) + ": zero-norm " + side +
                               " embedding");
        }
        norms[row] = nrm;
        for (std::size_t r = 0; r < fw.m; ++r) {
            unit[row * fw.m + r] = e.values[r] / nrm;
        }
    };
    for (std::size_t i = 0; i < fw.n; ++i) {
        embed_side(*batch[i].query, i, fw.q_unit, fw.q_norm, "query");
        embed_side(*batch[i].target, i, fw.f_unit, fw.f_norm, "target");
    }
    fw.sim = Matrix(fw.n, fw.n);
    for (std::size_t i = 0; i < fw.n; ++i) {
        for (std::size_t j = 0; j < fw.n; ++j) {
            fw.sim(i, j) = dot(std::span<const double>(fw.q_unit).subspan(i * fw.m, fw.m),
                               std::span<const double>(fw.f_unit).subspan(j * fw.m, fw.m));
        }
    }
    return fw;
}

} // namespace detail

/// S[i][j] = cos(encode(q_i), encode(f_j)); positives on the diagonal.
inline Matrix batch_similarity_matrix(const EncoderParams& params, std::span<const FeaturePair> batch) {
    return detail::forward_batch(params, batch).sim;
}

inline Matrix batch_similarity_matrix(const TrainState& state, std::span<const FeaturePair> batch) {
    return batch_similarity_matrix(state.params, batch);
}

// ---------------------------------------------------------------------------
// InfoNCE

struct InfoNceResult {
    double loss = 0.0;
    Matrix grad_sim;       // dL/dS
    double grad_tau = 0.0; // dL/dtau
};

inline InfoNceResult info_nce_loss(const Matrix& sim, double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw UsageError("info_nce: tau must be positive and finite");
    }
    if (sim.rows == 0 || sim.rows != sim.cols) {
        throw UsageError("info_nce: similarity matrix must be square and non-empty");
    }
    for (const double v : sim.data) {
        if (!std::isfinite(v)) {
            throw NumericError("info_nce: non-finite similarity");
        }
    }
    const std::size_t n = sim.rows;
    const double inv_n = 1.0 / static_cast<double>(n);
    InfoNceResult out;
    out.grad_sim = Matrix(n, n);
    std::vector<double> logits(n);
    double dl_dtau_sum = 0.0; // sum_ij dL/dZ_ij * S_ij
    for (std::size_t i = 0; i < n; ++i) {
        double row_max = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            logits[j] = sim(i, j) / tau;
            row_max = std::max(row_max, logits[j]);
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            sum += std::exp(logits[j] - row_max);
        }
        const double lse = row_max + std::log(sum);
        out.loss += lse - logits[i];
        for (std::size_t j = 0; j < n; ++j) {
            const double p = std::exp(logits[j] - lse);
            const double g = (p - (i == j ? 1.0 : 0.0)) * inv_n; // dL/dZ_ij
            out.grad_sim(i, j) = g / tau;
            dl_dtau_sum += g * sim(i, j);
        }
    }
    out.loss *= inv_n;
    out.grad_tau = -dl_dtau_sum / (tau * tau);
    return out;
}

// ---------------------------------------------------------------------------
// Backward pass

/// Gradient of the projection restricted to the hash buckets a batch touches.
struct ProjectionGradient {
    std::size_t embed_dim = 0;
    std::vector<std::uint32_t> buckets; // strictly increasing
    std::vector<double> values;         // buckets.size() x embed_dim

    std::span<const double> column(std::size_t slot) const {
        return {values.data() + slot * embed_dim, embed_dim};
    }

    EncoderParams dense(std::size_t hash_dim) const {
        EncoderParams g(embed_dim, hash_dim);
        for (std::size_t s = 0; s < buckets.size(); ++s) {
            const auto src = column(s);
            std::copy(src.begin(), src.end(), g.column(buckets[s]).begin());
        }
        return g;
    }
};

struct Gradients {
    double loss = 0.0;
    ProjectionGradient projection;
    double log_tau = 0.0;
};

inline Gradients loss_gradients(const EncoderParams& params, double log_tau, std::span<const FeaturePair> batch) {
    if (batch.empty()) {
        throw UsageError("loss_gradients: empty batch");
    }
    const auto fw = detail::forward_batch(params, batch);
    const double tau = std::exp(log_tau);
    const auto nce = info_nce_loss(fw.sim, tau);
    const std::size_t n = fw.n;
    const std::size_t m = fw.m;

    // dL/du_i = sum_j G_ij v_j,  dL/dv_j = sum_i G_ij u_i; then through
    // normalization: dL/de = (g - u (u . g)) / |e|.
    std::vector<double> g_q(n * m, 0.0), g_f(n * m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double g = nce.grad_sim(i, j);
            for (std::size_t r = 0; r < m; ++r) {
                g_q[i * m + r] += g * fw.f_unit[j * m + r];
                g_f[j * m + r] += g * fw.q_unit[i * m + r];
            }
        }
    }
    auto project_out = [m](std::vector<double>& g, const std::vector<double>& unit, const std::vector<double>& norm,
                           std::size_t row) {
        double along = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            along += g[row * m + r] * unit[row * m + r];
        }
        for (std::size_t r = 0; r < m; ++r) {
            g[row * m + r] = (g[row * m + r] - along * unit[row * m + r]) / norm[row];
        }
    };
    for (std::size_t i = 0; i < n; ++i) {
        project_out(g_q, fw.q_unit, fw.q_norm, i);
        project_out(g_f, fw.f_unit, fw.f_norm, i);
    }

    // dL/dP[:, k] = sum over inputs of dL/de * x[k]
    Gradients out;
    out.loss = nce.loss;
    out.log_tau = nce.grad_tau * tau;
    out.projection.embed_dim = m;
    std::unordered_map<std::uint32_t, std::size_t> slot_of;
    std::vector<std::uint32_t> slot_bucket;
    std::vector<double> acc;
    auto scatter = [&](const SparseFeatures& x, const double* g) {
        for (std::size_t k = 0; k < x.size(); ++k) {
            const auto [it, fresh] = slot_of.try_emplace(x.indices[k], slot_bucket.size());
            if (fresh) {
                slot_bucket.push_back(x.indices[k]);
                acc.resize(acc.size() + m, 0.0);
            }
            double* col = acc.data() + it->second * m;
            const double w = x.values[k];
            for (std::size_t r = 0; r < m; ++r) {
                col[r] += g[r] * w;
            }
        }
    };
    for (std::size_t i = 0; i < n; ++i) {
        scatter(*batch[i].query, g_q.data() + i * m);
        scatter(*batch[i].target, g_f.data() + i * m);
    }
    std::vector<std::size_t> perm(slot_bucket.size());
    for (std::size_t s = 0; s < perm.size(); ++s) {
        perm[s] = s;
    }
    std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return slot_bucket[a] < slot_bucket[b]; });
    out.projection.buckets.reserve(perm.size());
    out.projection.values.reserve(acc.size());
    for (const std::size_t s : perm) {
        out.projection.buckets.push_back(slot_bucket[s]);
        out.projection.values.insert(out.projection.values.end(), acc.begin() + static_cast<std::ptrdiff_t>(s * m),
                                     acc.begin() + static_cast<std::ptrdiff_t>((s + 1) * m));
    }
    return out;
}

inline Gradients loss_gradients(const TrainState& state, std::span<const FeaturePair> batch) {
    return loss_gradients(state.params, state.log_tau, batch);
}

// ---------------------------------------------------------------------------
// AdamW

namespace detail {

struct AdamScalars {
    double lr, wd, b1, b2, eps, bc1, bc2;

    /// Returns (new param, new m, new v).
    std::array<double, 3> update(double p, double m, double v, double g, bool decay) const {
        const double m1 = b1 * m + (1.0 - b1) * g;
        const double v1 = b2 * v + (1.0 - b2) * g * g;
        const double step = (m1 / bc1) / (std::sqrt(v1 / bc2) + eps);
        const double p1 = p - (decay ? lr * wd * p : 0.0) - lr * step;
        return {p1, m1, v1};
    }
};

} // namespace detail

/// One AdamW step with bias correction. Weight decay is decoupled and applies
/// to the projection only. On a non-finite result the state is left untouched.
inline void adamw_step(TrainState& state, const Gradients& grads, const TrainConfig& cfg) {
    const std::size_t m = state.params.embed_dim();
    if (grads.projection.embed_dim != m && !grads.projection.buckets.empty()) {
        throw UsageError("adamw: gradient shape mismatch");
    }
    if (!std::isfinite(grads.log_tau) ||
        !std::all_of(grads.projection.values.begin(), grads.projection.values.end(),
                     [](double v) { return std::isfinite(v); })) {
        throw NumericError("adamw: non-finite gradient");
    }
    const double t = static_cast<double>(state.step_count + 1);
    const detail::AdamScalars adam{cfg.learning_rate,
                                   cfg.weight_decay,
                                   cfg.beta1,
                                   cfg.beta2,
                                   cfg.epsilon,
                                   1.0 - std::pow(cfg.beta1, t),
                                   1.0 - std::pow(cfg.beta2, t)};

    const std::size_t cols = state.params.hash_dim();
    const auto& gp = grads.projection;
    // Pass 0 validates, pass 1 commits.
    for (int pass = 0; pass < 2; ++pass) {
        std::size_t slot = 0;
        for (std::size_t c = 0; c < cols; ++c) {
            const double* g = nullptr;
            if (slot < gp.buckets.size() && gp.buckets[slot] == c) {
                g = gp.values.data() + slot * m;
                ++slot;
            }
            auto p = state.params.column(c);
            auto m1 = state.moment1.column(c);
            auto m2 = state.moment2.column(c);
            for (std::size_t r = 0; r < m; ++r) {
                const auto [np, nm, nv] = adam.update(p[r], m1[r], m2[r], g ? g[r] : 0.0, true);
                if (pass == 0) {
                    if (!std::isfinite(np) || !std::isfinite(nm) || !std::isfinite(nv)) {
                        throw NumericError("adamw: non-finite update");
                    }
                } else {
                    p[r] = np;
                    m1[r] = nm;
                    m2[r] = nv;
                }
            }
        }
        const auto [nt, ntm, ntv] = adam.update(state.log_tau, state.tau_moment1, state.tau_moment2, grads.log_tau,
                                                false);
        if (pass == 0) {
            if (!std::isfinite(nt) || !std::isfinite(ntm) || !std::isfinite(ntv)) {
                throw NumericError("adamw: non-finite update");
            }
        } else {
            state.log_tau = nt;
            state.tau_moment1 = ntm;
            state.tau_moment2 = ntv;
        }
    }
    ++state.step_count;
}

// ---------------------------------------------------------------------------
// Training loop

struct EpochLog {
    std::size_t epoch = 0;
    double loss = 0.0;
    double ndcg_at_10 = 0.0;
    double recall_at_1 = 0.0;
};

inline nlohmann::ordered_json to_json(const EpochLog& e) {
    return {{"epoch", e.epoch}, {"loss", e.loss}, {"ndcg@10", e.ndcg_at_10}, {"recall@1", e.recall_at_1}};
}

struct TrainResult {
    Checkpoint best;
    std::size_t best_epoch = 0; // 0 = the initialization
    MetricsReport initial_metrics;
    MetricsReport best_metrics;
    std::vector<EpochLog> log;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
};

inline std::vector<EvalQuery> to_eval_queries(std::span<const TrainingTriple> triples) {
    std::vector<EvalQuery> out;
    out.reserve(triples.size());
    for (const auto& t : triples) {
        out.push_back({t.query, t.target_fc_id});
    }
    return out;
}

inline constexpr std::array<std::size_t, 2> kSelectionCutoffs{1, 10};

/// Held-out metrics for a given parameter set at cutoffs 1 and 10.
inline MetricsReport evaluate_params(const Corpus& corpus, const EncoderConfig& enc, const EncoderParams& params,
                                     std::span<const EvalQuery> queries) {
    const HashedNgramEncoder view(enc, params);
    const auto store = build_index(corpus, view);
    return evaluate(store, view, queries, kSelectionCutoffs);
}

using EpochCallback = std::function<void(const EpochLog&)>;

/// Splits the triples, trains for cfg.epochs and keeps the checkpoint with the
/// best held-out NDCG@10 (earliest on ties; the initialization competes as epoch 0).
inline TrainResult train(const Corpus& corpus, std::span<const TrainingTriple> triples, const EncoderConfig& enc,
                         const TrainConfig& cfg, const EpochCallback& on_epoch = {}) {
    cfg.validate();
    enc.validate();
    if (triples.empty()) {
        throw UsageError("train: no training triples");
    }
    for (const auto& t : triples) {
        if (!corpus.find(t.target_fc_id)) {
            throw DataError("train: target \"" + t.target_fc_id + "\" is not in the corpus");
        }
    }
    auto [train_set, test_set] = split_dataset(triples, cfg);
    if (train_set.size() < 2) {
        throw UsageError("train: training split has fewer than two triples");
    }
    const auto test_queries = to_eval_queries(test_set);

    TrainState state = init_train_state(enc, cfg);

    std::vector<SparseFeatures> doc_features;
    doc_features.reserve(corpus.size());
    for (const auto& e : corpus.entries()) {
        doc_features.push_back(featurize_text(fuse_document_text(e), enc));
    }
    std::vector<SparseFeatures> query_features;
    std::vector<std::size_t> target_row;
    query_features.reserve(train_set.size());
    target_row.reserve(train_set.size());
    for (const auto& t : train_set) {
        query_features.push_back(featurize_text(fuse_query_text(t.query), enc));
        target_row.push_back(*corpus.index_of(t.target_fc_id));
    }

    TrainResult result;
    result.train_size = train_set.size();
    result.test_size = test_set.size();
    result.initial_metrics = evaluate_params(corpus, enc, state.params, test_queries);
    result.best_metrics = result.initial_metrics;
    result.best = checkpoint_of(state);
    double best_ndcg = result.initial_metrics.at(10).ndcg;

    Rng rng(cfg.shuffle_seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(train_set.size());
    std::vector<FeaturePair> batch;
    batch.reserve(cfg.batch_size);
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            if (end - start < 2) {
                break;
            }
            batch.clear();
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back({&query_features[order[i]], &doc_features[target_row[order[i]]]});
            }
            const auto grads = loss_gradients(state, batch);
            adamw_step(state, grads, cfg);
            loss_sum += grads.loss;
            ++batches;
        }
        const auto metrics = evaluate_params(corpus, enc, state.params, test_queries);
        EpochLog entry{epoch, batches ? loss_sum / static_cast<double>(batches) : 0.0, metrics.at(10).ndcg,
                       metrics.at(1).recall};
        result.log.push_back(entry);
        if (on_epoch) {
            on_epoch(entry);
        }
        if (metrics.at(10).ndcg > best_ndcg) {
            best_ndcg = metrics.at(10).ndcg;
            result.best = checkpoint_of(state);
            result.best_epoch = epoch;
            result.best_metrics = metrics;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Synthetic supervision

namespace detail {

inline std::string spaced(std::string_view s) {
    std::string out(s);
    std::replace(out.begin(), out.end(), '_', ' ');
    return out;
}

inline std::string missing_phrase(std::string_view handling) {
    if (handling == "handles_na") {
        return "may contain missing values";
    }
    if (handling == "must_be_complete") {
        return "has no missing values";
    }
    return "has " + spaced(handling) + " missing data";
}

inline void replace_all(std::string& s, std::string_view needle, std::string_view with) {
    if (needle.empty()) {
        return;
    }
    for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + with.size())) {
        s.replace(pos, needle.size(), with);
    }
}

} // namespace detail

inline constexpr std::size_t kQueryTemplateCount = 5;

/// Template-generated user queries: per_entry queries per corpus entry, cycling
/// through long, problem-focused, help-me, instruction-plus-data-information and
/// keyword styles. Each query carries the entry's task and profile values and
/// uses the entry's profile as its query profile. Package and fc_id never appear.
inline std::vector<TrainingTriple> generate_synthetic_triples(const Corpus& corpus, std::size_t per_entry,
                                                              std::uint64_t seed) {
    if (corpus.empty()) {
        throw UsageError("generate: corpus is empty");
    }
    static constexpr std::array<std::string_view, 4> kVerbs{"perform", "carry out", "run", "apply"};
    static constexpr std::array<std::string_view, 3> kOpeners{"I am working with", "I have", "My project uses"};
    Rng rng(seed);
    std::vector<TrainingTriple> out;
    out.reserve(corpus.size() * per_entry);
    for (const auto& e : corpus.entries()) {
        const auto& p = e.data_profile;
        const std::string task = detail::spaced(trim(e.task_type).empty() ? "analysis" : e.task_type);
        const std::string modality(to_string(p.data_modality));
        const std::string features(detail::spaced(to_string(p.feature_type)));
        const std::string dims(to_string(p.dimensionality));
        const std::string dist = detail::spaced(p.distribution_assumption);
        std::string constraints;
        for (std::size_t i = 0; i < p.specific_constraints.size(); ++i) {
            constraints += (i ? ", " : "") + p.specific_constraints[i];
        }
        for (std::size_t q = 0; q < per_entry; ++q) {
            const auto verb = kVerbs[rng.below(kVerbs.size())];
            const auto opener = kOpeners[rng.below(kOpeners.size())];
            std::string text;
            switch (q % kQueryTemplateCount) {
            case 0:
                text = std::string(opener) + " a " + dims + "-dimensional " + modality + " dataset of " + features +
                       " features that looks " + dist + " distributed, and I need to " + std::string(verb) + " " +
                       task + ". The data " + detail::missing_phrase(p.missing_data_handling) + ".";
                if (!constraints.empty()) {
                    text += " Constraints: " + constraints + ".";
                }
                break;
            case 1:
                text = "How can I " + std::string(verb) + " " + task + " on " + features + " " + modality +
                       " data with a " + dist + " distribution?";
                break;
            case 2:
                text = "Help me " + std::string(verb) + " " + task + " where my " + modality + " data is " + dist +
                       " and " + dims + "-dimensional.";
                break;
            case 3:
                text = "I need to " + std::string(verb) + " " + task + ". Data Information: {'type': '" + modality +
                       "', 'features': '" + features + "', 'distribution': '" + dist + "', 'dimensionality': '" +
                       dims + "'}";
                break;
            default:
                text = task + " " + dist + " " + features + " " + modality;
                break;
            }
            detail::replace_all(text, e.fc_id, "this method");
            detail::replace_all(text, e.package_name(), "this package");
            out.push_back({QueryRecord{std::move(text), p}, e.fc_id});
        }
    }
    return out;
}

inline std::vector<TrainingTriple> triples_from_queries(std::span<const QueryLine> lines) {
    std::vector<TrainingTriple> out;
    out.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!lines[i].ground_truth) {
            throw DataError("query " + std::to_string(i + 1) + " has no ground_truth");
        }
        out.push_back({lines[i].record, *lines[i].ground_truth});
    }
    return out;
}

inline QueryLine to_query_line(const TrainingTriple& t) { return {t.query, t.target_fc_id}; }

} // namespace profret
