// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 profret Contributors

#pragma once

// Retrieval metrics with one binary-relevant item per query, and the
// end-to-end agent success rate.

#include "profret/corpus.hpp"
#include "profret/encoder.hpp"
#include "profret/error.hpp"
#include "profret/index.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace profret {

/// 1-based rank of gt in a rank-sorted list, if present.
inline std::optional<std::size_t> rank_of(std::span<const RankedResult> results, std::string_view gt) {
    for (const auto& r : results) {
        if (r.fc_id == gt) {
            return r.rank;
        }
    }
    return std::nullopt;
}

inline double recall_at_k(std::span<const RankedResult> results, std::string_view gt, std::size_t k) {
    const auto rank = rank_of(results, gt);
    return rank && *rank <= k ? 1.0 : 0.0;
}

/// With a single relevant item IDCG@k = 1, so NDCG@k = 1 / log2(rank + 1).
inline double ndcg_at_k(std::span<const RankedResult> results, std::string_view gt, std::size_t k) {
    const auto rank = rank_of(results, gt);
    if (!rank || *rank > k) {
        return 0.0;
    }
    return 1.0 / std::log2(static_cast<double>(*rank) + 1.0);
}

inline double mrr_at_k(std::span<const RankedResult> results, std::string_view gt, std::size_t k) {
    const auto rank = rank_of(results, gt);
    if (!rank || *rank > k) {
        return 0.0;
    }
    return 1.0 / static_cast<double>(*rank);
}

struct EvalQuery {
    QueryRecord record;
    std::string ground_truth;
};

struct CutoffMetrics {
    double recall = 0.0;
    double ndcg = 0.0;
    double mrr = 0.0;
};

struct MetricsReport {
    std::map<std::size_t, CutoffMetrics> by_cutoff;
    std::size_t query_count = 0;

    const CutoffMetrics& at(std::size_t k) const {
        const auto it = by_cutoff.find(k);
        if (it == by_cutoff.end()) {
            throw UsageError("metrics report has no cutoff " + std::to_string(k));
        }
        return it->second;
    }
};

inline nlohmann::ordered_json to_json(const MetricsReport& report) {
    nlohmann::ordered_json j;
    for (const auto& [k, m] : report.by_cutoff) {
        j[std::to_string(k)] = {{"recall", m.recall}, {"ndcg", m.ndcg}, {"mrr", m.mrr}};
    }
    j["query_count"] = report.query_count;
    return j;
}

inline void validate_cutoffs(std::span<const std::size_t> cutoffs) {
    if (cutoffs.empty()) {
        throw UsageError("at least one cutoff is required");
    }
    for (std::size_t i = 0; i < cutoffs.size(); ++i) {
        if (cutoffs[i] == 0 || (i > 0 && cutoffs[i] <= cutoffs[i - 1])) {
            throw UsageError("cutoffs must be positive and strictly increasing");
        }
    }
}

/// Averages over per-query rankings. rankings[i] must reach at least max(cutoffs).
inline MetricsReport aggregate_metrics(std::span<const std::vector<RankedResult>> rankings,
                                       std::span<const std::string> ground_truths,
                                       std::span<const std::size_t> cutoffs) {
    validate_cutoffs(cutoffs);
    if (rankings.empty()) {
        throw UsageError("evaluation needs at least one query");
    }
    MetricsReport report;
    report.query_count = rankings.size();
    const double n = static_cast<double>(rankings.size());
    for (const std::size_t k : cutoffs) {
        CutoffMetrics sum;
        for (std::size_t i = 0; i < rankings.size(); ++i) {
            sum.recall += recall_at_k(rankings[i], ground_truths[i], k);
            sum.ndcg += ndcg_at_k(rankings[i], ground_truths[i], k);
            sum.mrr += mrr_at_k(rankings[i], ground_truths[i], k);
        }
        report.by_cutoff[k] = {sum.recall / n, sum.ndcg / n, sum.mrr / n};
    }
    return report;
}

template <TextEncoder E>
MetricsReport evaluate(const VectorStore& store, const E& encoder, std::span<const EvalQuery> queries,
                       std::span<const std::size_t> cutoffs) {
    validate_cutoffs(cutoffs);
    if (queries.empty()) {
        throw UsageError("evaluation needs at least one query");
    }
    std::unordered_set<std::string_view> known(store.ids().begin(), store.ids().end());
    std::vector<std::vector<RankedResult>> rankings;
    std::vector<std::string> truths;
    rankings.reserve(queries.size());
    truths.reserve(queries.size());
    for (const auto& q : queries) {
        if (!known.contains(q.ground_truth)) {
            throw DataError("ground truth \"" + q.ground_truth + "\" is not in the index");
        }
        rankings.push_back(search(store, encoder.encode_text(fuse_query_text(q.record)), cutoffs.back()));
        truths.push_back(q.ground_truth);
    }
    return aggregate_metrics(rankings, truths, cutoffs);
}

// ---------------------------------------------------------------------------
// Agent success rate

struct AgentTaskResult {
    std::string task_id;
    std::string agent_output;
    std::string ground_truth;
    bool matched = false;
};

inline constexpr double kAnswerRelTolerance = 1e-4;

inline std::optional<double> parse_decimal(std::string_view s) {
    s = trim(s);
    if (s.empty()) {
        return std::nullopt;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

/// Numeric answers match within relative 1e-4 of the ground truth (exactly,
/// when the ground truth is zero); anything else compares as trimmed strings.
inline bool answers_match(std::string_view agent_output, std::string_view ground_truth) {
    const auto a = parse_decimal(agent_output);
    const auto g = parse_decimal(ground_truth);
    if (a && g) {
        if (*g == 0.0) {
            return *a == 0.0;
        }
        return std::abs(*a - *g) <= kAnswerRelTolerance * std::abs(*g);
    }
    return trim(agent_output) == trim(ground_truth);
}

inline AgentTaskResult judge_task(std::string task_id, std::string agent_output, std::string ground_truth) {
    AgentTaskResult r{std::move(task_id), std::move(agent_output), std::move(ground_truth), false};
    r.matched = answers_match(r.agent_output, r.ground_truth);
    return r;
}

inline double success_rate(std::span<const AgentTaskResult> results) {
    if (results.empty()) {
        throw UsageError("success rate needs at least one task");
    }
    std::size_t hits = 0;
    for (const auto& r : results) {
        hits += r.matched ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(results.size());
}

/// JSON Lines of {"task_id", "agent_output", "ground_truth"}; matched is recomputed.
inline std::vector<AgentTaskResult> load_agent_tasks(std::istream& in) {
    std::vector<AgentTaskResult> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) {
            continue;
        }
        try {
            const auto j = nlohmann::json::parse(line);
            if (!j.is_object()) {
                throw DataError("line is not a JSON object");
            }
            out.push_back(judge_task(detail::require_string(j, "task_id"), detail::require_string(j, "agent_output"),
                                     detail::require_string(j, "ground_truth")));
        } catch (const nlohmann::json::parse_error& ex) {
            throw DataError("line " + std::to_string(lineno) + ": malformed JSON: " + ex.what());
        } catch (const DataError& ex) {
            throw DataError("line " + std::to_string(lineno) + ": " + ex.what());
        }
    }
    return out;
}

} // namespace profret
