// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 profret Contributors

#pragma once

// Assembles the retrieved-documentation block an agent places in its prompt.

#include "profret/corpus.hpp"
#include "profret/encoder.hpp"
#include "profret/error.hpp"
#include "profret/index.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace profret {

struct ContextOptions {
    std::size_t description_budget = 1200; // in UTF-8 code points
};

inline constexpr std::string_view kTruncationMarker = " ...[truncated]";
inline constexpr std::string_view kContextHeader = "Retrieved R Documentation";

struct ToolContextItem {
    std::size_t rank = 0;
    double score = 0.0;
    std::string fc_id;
    std::string package_name;
    std::string function_name;
    std::string description;
    DataProfile data_profile;
    std::string usage_guidance;
    std::string example_code;
    std::string task_type;
};

struct ToolContext {
    std::string query_echo;
    std::size_t k_requested = 0;
    std::vector<ToolContextItem> items;
};

/// Cuts s to at most budget code points, never inside a multi-byte sequence.
inline std::string truncate_utf8(std::string_view s, std::size_t budget) {
    std::size_t points = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto c = static_cast<unsigned char>(s[i]);
        if ((c & 0xC0U) != 0x80U) {
            if (points == budget) {
                return std::string(s.substr(0, i)) + std::string(kTruncationMarker);
            }
            ++points;
        }
    }
    return std::string(s);
}

template <TextEncoder E>
ToolContext build_tool_context(const VectorStore& store, const Corpus& corpus, const E& encoder,
                               const QueryRecord& query, std::size_t k, const ContextOptions& options = {}) {
    if (k == 0) {
        throw UsageError("context: k must be positive");
    }
    const auto hits = search(store, encoder.encode_text(fuse_query_text(query)), k);
    ToolContext ctx;
    ctx.query_echo = std::string(trim(query.query_text));
    ctx.k_requested = k;
    ctx.items.reserve(hits.size());
    for (const auto& hit : hits) {
        const FunctionEntry* entry = corpus.find(hit.fc_id);
        if (!entry) {
            throw DataError("context: index entry \"" + hit.fc_id + "\" is missing from the corpus");
        }
        ToolContextItem item;
        item.rank = hit.rank;
        item.score = hit.score;
        item.fc_id = entry->fc_id;
        item.package_name = std::string(entry->package_name());
        item.function_name = std::string(entry->function_name());
        item.description = truncate_utf8(trim(entry->ground_truth_doc), options.description_budget);
        item.data_profile = entry->data_profile;
        item.usage_guidance = entry->usage_guidance;
        item.example_code = entry->example_code;
        item.task_type = entry->task_type;
        ctx.items.push_back(std::move(item));
    }
    return ctx;
}

namespace detail {

inline void append_indented(std::string& out, std::string_view text, std::string_view indent) {
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        const auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        out += indent;
        out += line;
        out += '\n';
        if (nl == std::string_view::npos) {
            break;
        }
        start = nl + 1;
    }
}

inline void append_section(std::string& out, std::string_view title, std::string_view body) {
    if (trim(body).empty()) {
        return;
    }
    out += "   ";
    out += title;
    out += ":\n";
    append_indented(out, body, "      ");
}

} // namespace detail

/// Layout:
///
///   Retrieved R Documentation
///   Query: <query>
///   1. [ID: pkg::fn] (score: 0.912345)
///      Package: pkg :: fn
///      Task: <task_type>
///      Data profile: <canonical profile>
///      Usage:
///         <usage_guidance lines>
///      Description:
///         <description lines>
///      Example:
///         <example_code lines>
///
/// Sections with empty bodies are omitted. Scores are cosine similarities.
inline std::string render_context_block(const ToolContext& ctx) {
    std::string out(kContextHeader);
    out += '\n';
    out += "Query: ";
    std::string echo = ctx.query_echo;
    for (auto& c : echo) {
        if (c == '\n' || c == '\r') {
            c = ' ';
        }
    }
    out += echo;
    out += '\n';
    char score[32];
    for (const auto& item : ctx.items) {
        std::snprintf(score, sizeof score, "%.6f", item.score);
        out += std::to_string(item.rank) + ". [ID: " + item.fc_id + "] (score: " + score + ")\n";
        out += "   Package: " + item.package_name + " :: " + item.function_name + '\n';
        if (!item.task_type.empty()) {
            out += "   Task: " + item.task_type + '\n';
        }
        out += "   Data profile: " + profile_to_canonical_text(item.data_profile) + '\n';
        detail::append_section(out, "Usage", item.usage_guidance);
        detail::append_section(out, "Description", item.description);
        detail::append_section(out, "Example", item.example_code);
    }
    return out;
}

inline nlohmann::ordered_json to_json(const ToolContext& ctx) {
    nlohmann::ordered_json j;
    j["query"] = ctx.query_echo;
    j["k"] = ctx.k_requested;
    j["items"] = nlohmann::ordered_json::array();
    for (const auto& item : ctx.items) {
        nlohmann::ordered_json it;
        it["rank"] = item.rank;
        it["score"] = item.score;
        it["fc_id"] = item.fc_id;
        it["package_name"] = item.package_name;
        it["function_name"] = item.function_name;
        it["description"] = item.description;
        it["data_profile"] = to_json(item.data_profile);
        it["usage_guidance"] = item.usage_guidance;
        it["example_code"] = item.example_code;
        it["task_type"] = item.task_type;
        j["items"].push_back(std::move(it));
    }
    return j;
}

} // namespace profret
