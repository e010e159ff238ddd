// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 profret Contributors

#pragma once

// Knowledge-base data model, JSON Lines ingestion, and the text fusion that
// turns (text, data profile) pairs into encoder input.

#include "profret/error.hpp"
#include "profret/util.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace profret {

enum class DataModality { tabular, time_series, text, image, graph, genomic_sequence, other };
enum class FeatureType { numerical, categorical, mixed, binary, text_token, any };
enum class Dimensionality { low, high, any };

namespace detail {

template <typename E, std::size_t N>
struct EnumNames {
    std::array<std::pair<E, std::string_view>, N> table;

    constexpr std::string_view name(E e) const {
        for (const auto& [value, text] : table) {
            if (value == e) {
                return text;
            }
        }
        return {};
    }

    constexpr std::optional<E> parse(std::string_view s) const {
        for (const auto& [value, text] : table) {
            if (text == s) {
                return value;
            }
        }
        return std::nullopt;
    }
};

inline constexpr EnumNames<DataModality, 7> kModalityNames{{{
    {DataModality::tabular, "tabular"},
    {DataModality::time_series, "time-series"},
    {DataModality::text, "text"},
    {DataModality::image, "image"},
    {DataModality::graph, "graph"},
    {DataModality::genomic_sequence, "genomic/sequence"},
    {DataModality::other, "other"},
}}};

inline constexpr EnumNames<FeatureType, 6> kFeatureTypeNames{{{
    {FeatureType::numerical, "numerical"},
    {FeatureType::categorical, "categorical"},
    {FeatureType::mixed, "mixed"},
    {FeatureType::binary, "binary"},
    {FeatureType::text_token, "text-token"},
    {FeatureType::any, "any"},
}}};

inline constexpr EnumNames<Dimensionality, 3> kDimensionalityNames{{{
    {Dimensionality::low, "low"},
    {Dimensionality::high, "high"},
    {Dimensionality::any, "any"},
}}};

} // namespace detail

inline std::string_view to_string(DataModality v) { return detail::kModalityNames.name(v); }
inline std::string_view to_string(FeatureType v) { return detail::kFeatureTypeNames.name(v); }
inline std::string_view to_string(Dimensionality v) { return detail::kDimensionalityNames.name(v); }

inline std::optional<DataModality> parse_modality(std::string_view s) {
    return detail::kModalityNames.parse(s);
}
inline std::optional<FeatureType> parse_feature_type(std::string_view s) {
    return detail::kFeatureTypeNames.parse(s);
}
inline std::optional<Dimensionality> parse_dimensionality(std::string_view s) {
    return detail::kDimensionalityNames.parse(s);
}

/// Structured description of the data a function expects (document side) or
/// the data a user has (query side).
struct DataProfile {
    DataModality data_modality = DataModality::other;
    FeatureType feature_type = FeatureType::any;
    std::string distribution_assumption = "unknown";
    Dimensionality dimensionality = Dimensionality::any;
    std::string missing_data_handling = "unknown";
    std::vector<std::string> specific_constraints;

    bool operator==(const DataProfile&) const = default;
};

struct FunctionEntry {
    std::int64_t id = 0;
    std::string fc_id;
    std::string ground_truth_doc;
    DataProfile data_profile;
    std::string usage_guidance;
    std::string example_code;
    std::string task_type;
    std::string domain;

    std::string_view package_name() const {
        return std::string_view(fc_id).substr(0, fc_id.find("::"));
    }
    std::string_view function_name() const {
        const auto sep = fc_id.find("::");
        return sep == std::string::npos ? std::string_view{} : std::string_view(fc_id).substr(sep + 2);
    }

    bool operator==(const FunctionEntry&) const = default;
};

/// Immutable after construction; entries keep file order.
class Corpus {
public:
    Corpus() = default;

    /// Throws DataError on duplicate fc_id or id.
    explicit Corpus(std::vector<FunctionEntry> entries) : entries_(std::move(entries)) {
        std::unordered_set<std::int64_t> ids;
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            if (!by_fc_id_.emplace(entries_[i].fc_id, i).second) {
                throw DataError("duplicate fc_id \"" + entries_[i].fc_id + "\"");
            }
            if (!ids.insert(entries_[i].id).second) {
                throw DataError("duplicate id " + std::to_string(entries_[i].id));
            }
        }
    }

    const std::vector<FunctionEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    const FunctionEntry& operator[](std::size_t i) const { return entries_[i]; }

    const FunctionEntry* find(std::string_view fc_id) const {
        const auto it = by_fc_id_.find(std::string(fc_id));
        return it == by_fc_id_.end() ? nullptr : &entries_[it->second];
    }

    std::optional<std::size_t> index_of(std::string_view fc_id) const {
        const auto it = by_fc_id_.find(std::string(fc_id));
        if (it == by_fc_id_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    bool operator==(const Corpus& other) const { return entries_ == other.entries_; }

private:
    std::vector<FunctionEntry> entries_;
    std::unordered_map<std::string, std::size_t> by_fc_id_;
};

struct QueryRecord {
    std::string query_text;
    DataProfile query_profile;
};

// ---------------------------------------------------------------------------
// Canonical text and fusion

inline std::string profile_to_canonical_text(const DataProfile& p) {
    std::string out;
    out.reserve(160);
    out += "data_modality: ";
    out += to_string(p.data_modality);
    out += " | feature_type: ";
    out += to_string(p.feature_type);
    out += " | distribution_assumption: ";
    out += p.distribution_assumption;
    out += " | dimensionality: ";
    out += to_string(p.dimensionality);
    out += " | missing_data_handling: ";
    out += p.missing_data_handling;
    out += " | specific_constraints: ";
    for (std::size_t i = 0; i < p.specific_constraints.size(); ++i) {
        if (i > 0) {
            out += "; ";
        }
        out += p.specific_constraints[i];
    }
    return out;
}

inline constexpr std::string_view kProfileSeparator = "\n[DATA PROFILE] ";

inline std::string fuse_text(std::string_view text, const DataProfile& profile) {
    std::string out(trim(text));
    out += kProfileSeparator;
    out += profile_to_canonical_text(profile);
    return out;
}

inline std::string fuse_document_text(const FunctionEntry& f) {
    return fuse_text(f.ground_truth_doc, f.data_profile);
}

inline std::string fuse_query_text(const QueryRecord& r) {
    if (trim(r.query_text).empty()) {
        throw UsageError("query text is empty");
    }
    return fuse_text(r.query_text, r.query_profile);
}

// ---------------------------------------------------------------------------
// JSON schema

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& obj, const char* field,
                                           const std::string& path) {
    const auto it = obj.find(field);
    if (it == obj.end()) {
        throw DataError("missing field \"" + path + field + "\"");
    }
    return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* field,
                                  const std::string& path = {}) {
    const auto& v = require_field(obj, field, path);
    if (!v.is_string()) {
        throw DataError("field \"" + path + field + "\" must be a string");
    }
    return v.get<std::string>();
}

template <typename E, typename Parse>
E parse_enum_field(const nlohmann::json& v, const char* field, const std::string& path, Parse parse) {
    if (!v.is_string()) {
        throw DataError("field \"" + path + field + "\" must be a string");
    }
    const auto s = v.get<std::string>();
    const auto parsed = parse(s);
    if (!parsed) {
        throw DataError("field \"" + path + field + "\" has invalid value \"" + s + "\"");
    }
    return *parsed;
}

inline std::vector<std::string> parse_constraints(const nlohmann::json& v, const std::string& path) {
    if (!v.is_array()) {
        throw DataError("field \"" + path + "specific_constraints\" must be an array of strings");
    }
    std::vector<std::string> out;
    out.reserve(v.size());
    for (const auto& item : v) {
        if (!item.is_string()) {
            throw DataError("field \"" + path + "specific_constraints\" must be an array of strings");
        }
        out.push_back(item.get<std::string>());
    }
    return out;
}

} // namespace detail

/// Parses a document-side profile: every field must be present.
inline DataProfile profile_from_json(const nlohmann::json& j, const std::string& path = "data_profile.") {
    if (!j.is_object()) {
        throw DataError("field \"" + path.substr(0, path.size() - 1) + "\" must be an object");
    }
    DataProfile p;
    p.data_modality = detail::parse_enum_field<DataModality>(
        detail::require_field(j, "data_modality", path), "data_modality", path, parse_modality);
    p.feature_type = detail::parse_enum_field<FeatureType>(
        detail::require_field(j, "feature_type", path), "feature_type", path, parse_feature_type);
    p.distribution_assumption = detail::require_string(j, "distribution_assumption", path);
    p.dimensionality = detail::parse_enum_field<Dimensionality>(
        detail::require_field(j, "dimensionality", path), "dimensionality", path, parse_dimensionality);
    p.missing_data_handling = detail::require_string(j, "missing_data_handling", path);
    p.specific_constraints =
        detail::parse_constraints(detail::require_field(j, "specific_constraints", path), path);
    return p;
}

/// Parses a query-side profile. Absent fields keep their sentinel defaults;
/// present fields are validated like document profiles.
inline DataProfile query_profile_from_json(const nlohmann::json& j, const std::string& path = "profile.") {
    DataProfile p;
    if (j.is_null()) {
        return p;
    }
    if (!j.is_object()) {
        throw DataError("field \"" + path.substr(0, path.size() - 1) + "\" must be an object");
    }
    if (const auto it = j.find("data_modality"); it != j.end()) {
        p.data_modality = detail::parse_enum_field<DataModality>(*it, "data_modality", path, parse_modality);
    }
    if (const auto it = j.find("feature_type"); it != j.end()) {
        p.feature_type = detail::parse_enum_field<FeatureType>(*it, "feature_type", path, parse_feature_type);
    }
    if (j.contains("distribution_assumption")) {
        p.distribution_assumption = detail::require_string(j, "distribution_assumption", path);
    }
    if (const auto it = j.find("dimensionality"); it != j.end()) {
        p.dimensionality =
            detail::parse_enum_field<Dimensionality>(*it, "dimensionality", path, parse_dimensionality);
    }
    if (j.contains("missing_data_handling")) {
        p.missing_data_handling = detail::require_string(j, "missing_data_handling", path);
    }
    if (const auto it = j.find("specific_constraints"); it != j.end()) {
        p.specific_constraints = detail::parse_constraints(*it, path);
    }
    return p;
}

inline nlohmann::ordered_json to_json(const DataProfile& p) {
    nlohmann::ordered_json j;
    j["data_modality"] = to_string(p.data_modality);
    j["feature_type"] = to_string(p.feature_type);
    j["distribution_assumption"] = p.distribution_assumption;
    j["dimensionality"] = to_string(p.dimensionality);
    j["missing_data_handling"] = p.missing_data_handling;
    j["specific_constraints"] = p.specific_constraints;
    return j;
}

inline FunctionEntry entry_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw DataError("line is not a JSON object");
    }
    FunctionEntry e;
    const auto& id = detail::require_field(j, "id", "");
    if (!id.is_number_integer() || id.get<std::int64_t>() < 0) {
        throw DataError("field \"id\" must be a non-negative integer");
    }
    e.id = id.get<std::int64_t>();

    e.fc_id = detail::require_string(j, "fc_id");
    const auto sep = e.fc_id.find("::");
    if (sep == std::string::npos || e.fc_id.find("::", sep + 2) != std::string::npos) {
        throw DataError("field \"fc_id\" must contain exactly one \"::\" separator: \"" + e.fc_id + "\"");
    }
    e.ground_truth_doc = detail::require_string(j, "ground_truth_doc");
    if (trim(e.ground_truth_doc).empty()) {
        throw DataError("field \"ground_truth_doc\" is empty");
    }
    e.data_profile = profile_from_json(detail::require_field(j, "data_profile", ""));
    e.usage_guidance = detail::require_string(j, "usage_guidance");
    e.example_code = detail::require_string(j, "example_code");
    e.task_type = detail::require_string(j, "task_type");
    e.domain = detail::require_string(j, "domain");
    return e;
}

inline nlohmann::ordered_json to_json(const FunctionEntry& e) {
    nlohmann::ordered_json j;
    j["id"] = e.id;
    j["fc_id"] = e.fc_id;
    j["ground_truth_doc"] = e.ground_truth_doc;
    j["data_profile"] = to_json(e.data_profile);
    j["usage_guidance"] = e.usage_guidance;
    j["example_code"] = e.example_code;
    j["task_type"] = e.task_type;
    j["domain"] = e.domain;
    return j;
}

// ---------------------------------------------------------------------------
// Corpus ingestion

struct IngestIssue {
    std::size_t line = 0; // 1-based
    std::string message;

    std::string describe() const { return "line " + std::to_string(line) + ": " + message; }
};

/// Outcome of reading a corpus stream: every non-blank line either produced an
/// accepted entry or an issue.
struct IngestReport {
    std::vector<FunctionEntry> accepted;
    std::vector<IngestIssue> issues;
    std::size_t lines_read = 0;

    bool clean() const { return issues.empty(); }
};

inline IngestReport ingest_corpus(std::istream& in) {
    IngestReport report;
    std::unordered_map<std::string, std::size_t> seen_fc_id;
    std::unordered_map<std::int64_t, std::size_t> seen_id;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) {
            continue;
        }
        ++report.lines_read;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& ex) {
            report.issues.push_back({lineno, std::string("malformed JSON: ") + ex.what()});
            continue;
        }
        try {
            auto entry = entry_from_json(j);
            if (const auto it = seen_fc_id.find(entry.fc_id); it != seen_fc_id.end()) {
                report.issues.push_back({lineno, "field \"fc_id\" duplicates line " + std::to_string(it->second) +
                                                     ": \"" + entry.fc_id + "\""});
                continue;
            }
            if (const auto it = seen_id.find(entry.id); it != seen_id.end()) {
                report.issues.push_back({lineno, "field \"id\" duplicates line " + std::to_string(it->second) +
                                                     ": " + std::to_string(entry.id)});
                continue;
            }
            seen_fc_id.emplace(entry.fc_id, lineno);
            seen_id.emplace(entry.id, lineno);
            report.accepted.push_back(std::move(entry));
        } catch (const DataError& ex) {
            report.issues.push_back({lineno, ex.what()});
        }
    }
    return report;
}

inline IngestReport ingest_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open corpus file \"" + path + "\"");
    }
    return ingest_corpus(in);
}

/// Strict load: the first issue becomes a DataError; an empty corpus is an error.
inline Corpus load_corpus(std::istream& in) {
    auto report = ingest_corpus(in);
    if (!report.clean()) {
        throw DataError(report.issues.front().describe());
    }
    if (report.accepted.empty()) {
        throw DataError("empty corpus");
    }
    return Corpus(std::move(report.accepted));
}

inline Corpus load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open corpus file \"" + path + "\"");
    }
    try {
        return load_corpus(in);
    } catch (const DataError& ex) {
        throw DataError(path + ": " + ex.what());
    }
}

inline void write_corpus(std::ostream& out, const Corpus& corpus) {
    for (const auto& e : corpus.entries()) {
        out << to_json(e).dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Query batches: {"query": ..., "profile": {...}, "ground_truth": "..."}

struct QueryLine {
    QueryRecord record;
    std::optional<std::string> ground_truth;
};

inline QueryLine query_line_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw DataError("line is not a JSON object");
    }
    QueryLine q;
    q.record.query_text = detail::require_string(j, "query");
    if (trim(q.record.query_text).empty()) {
        throw DataError("field \"query\" is empty");
    }
    if (const auto it = j.find("profile"); it != j.end()) {
        q.record.query_profile = query_profile_from_json(*it);
    }
    if (const auto it = j.find("ground_truth"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) {
            throw DataError("field \"ground_truth\" must be a string");
        }
        q.ground_truth = it->get<std::string>();
    }
    return q;
}

inline nlohmann::ordered_json to_json(const QueryLine& q) {
    nlohmann::ordered_json j;
    j["query"] = q.record.query_text;
    j["profile"] = to_json(q.record.query_profile);
    if (q.ground_truth) {
        j["ground_truth"] = *q.ground_truth;
    }
    return j;
}

inline std::vector<QueryLine> load_queries(std::istream& in) {
    std::vector<QueryLine> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) {
            continue;
        }
        try {
            out.push_back(query_line_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::parse_error& ex) {
            throw DataError("line " + std::to_string(lineno) + ": malformed JSON: " + ex.what());
        } catch (const DataError& ex) {
            throw DataError("line " + std::to_string(lineno) + ": " + ex.what());
        }
    }
    return out;
}

inline std::vector<QueryLine> load_queries(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open query file \"" + path + "\"");
    }
    try {
        return load_queries(in);
    } catch (const DataError& ex) {
        throw DataError(path + ": " + ex.what());
    }
}

} // namespace profret
