// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 profret Contributors

#pragma once

#include "profret/corpus.hpp"
#include "profret/encoder.hpp"
#include "profret/error.hpp"
#include "profret/persist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace profret {

struct RankedResult {
    std::size_t rank = 0; // 1-based
    std::string fc_id;
    double score = 0.0; // cosine similarity

    bool operator==(const RankedResult&) const = default;
};

/// Unit-normalized document embeddings, one row per id, in insertion order.
class VectorStore {
public:
    VectorStore() = default;

    /// Normalizes every row. Throws NumericError naming the id of a zero row.
    static VectorStore from_rows(std::vector<std::string> ids, const std::vector<Embedding>& rows) {
        if (ids.size() != rows.size()) {
            throw UsageError("vector store: ids and rows differ in length");
        }
        VectorStore s;
        s.dim_ = rows.empty() ? 0 : rows.front().dim();
        s.ids_ = std::move(ids);
        s.check_unique_ids();
        s.matrix_.reserve(s.ids_.size() * s.dim_);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].dim() != s.dim_) {
                throw UsageError("vector store: rows differ in dimension");
            }
            const double n = rows[i].norm();
            if (!(n >= kMinNorm) || !std::isfinite(n)) {
                throw NumericError("zero or non-finite embedding for \"" + s.ids_[i] + "\"");
            }
            for (const double v : rows[i].values) {
                s.matrix_.push_back(v / n);
            }
        }
        return s;
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    std::span<const double> row(std::size_t i) const { return {matrix_.data() + i * dim_, dim_}; }
    std::span<const double> matrix() const noexcept { return matrix_; }

    /// FNV-1a 64 over the ids joined by '\n', as 16 lowercase hex digits.
    std::string ids_checksum() const {
        std::string joined;
        for (std::size_t i = 0; i < ids_.size(); ++i) {
            if (i > 0) {
                joined += '\n';
            }
            joined += ids_[i];
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(joined)));
        return buf;
    }

    bool operator==(const VectorStore&) const = default;

    friend VectorStore read_index(std::istream& in, const std::string& what);

private:
    void check_unique_ids() const {
        std::unordered_set<std::string_view> seen;
        for (const auto& id : ids_) {
            if (!seen.insert(id).second) {
                throw DataError("vector store: duplicate id \"" + id + "\"");
            }
        }
    }

    std::size_t dim_ = 0;
    std::vector<std::string> ids_;
    std::vector<double> matrix_; // row-major, size() x dim()
};

template <TextEncoder E>
VectorStore build_index(const Corpus& corpus, const E& encoder) {
    std::vector<std::string> ids;
    std::vector<Embedding> rows;
    ids.reserve(corpus.size());
    rows.reserve(corpus.size());
    for (const auto& entry : corpus.entries()) {
        try {
            rows.push_back(encoder.encode_text(fuse_document_text(entry)));
        } catch (const NumericError& ex) {
            throw NumericError("cannot embed \"" + entry.fc_id + "\": " + ex.what());
        }
        ids.push_back(entry.fc_id);
    }
    return VectorStore::from_rows(std::move(ids), rows);
}

namespace detail {

struct Candidate {
    double score;
    std::size_t row;
};

/// Strict "ranks ahead of": higher score, then smaller fc_id.
struct RanksAhead {
    const std::vector<std::string>* ids;
    bool operator()(const Candidate& a, const Candidate& b) const {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return (*ids)[a.row] < (*ids)[b.row];
    }
};

} // namespace detail

/// Exact top-min(k, |store|) by inner product with the normalized query.
inline std::vector<RankedResult> search(const VectorStore& store, const Embedding& query, std::size_t k) {
    if (k == 0) {
        throw UsageError("search: k must be positive");
    }
    if (query.dim() != store.dim()) {
        throw UsageError("search: query dimension does not match the index");
    }
    const double qn = query.norm();
    if (!(qn >= kMinNorm) || !std::isfinite(qn)) {
        throw NumericError("search: zero-norm query");
    }
    std::vector<double> q(query.values);
    for (double& v : q) {
        v /= qn;
    }

    const detail::RanksAhead ahead{&store.ids()};
    // Heap top is the worst retained candidate.
    std::priority_queue<detail::Candidate, std::vector<detail::Candidate>, detail::RanksAhead> heap(ahead);
    const std::size_t keep = std::min(k, store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
        const detail::Candidate c{dot(q, store.row(i)), i};
        if (heap.size() < keep) {
            heap.push(c);
        } else if (ahead(c, heap.top())) {
            heap.pop();
            heap.push(c);
        }
    }
    std::vector<detail::Candidate> best;
    best.reserve(heap.size());
    while (!heap.empty()) {
        best.push_back(heap.top());
        heap.pop();
    }
    std::sort(best.begin(), best.end(), ahead);

    std::vector<RankedResult> out;
    out.reserve(best.size());
    for (std::size_t r = 0; r < best.size(); ++r) {
        out.push_back({r + 1, store.ids()[best[r].row], best[r].score});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Index files: header {format, version, dim, count, ids, ids_checksum, layout,
// dtype} followed by count x dim binary64 values, row-major.

inline constexpr std::string_view kIndexFormat = "profret-index";

inline void write_index(std::ostream& out, const VectorStore& store) {
    nlohmann::ordered_json h;
    h["format"] = kIndexFormat;
    h["version"] = 1;
    h["dim"] = store.dim();
    h["count"] = store.size();
    h["ids_checksum"] = store.ids_checksum();
    h["layout"] = "row-major";
    h["dtype"] = "float64-le";
    h["ids"] = store.ids();
    persist::write_header(out, h);
    persist::write_f64_block(out, store.matrix());
}

inline void save_index(const std::string& path, const VectorStore& store) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write index file \"" + path + "\"");
    }
    write_index(out, store);
    if (!out) {
        throw DataError("failed writing index file \"" + path + "\"");
    }
}

inline VectorStore read_index(std::istream& in, const std::string& what = "index") {
    const auto h = persist::read_header(in, what);
    if (persist::header_get<std::string>(h, "format", what) != kIndexFormat) {
        throw DataError(what + ": not an index file");
    }
    if (persist::header_get<std::string>(h, "layout", what) != "row-major" ||
        persist::header_get<std::string>(h, "dtype", what) != "float64-le") {
        throw DataError(what + ": unsupported payload layout");
    }
    VectorStore s;
    s.dim_ = persist::header_get<std::size_t>(h, "dim", what);
    const auto count = persist::header_get<std::size_t>(h, "count", what);
    s.ids_ = persist::header_get<std::vector<std::string>>(h, "ids", what);
    if (s.ids_.size() != count) {
        throw DataError(what + ": id list length does not match count");
    }
    if (s.ids_checksum() != persist::header_get<std::string>(h, "ids_checksum", what)) {
        throw DataError(what + ": id checksum mismatch");
    }
    s.check_unique_ids();
    s.matrix_ = persist::read_f64_block(in, count * s.dim_, what);
    for (std::size_t i = 0; i < count; ++i) {
        const auto r = s.row(i);
        const double n = std::sqrt(dot(r, r));
        if (!(std::abs(n - 1.0) <= 1e-9)) {
            throw DataError(what + ": row for \"" + s.ids_[i] + "\" is not unit norm");
        }
    }
    return s;
}

inline VectorStore load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open index file \"" + path + "\"");
    }
    return read_index(in, path);
}

} // namespace profret
