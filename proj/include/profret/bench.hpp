// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 profret Contributors

#pragma once

// Encoding latency and throughput.
//
//   latency_ms = T_seq / |Q| * 1000   (one query at a time)
//   qps        = |Q| / T_batch        (queries grouped into batches)
//
// Only encoding is timed. Each measurement is preceded by an untimed warmup over
// the first min(32, |Q|) queries.

#include "profret/encoder.hpp"
#include "profret/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <span>
#include <string>
#include <thread>
#include <vector>

#if defined(__unix__) || defined(__APPLE__)
#include <sys/utsname.h>
#endif

namespace profret {

inline constexpr std::size_t kWarmupQueries = 32;
inline constexpr std::size_t kDefaultBenchBatch = 128;

struct LatencyMeasurement {
    double t_seq_seconds = 0.0;
    double latency_ms = 0.0;
};

struct ThroughputMeasurement {
    double t_batch_seconds = 0.0;
    double qps = 0.0;
};

struct BenchReport {
    std::size_t query_count = 0;
    double t_seq_seconds = 0.0;
    double latency_ms = 0.0;
    std::size_t batch_size = 0;
    double t_batch_seconds = 0.0;
    double qps = 0.0;
};

inline double latency_ms_from(double t_seq_seconds, std::size_t query_count) {
    return t_seq_seconds / static_cast<double>(query_count) * 1000.0;
}

inline double qps_from(double t_batch_seconds, std::size_t query_count) {
    return static_cast<double>(query_count) / t_batch_seconds;
}

namespace detail {

using BenchClock = std::chrono::steady_clock;
static_assert(BenchClock::is_steady);

template <TextEncoder E>
Embedding encode_at(const E& encoder, std::span<const std::string> texts, std::size_t i) {
    try {
        return encoder.encode_text(texts[i]);
    } catch (const Error& ex) {
        throw NumericError("bench: query " + std::to_string(i) + " failed to encode: " + ex.what());
    }
}

template <TextEncoder E>
void warmup(const E& encoder, std::span<const std::string> texts, double& sink) {
    const std::size_t n = std::min(kWarmupQueries, texts.size());
    for (std::size_t i = 0; i < n; ++i) {
        sink += encode_at(encoder, texts, i).values.front();
    }
}

inline double seconds_since(BenchClock::time_point start) {
    return std::chrono::duration<double>(BenchClock::now() - start).count();
}

inline void keep(double v) {
    // Opaque to the optimizer so encoding work is not elided.
    asm volatile("" : : "g"(&v) : "memory");
}

} // namespace detail

template <TextEncoder E>
LatencyMeasurement measure_latency(const E& encoder, std::span<const std::string> texts) {
    if (texts.empty()) {
        throw UsageError("bench: need at least one query");
    }
    double sink = 0.0;
    detail::warmup(encoder, texts, sink);
    const auto start = detail::BenchClock::now();
    for (std::size_t i = 0; i < texts.size(); ++i) {
        sink += detail::encode_at(encoder, texts, i).values.front();
    }
    const double t = detail::seconds_since(start);
    detail::keep(sink);
    if (!(t > 0.0)) {
        throw NumericError("bench: clock did not advance");
    }
    return {t, latency_ms_from(t, texts.size())};
}

template <TextEncoder E>
ThroughputMeasurement measure_qps(const E& encoder, std::span<const std::string> texts, std::size_t batch_size) {
    if (texts.empty()) {
        throw UsageError("bench: need at least one query");
    }
    if (batch_size == 0) {
        throw UsageError("bench: batch_size must be positive");
    }
    double sink = 0.0;
    detail::warmup(encoder, texts, sink);
    std::vector<Embedding> batch;
    batch.reserve(batch_size);
    const auto start = detail::BenchClock::now();
    for (std::size_t begin = 0; begin < texts.size(); begin += batch_size) {
        const std::size_t end = std::min(texts.size(), begin + batch_size);
        batch.clear();
        for (std::size_t i = begin; i < end; ++i) {
            batch.push_back(detail::encode_at(encoder, texts, i));
        }
        sink += batch.back().values.front();
    }
    const double t = detail::seconds_since(start);
    detail::keep(sink);
    if (!(t > 0.0)) {
        throw NumericError("bench: clock did not advance");
    }
    return {t, qps_from(t, texts.size())};
}

template <TextEncoder E>
BenchReport run_bench(const E& encoder, std::span<const std::string> texts, std::size_t batch_size) {
    const auto lat = measure_latency(encoder, texts);
    const auto thr = measure_qps(encoder, texts, batch_size);
    return {texts.size(), lat.t_seq_seconds, lat.latency_ms, batch_size, thr.t_batch_seconds, thr.qps};
}

inline nlohmann::ordered_json host_descriptor() {
    nlohmann::ordered_json h;
#if defined(__unix__) || defined(__APPLE__)
    utsname u{};
    if (uname(&u) == 0) {
        h["hostname"] = u.nodename;
        h["os"] = std::string(u.sysname) + " " + u.release;
        h["machine"] = u.machine;
    }
#endif
#if defined(__VERSION__)
    h["compiler"] = __VERSION__;
#endif
    h["hardware_threads"] = std::to_string(std::thread::hardware_concurrency());
    return h;
}

inline nlohmann::ordered_json to_json(const BenchReport& r, bool with_host = true) {
    nlohmann::ordered_json j;
    j["query_count"] = r.query_count;
    j["t_seq_seconds"] = r.t_seq_seconds;
    j["latency_ms"] = r.latency_ms;
    j["batch_size"] = r.batch_size;
    j["t_batch_seconds"] = r.t_batch_seconds;
    j["qps"] = r.qps;
    if (with_host) {
        j["host"] = host_descriptor();
    }
    return j;
}

} // namespace profret
