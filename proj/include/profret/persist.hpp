// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 profret Contributors

#pragma once

// On-disk convention shared by model checkpoints and vector indexes:
//
//   <one line of JSON header>\n
//   <payload: IEEE-754 binary64 values, little-endian, no padding>
//
// The header states the payload shape. Readers reject short or over-long payloads.

#include "profret/error.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace profret::persist {

inline void write_header(std::ostream& out, const nlohmann::ordered_json& header) {
    out << header.dump() << '\n';
}

inline nlohmann::json read_header(std::istream& in, const std::string& what) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(what + ": missing header line");
    }
    try {
        auto j = nlohmann::json::parse(line);
        if (!j.is_object()) {
            throw DataError(what + ": header is not a JSON object");
        }
        return j;
    } catch (const nlohmann::json::parse_error& ex) {
        throw DataError(what + ": malformed header: " + ex.what());
    }
}

inline void write_f64_block(std::ostream& out, std::span<const double> values) {
    static_assert(sizeof(double) == 8);
    std::vector<unsigned char> buf(values.size() * 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto bits = std::bit_cast<std::uint64_t>(values[i]);
        for (int b = 0; b < 8; ++b) {
            buf[i * 8 + b] = static_cast<unsigned char>(bits & 0xffU);
            bits >>= 8;
        }
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

inline std::vector<double> read_f64_block(std::istream& in, std::size_t count, const std::string& what) {
    std::vector<unsigned char> buf(count * 8);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
        throw DataError(what + ": payload truncated (expected " + std::to_string(count) + " values)");
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw DataError(what + ": trailing bytes after payload");
    }
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t bits = 0;
        for (int b = 7; b >= 0; --b) {
            bits = (bits << 8) | buf[i * 8 + b];
        }
        values[i] = std::bit_cast<double>(bits);
    }
    return values;
}

template <typename T>
T header_get(const nlohmann::json& header, const char* key, const std::string& what) {
    const auto it = header.find(key);
    if (it == header.end()) {
        throw DataError(what + ": header missing \"" + key + "\"");
    }
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw DataError(what + ": header field \"" + key + "\" has the wrong type");
    }
}

} // namespace profret::persist
