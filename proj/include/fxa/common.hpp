// Copyright (c) fxacc contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fxa {

using u8 = std::uint8_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i32 = std::int32_t;
using i64 = std::int64_t;

// Base error for everything that is a usage/contract violation rather than a
// modeled runtime event (runtime traps have their own status channel).
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct IntegrityError : Error {
    explicit IntegrityError(const std::string& msg) : Error(msg) {}
};

struct FormatError : Error {
    explicit FormatError(const std::string& msg) : Error(msg) {}
};

// Thrown on integer division by zero, by the execution unit and the reference
// interpreter alike; a run that traps matches a run that traps.
struct TrapDivZero {};

// 64-bit keyed mixing step (splitmix64 finalizer over a key-offset input).
// Bijective for any fixed key, which is all the simulation needs.
inline u64 mix64(u64 key, u64 x) {
    u64 z = x + 0x9e3779b97f4a7c15ULL + key;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= key * 0xff51afd7ed558ccdULL + 0x2545f4914f6cdd1dULL;
    return z ^ (z >> 31);
}

inline constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string base64_encode(const std::vector<u8>& data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    size_t i = 0;
    for (; i + 3 <= data.size(); i += 3) {
        u32 v = (u32(data[i]) << 16) | (u32(data[i + 1]) << 8) | data[i + 2];
        out += kB64Alphabet[(v >> 18) & 63];
        out += kB64Alphabet[(v >> 12) & 63];
        out += kB64Alphabet[(v >> 6) & 63];
        out += kB64Alphabet[v & 63];
    }
    if (i + 1 == data.size()) {
        u32 v = u32(data[i]) << 16;
        out += kB64Alphabet[(v >> 18) & 63];
        out += kB64Alphabet[(v >> 12) & 63];
        out += "==";
    } else if (i + 2 == data.size()) {
        u32 v = (u32(data[i]) << 16) | (u32(data[i + 1]) << 8);
        out += kB64Alphabet[(v >> 18) & 63];
        out += kB64Alphabet[(v >> 12) & 63];
        out += kB64Alphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

inline std::vector<u8> base64_decode(std::string_view text) {
    auto val = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    if (text.size() % 4 != 0)
        throw FormatError("base64: length not a multiple of 4");
    std::vector<u8> out;
    out.reserve(text.size() / 4 * 3);
    for (size_t i = 0; i < text.size(); i += 4) {
        int pad = 0;
        u32 v = 0;
        for (int k = 0; k < 4; ++k) {
            char c = text[i + k];
            if (c == '=') {
                // Padding is only legal in the tail positions of the last group.
                if (i + 4 != text.size() || k < 2)
                    throw FormatError("base64: misplaced padding");
                ++pad;
                v <<= 6;
                continue;
            }
            if (pad > 0) throw FormatError("base64: data after padding");
            int d = val(c);
            if (d < 0) throw FormatError("base64: bad character");
            v = (v << 6) | u32(d);
        }
        out.push_back(u8(v >> 16));
        if (pad < 2) out.push_back(u8(v >> 8));
        if (pad < 1) out.push_back(u8(v));
    }
    return out;
}

inline void put_u32le(std::vector<u8>& out, u32 v) {
    out.push_back(u8(v));
    out.push_back(u8(v >> 8));
    out.push_back(u8(v >> 16));
    out.push_back(u8(v >> 24));
}

inline void put_u64le(std::vector<u8>& out, u64 v) {
    put_u32le(out, u32(v));
    put_u32le(out, u32(v >> 32));
}

struct ByteReader {
    const std::vector<u8>& data;
    size_t pos = 0;

    explicit ByteReader(const std::vector<u8>& d) : data(d) {}

    u8 get_u8() {
        if (pos >= data.size()) throw FormatError("unexpected end of data");
        return data[pos++];
    }
    u32 get_u32le() {
        u32 v = 0;
        for (int k = 0; k < 4; ++k) v |= u32(get_u8()) << (8 * k);
        return v;
    }
    u64 get_u64le() {
        u64 v = get_u32le();
        return v | (u64(get_u32le()) << 32);
    }
    bool done() const { return pos == data.size(); }
};

} // namespace fxa
