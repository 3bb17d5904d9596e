// Copyright (c) fxacc contributors
// SPDX-License-Identifier: Apache-2.0
//
// Plain-word arithmetic with total semantics. Both the simulated cipher unit
// and the reference interpreter build on these definitions, so the two sides
// agree bit-for-bit wherever ISO C would leave behavior open:
//   - signed overflow wraps (two's complement)
//   - division truncates toward zero; INT_MIN / -1 wraps; x % y = x - (x/y)*y
//   - float->int truncates toward zero, then wraps mod 2^width; NaN/inf -> 0
//   - float arithmetic is the host's IEEE 754 single/double arithmetic
#pragma once

#include <bit>
#include <cmath>
#include <limits>

#include "fxa/common.hpp"

namespace fxa::plain {

inline u32 add32(u32 a, u32 b) { return a + b; }
inline u32 sub32(u32 a, u32 b) { return a - b; }
inline u32 mul32(u32 a, u32 b) { return a * b; }
inline u64 add64(u64 a, u64 b) { return a + b; }
inline u64 sub64(u64 a, u64 b) { return a - b; }
inline u64 mul64(u64 a, u64 b) { return a * b; }

// Division helpers assume a nonzero divisor; the zero check is the caller's
// trap point.
inline u32 sdiv32(u32 a, u32 b) {
    i32 x = i32(a), y = i32(b);
    if (x == std::numeric_limits<i32>::min() && y == -1) return a; // wraps
    return u32(x / y);
}
inline u32 udiv32(u32 a, u32 b) { return a / b; }
inline u64 sdiv64(u64 a, u64 b) {
    i64 x = i64(a), y = i64(b);
    if (x == std::numeric_limits<i64>::min() && y == -1) return a;
    return u64(x / y);
}
inline u64 udiv64(u64 a, u64 b) { return a / b; }

inline float f32_of_bits(u32 b) { return std::bit_cast<float>(b); }
inline u32 bits_of_f32(float f) { return std::bit_cast<u32>(f); }
inline double f64_of_bits(u64 b) { return std::bit_cast<double>(b); }
inline u64 bits_of_f64(double d) { return std::bit_cast<u64>(d); }

inline u32 fadd32(u32 a, u32 b) { return bits_of_f32(f32_of_bits(a) + f32_of_bits(b)); }
inline u32 fsub32(u32 a, u32 b) { return bits_of_f32(f32_of_bits(a) - f32_of_bits(b)); }
inline u32 fmul32(u32 a, u32 b) { return bits_of_f32(f32_of_bits(a) * f32_of_bits(b)); }
inline u32 fdiv32(u32 a, u32 b) { return bits_of_f32(f32_of_bits(a) / f32_of_bits(b)); }
inline u64 fadd64(u64 a, u64 b) { return bits_of_f64(f64_of_bits(a) + f64_of_bits(b)); }
inline u64 fsub64(u64 a, u64 b) { return bits_of_f64(f64_of_bits(a) - f64_of_bits(b)); }
inline u64 fmul64(u64 a, u64 b) { return bits_of_f64(f64_of_bits(a) * f64_of_bits(b)); }
inline u64 fdiv64(u64 a, u64 b) { return bits_of_f64(f64_of_bits(a) / f64_of_bits(b)); }

// Truncate a finite float/double toward zero and wrap into 64 bits. Values
// beyond 2^64 are exact multiples of large powers of two, so fmod is exact.
template <typename F>
inline u64 trunc_wrap64(F f) {
    if (!std::isfinite(f)) return 0;
    F t = std::trunc(f);
    const F two64 = F(18446744073709551616.0); // 2^64
    if (t >= two64 || t <= -two64) t = std::fmod(t, two64);
    if (t < F(0)) {
        // -t is in [0, 2^64); convert then negate mod 2^64.
        u64 m = u64(-t);
        return ~m + 1;
    }
    // t in [0, 2^64); u64 conversion of values >= 2^63 is still exact here
    // because t is an integer-valued float below 2^64.
    if (t >= F(9223372036854775808.0)) { // 2^63
        return u64(t - F(9223372036854775808.0)) + 0x8000000000000000ULL;
    }
    return u64(t);
}

inline u32 f32_to_w32(u32 fb) { return u32(trunc_wrap64(f32_of_bits(fb))); }
inline u64 f32_to_w64(u32 fb) { return trunc_wrap64(f32_of_bits(fb)); }
inline u32 f64_to_w32(u64 db) { return u32(trunc_wrap64(f64_of_bits(db))); }
inline u64 f64_to_w64(u64 db) { return trunc_wrap64(f64_of_bits(db)); }

inline u32 i32_to_f32(u32 w) { return bits_of_f32(float(i32(w))); }
inline u32 u32_to_f32(u32 w) { return bits_of_f32(float(w)); }
inline u64 i32_to_f64(u32 w) { return bits_of_f64(double(i32(w))); }
inline u64 u32_to_f64(u32 w) { return bits_of_f64(double(w)); }
inline u32 i64_to_f32(u64 w) { return bits_of_f32(float(i64(w))); }
inline u32 u64_to_f32(u64 w) { return bits_of_f32(float(w)); }
inline u64 i64_to_f64(u64 w) { return bits_of_f64(double(i64(w))); }
inline u64 u64_to_f64(u64 w) { return bits_of_f64(double(w)); }

inline u32 f64_to_f32(u64 db) { return bits_of_f32(float(f64_of_bits(db))); }
inline u64 f32_to_f64(u32 fb) { return bits_of_f64(double(f32_of_bits(fb))); }

inline u64 sext32(u32 w) { return u64(i64(i32(w))); }
inline u64 zext32(u32 w) { return u64(w); }
inline u32 lo32(u64 w) { return u32(w); }
inline u32 hi32(u64 w) { return u32(w >> 32); }
inline u64 make64(u32 hi, u32 lo) { return (u64(hi) << 32) | lo; }

enum class Rel { Eq, Ne, Lt, Gt, Le, Ge };

inline bool cmp_i32(Rel r, u32 a, u32 b) {
    i32 x = i32(a), y = i32(b);
    switch (r) {
    case Rel::Eq: return x == y;
    case Rel::Ne: return x != y;
    case Rel::Lt: return x < y;
    case Rel::Gt: return x > y;
    case Rel::Le: return x <= y;
    case Rel::Ge: return x >= y;
    }
    return false;
}
inline bool cmp_u32(Rel r, u32 a, u32 b) {
    switch (r) {
    case Rel::Eq: return a == b;
    case Rel::Ne: return a != b;
    case Rel::Lt: return a < b;
    case Rel::Gt: return a > b;
    case Rel::Le: return a <= b;
    case Rel::Ge: return a >= b;
    }
    return false;
}
inline bool cmp_f32(Rel r, u32 a, u32 b) {
    float x = f32_of_bits(a), y = f32_of_bits(b);
    switch (r) {
    case Rel::Eq: return x == y;
    case Rel::Ne: return x != y;
    case Rel::Lt: return x < y;
    case Rel::Gt: return x > y;
    case Rel::Le: return x <= y;
    case Rel::Ge: return x >= y;
    }
    return false;
}
inline bool cmp_i64(Rel r, u64 a, u64 b) {
    i64 x = i64(a), y = i64(b);
    switch (r) {
    case Rel::Eq: return x == y;
    case Rel::Ne: return x != y;
    case Rel::Lt: return x < y;
    case Rel::Gt: return x > y;
    case Rel::Le: return x <= y;
    case Rel::Ge: return x >= y;
    }
    return false;
}
inline bool cmp_u64(Rel r, u64 a, u64 b) {
    switch (r) {
    case Rel::Eq: return a == b;
    case Rel::Ne: return a != b;
    case Rel::Lt: return a < b;
    case Rel::Gt: return a > b;
    case Rel::Le: return a <= b;
    case Rel::Ge: return a >= b;
    }
    return false;
}
inline bool cmp_f64(Rel r, u64 a, u64 b) {
    double x = f64_of_bits(a), y = f64_of_bits(b);
    switch (r) {
    case Rel::Eq: return x == y;
    case Rel::Ne: return x != y;
    case Rel::Lt: return x < y;
    case Rel::Gt: return x > y;
    case Rel::Le: return x <= y;
    case Rel::Ge: return x >= y;
    }
    return false;
}

} // namespace fxa::plain
