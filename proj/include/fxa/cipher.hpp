// Copyright (c) fxacc contributors
// SPDX-License-Identifier: Apache-2.0
//
// Simulated symmetric cipher standing in for the hardware crypto unit.
// Every plaintext is sealed together with a fresh 64-bit nonce and an origin
// tag (program Constant vs Runtime value) under a keyed construction, so
// encrypting the same word twice yields different sealed payloads, and
// Constant-origin payloads can never collide with Runtime-origin ones.
//
// The execution side of the machine only ever sees ExecUnit, a capability
// that can combine, compare and address-hash ciphertexts but cannot decrypt.
#pragma once

#include <array>
#include <atomic>
#include <string>

#include "fxa/common.hpp"
#include "fxa/plainops.hpp"

namespace fxa::cipher {

enum class Origin : u8 { Constant = 'C', Runtime = 'R' };

// Thrown when a division instruction sees a decrypted zero divisor.
struct Ciphertext {
    u64 nonce = 0;
    u32 body = 0; // plaintext XOR keystream(nonce, origin)
    u64 tag = 0;  // keyed authenticator over (nonce, body, origin)
    Origin origin = Origin::Runtime;

    // The sealed payload: everything an observer gets to see.
    std::array<u8, 21> payload() const {
        std::array<u8, 21> p{};
        for (int k = 0; k < 8; ++k) p[k] = u8(nonce >> (8 * k));
        for (int k = 0; k < 4; ++k) p[8 + k] = u8(body >> (8 * k));
        p[12] = u8(origin);
        for (int k = 0; k < 8; ++k) p[13 + k] = u8(tag >> (8 * k));
        return p;
    }

    bool operator==(const Ciphertext& o) const {
        return nonce == o.nonce && body == o.body && tag == o.tag && origin == o.origin;
    }
};

// A 64-bit value as two word ciphertexts, big-endian: hi half first.
struct CipherPair {
    Ciphertext hi, lo;
    bool operator==(const CipherPair&) const = default;
};

using AddrHandle = u64;

inline std::string serialize(const Ciphertext& ct) {
    auto p = ct.payload();
    std::string s = base64_encode(std::vector<u8>(p.begin(), p.end()));
    s += char(ct.origin);
    return s;
}

inline Ciphertext deserialize(std::string_view text) {
    if (text.size() < 2) throw FormatError("ciphertext: too short");
    char oc = text.back();
    if (oc != 'C' && oc != 'R') throw FormatError("ciphertext: bad origin character");
    std::vector<u8> p = base64_decode(text.substr(0, text.size() - 1));
    if (p.size() != 21) throw FormatError("ciphertext: bad payload length");
    Ciphertext ct;
    for (int k = 0; k < 8; ++k) ct.nonce |= u64(p[k]) << (8 * k);
    for (int k = 0; k < 4; ++k) ct.body |= u32(p[8 + k]) << (8 * k);
    if (p[12] != u8('C') && p[12] != u8('R'))
        throw FormatError("ciphertext: bad origin byte");
    ct.origin = Origin(p[12]);
    if (char(p[12]) != oc)
        throw FormatError("ciphertext: origin character disagrees with payload");
    for (int k = 0; k < 8; ++k) ct.tag |= u64(p[13 + k]) << (8 * k);
    return ct;
}

// Word-op and pair-op tags. Cw variants apply component-wise to the two
// halves of a pair (the offset group for 64-bit locations); the non-Cw pair
// ops are genuine 64-bit arithmetic with carry across the halves.
enum class WOp { Add, Sub, Mul, DivS, DivU, FAdd, FSub, FMul, FDiv };
enum class POp { AddCw, SubCw, Add64, Sub64, Mul64, DivS64, DivU64, FAddD, FSubD, FMulD, FDivD };
enum class CmpW { S32, U32, F32 };
enum class CmpP { S64, U64, F64 };

class CipherContext {
  public:
    explicit CipherContext(u64 key_seed, u64 nonce_base = 0)
        : k_body_(mix64(key_seed, 0x6b626f6479ULL)),
          k_tag_(mix64(key_seed, 0x6b746167ULL)),
          k_addr_(mix64(key_seed, 0x6b61646472ULL)),
          nonce_base_(nonce_base) {}

    CipherContext(const CipherContext&) = delete;
    CipherContext& operator=(const CipherContext&) = delete;

    Ciphertext encrypt(u32 x, Origin origin) const {
        Ciphertext ct;
        ct.nonce = nonce_base_ + ctr_.fetch_add(1, std::memory_order_relaxed);
        ct.origin = origin;
        ct.body = x ^ pad(ct.nonce, origin);
        ct.tag = make_tag(ct.nonce, ct.body, origin);
        return ct;
    }

    u32 decrypt(const Ciphertext& ct) const {
        if (ct.tag != make_tag(ct.nonce, ct.body, ct.origin))
            throw IntegrityError("ciphertext failed authentication");
        return ct.body ^ pad(ct.nonce, ct.origin);
    }

    CipherPair encrypt_pair(u64 x, Origin origin) const {
        return {encrypt(plain::hi32(x), origin), encrypt(plain::lo32(x), origin)};
    }

    u64 decrypt_pair(const CipherPair& p) const {
        return plain::make64(decrypt(p.hi), decrypt(p.lo));
    }

    u64 addr_key() const { return k_addr_; }

  private:
    u32 pad(u64 nonce, Origin origin) const {
        return u32(mix64(k_body_, nonce * 2 + (origin == Origin::Constant ? 0 : 1)));
    }
    u64 make_tag(u64 nonce, u32 body, Origin origin) const {
        return mix64(k_tag_, nonce ^ (u64(body) << 17) ^ u64(u8(origin)) << 56);
    }

    u64 k_body_, k_tag_, k_addr_;
    u64 nonce_base_;
    mutable std::atomic<u64> ctr_{0};
};

// Capability handed to the machine: all results are re-sealed with Runtime
// origin; plaintext never escapes. Comparisons return the 1-bit result in the
// clear (branch outcomes are architecturally visible).
class ExecUnit {
  public:
    explicit ExecUnit(const CipherContext& ctx) : ctx_(ctx) {}

    Ciphertext ct_op(WOp op, const Ciphertext& a, const Ciphertext& b) const {
        u32 x = ctx_.decrypt(a), y = ctx_.decrypt(b);
        u32 r = 0;
        switch (op) {
        case WOp::Add: r = plain::add32(x, y); break;
        case WOp::Sub: r = plain::sub32(x, y); break;
        case WOp::Mul: r = plain::mul32(x, y); break;
        case WOp::DivS:
            if (y == 0) throw TrapDivZero{};
            r = plain::sdiv32(x, y);
            break;
        case WOp::DivU:
            if (y == 0) throw TrapDivZero{};
            r = plain::udiv32(x, y);
            break;
        case WOp::FAdd: r = plain::fadd32(x, y); break;
        case WOp::FSub: r = plain::fsub32(x, y); break;
        case WOp::FMul: r = plain::fmul32(x, y); break;
        case WOp::FDiv: r = plain::fdiv32(x, y); break;
        }
        return ctx_.encrypt(r, Origin::Runtime);
    }

    CipherPair ct_op(POp op, const CipherPair& a, const CipherPair& b) const {
        if (op == POp::AddCw || op == POp::SubCw) {
            // Offset application: independent mod-2^32 halves, no carry.
            u32 ah = ctx_.decrypt(a.hi), al = ctx_.decrypt(a.lo);
            u32 bh = ctx_.decrypt(b.hi), bl = ctx_.decrypt(b.lo);
            u32 rh, rl;
            if (op == POp::AddCw) {
                rh = plain::add32(ah, bh);
                rl = plain::add32(al, bl);
            } else {
                rh = plain::sub32(ah, bh);
                rl = plain::sub32(al, bl);
            }
            return {ctx_.encrypt(rh, Origin::Runtime), ctx_.encrypt(rl, Origin::Runtime)};
        }
        u64 x = ctx_.decrypt_pair(a), y = ctx_.decrypt_pair(b);
        u64 r = 0;
        switch (op) {
        case POp::Add64: r = plain::add64(x, y); break;
        case POp::Sub64: r = plain::sub64(x, y); break;
        case POp::Mul64: r = plain::mul64(x, y); break;
        case POp::DivS64:
            if (y == 0) throw TrapDivZero{};
            r = plain::sdiv64(x, y);
            break;
        case POp::DivU64:
            if (y == 0) throw TrapDivZero{};
            r = plain::udiv64(x, y);
            break;
        case POp::FAddD: r = plain::fadd64(x, y); break;
        case POp::FSubD: r = plain::fsub64(x, y); break;
        case POp::FMulD: r = plain::fmul64(x, y); break;
        case POp::FDivD: r = plain::fdiv64(x, y); break;
        default: break;
        }
        return ctx_.encrypt_pair(r, Origin::Runtime);
    }

    bool ct_cmp(plain::Rel rel, CmpW flavor, const Ciphertext& a, const Ciphertext& b) const {
        u32 x = ctx_.decrypt(a), y = ctx_.decrypt(b);
        switch (flavor) {
        case CmpW::S32: return plain::cmp_i32(rel, x, y);
        case CmpW::U32: return plain::cmp_u32(rel, x, y);
        case CmpW::F32: return plain::cmp_f32(rel, x, y);
        }
        return false;
    }

    bool ct_cmp(plain::Rel rel, CmpP flavor, const CipherPair& a, const CipherPair& b) const {
        u64 x = ctx_.decrypt_pair(a), y = ctx_.decrypt_pair(b);
        switch (flavor) {
        case CmpP::S64: return plain::cmp_i64(rel, x, y);
        case CmpP::U64: return plain::cmp_u64(rel, x, y);
        case CmpP::F64: return plain::cmp_f64(rel, x, y);
        }
        return false;
    }

    // Keyed injective hash of the decrypted address. Deliberately unrelated
    // to the address value itself; stable across re-encryptions.
    AddrHandle addr_handle(const Ciphertext& ct) const {
        return mix64(ctx_.addr_key(), u64(ctx_.decrypt(ct)));
    }

    // Re-seal the same plaintext under a fresh nonce with Runtime origin
    // (load-immediate: register contents are always Runtime-origin).
    Ciphertext refresh(const Ciphertext& ct) const {
        return ctx_.encrypt(ctx_.decrypt(ct), Origin::Runtime);
    }

    // Seal a machine-produced word (return addresses, initial register
    // fill). Always Runtime origin, like every other machine result.
    Ciphertext seal(u32 v) const { return ctx_.encrypt(v, Origin::Runtime); }

    // Reveal a control-flow index. The program counter is architecturally
    // public (every trace entry shows it), so routing a register through
    // here exposes nothing the trace does not already contain.
    u32 jump_target(const Ciphertext& ct) const { return ctx_.decrypt(ct); }

    // Conversions: exact value conversion between machine classes, sandwiched
    // by the offset constants at the instruction layer.
    Ciphertext cvt_i32_f32(const Ciphertext& a) const { return rew(plain::i32_to_f32(dec(a))); }
    Ciphertext cvt_u32_f32(const Ciphertext& a) const { return rew(plain::u32_to_f32(dec(a))); }
    Ciphertext cvt_f32_w32(const Ciphertext& a) const { return rew(plain::f32_to_w32(dec(a))); }
    CipherPair cvt_i32_f64(const Ciphertext& a) const { return rep(plain::i32_to_f64(dec(a))); }
    CipherPair cvt_u32_f64(const Ciphertext& a) const { return rep(plain::u32_to_f64(dec(a))); }
    Ciphertext cvt_f64_w32(const CipherPair& a) const { return rew(plain::f64_to_w32(decp(a))); }
    Ciphertext cvt_i64_f32(const CipherPair& a) const { return rew(plain::i64_to_f32(decp(a))); }
    Ciphertext cvt_u64_f32(const CipherPair& a) const { return rew(plain::u64_to_f32(decp(a))); }
    CipherPair cvt_f32_w64(const Ciphertext& a) const { return rep(plain::f32_to_w64(dec(a))); }
    CipherPair cvt_i64_f64(const CipherPair& a) const { return rep(plain::i64_to_f64(decp(a))); }
    CipherPair cvt_u64_f64(const CipherPair& a) const { return rep(plain::u64_to_f64(decp(a))); }
    CipherPair cvt_f64_w64(const CipherPair& a) const { return rep(plain::f64_to_w64(decp(a))); }
    CipherPair cvt_f32_f64(const Ciphertext& a) const { return rep(plain::f32_to_f64(dec(a))); }
    Ciphertext cvt_f64_f32(const CipherPair& a) const { return rew(plain::f64_to_f32(decp(a))); }
    CipherPair cvt_sx_w_l(const Ciphertext& a) const { return rep(plain::sext32(dec(a))); }
    CipherPair cvt_zx_w_l(const Ciphertext& a) const { return rep(plain::zext32(dec(a))); }
    Ciphertext cvt_lo_l_w(const CipherPair& a) const { return rew(plain::lo32(decp(a))); }

  private:
    u32 dec(const Ciphertext& c) const { return ctx_.decrypt(c); }
    u64 decp(const CipherPair& p) const { return ctx_.decrypt_pair(p); }
    Ciphertext rew(u32 v) const { return ctx_.encrypt(v, Origin::Runtime); }
    CipherPair rep(u64 v) const { return ctx_.encrypt_pair(v, Origin::Runtime); }

    const CipherContext& ctx_;
};

} // namespace fxa::cipher
