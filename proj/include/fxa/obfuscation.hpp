// Copyright (c) fxacc contributors
// SPDX-License-Identifier: Apache-2.0
//
// Offset-scheme bookkeeping for the compiler: which location holds each
// source variable, which additive displacement each location currently
// carries, and the temporary-allocation discipline. Labels capture the
// current scheme so that every goto can be patched back onto it with
// compensating adds.
#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fxa/cipher.hpp"
#include "fxa/common.hpp"
#include "fxa/isa.hpp"

namespace fxa::obf {

using Rng = std::mt19937_64;

// Register file geometry. Indices 0..kNumGprs-1 are the GPRs and indices up
// to kSprBound-1 alias the temporary (SPR) space; both live in one register
// file. Allocation requests past the bound are backed by a reserved
// word-addressed stack region instead of a register.
constexpr u32 kSprBound = 256;
constexpr u32 kStackBase = 0x4000'0000u;

// A storage location. Scalars live in registers (wide scalars in a register
// pair named by the base index, hi half first). Spilled temporaries live at
// fixed word addresses in the stack region. Aggregate storage is tracked per
// field stripe: one designator covers every element of the stripe, however
// long the array is.
struct Loc {
    enum class Kind : u8 { Reg, Mem, Stripe };
    Kind kind = Kind::Reg;
    u32 a = 0; // Reg: register index. Mem: word address. Stripe: object id.
    u32 b = 0; // Stripe: stripe index within the object.

    static Loc reg(u32 r) { return {Kind::Reg, r, 0}; }
    static Loc mem(u32 addr) { return {Kind::Mem, addr, 0}; }
    static Loc stripe(u32 object, u32 index) { return {Kind::Stripe, object, index}; }

    friend auto operator<=>(const Loc&, const Loc&) = default;
};

inline std::string to_string(const Loc& l) {
    switch (l.kind) {
    case Loc::Kind::Reg: return "r" + std::to_string(l.a);
    case Loc::Kind::Mem: return "m[" + std::to_string(l.a) + "]";
    default: return "s" + std::to_string(l.a) + "." + std::to_string(l.b);
    }
}

// The displacement carried by one location. Word values use lo alone; wide
// values carry an independent displacement per half, applied component-wise.
struct Offset {
    u32 lo = 0;
    u32 hi = 0;
    bool wide = false;

    static Offset word(u32 d) { return {d, 0, false}; }
    static Offset pair(u32 hi, u32 lo) { return {lo, hi, true}; }

    bool is_zero() const { return lo == 0 && hi == 0; }
    friend bool operator==(const Offset&, const Offset&) = default;
};

inline Offset offset_sub(const Offset& a, const Offset& b) {
    if (a.wide != b.wide) throw Error("offset width mismatch");
    return {a.lo - b.lo, a.hi - b.hi, a.wide};
}

// Draw the next displacement. Every arrangement of offsets must be
// equiprobable, so the draw is uniform over all 2^32 words and depends only
// on the seed and the draw index.
inline u32 fresh_offset(Rng& rng) { return u32(rng()); }

inline Offset fresh_word(Rng& rng) { return Offset::word(fresh_offset(rng)); }

// Hi half drawn first, then lo, so wide locations consume exactly two draws.
inline Offset fresh_wide(Rng& rng) {
    u32 hi = fresh_offset(rng);
    u32 lo = fresh_offset(rng);
    return Offset::pair(hi, lo);
}

// Successor-style temporary allocation: the next temporary is always the
// next index up, never an index at or below the one in hand.
inline u32 ralph_alloc(u32 current) { return current + 1; }

// Concrete location of allocation index i. Past the register file the
// temporary is backed by a stack word.
inline Loc temp_loc(u32 index) {
    if (index < kSprBound) return Loc::reg(index);
    return Loc::mem(kStackBase + (index - kSprBound));
}

// D: every location written by emitted code has a current displacement here.
// A whole field stripe shares a single entry.
class OffsetDB {
  public:
    void set(const Loc& l, const Offset& o) { map_[l] = o; }

    const Offset& at(const Loc& l) const {
        auto it = map_.find(l);
        if (it == map_.end()) throw Error("no offset recorded for " + to_string(l));
        return it->second;
    }

    std::optional<Offset> find(const Loc& l) const {
        auto it = map_.find(l);
        if (it == map_.end()) return std::nullopt;
        return it->second;
    }

    bool contains(const Loc& l) const { return map_.count(l) != 0; }
    void erase(const Loc& l) { map_.erase(l); }
    size_t size() const { return map_.size(); }

    auto begin() const { return map_.begin(); }
    auto end() const { return map_.end(); }

    friend bool operator==(const OffsetDB&, const OffsetDB&) = default;

  private:
    std::map<Loc, Offset> map_;
};

// L: source variables bound to locations, in declaration order. Later
// bindings of the same name shadow earlier ones; a location can back at most
// one live variable at a time.
class VarBinding {
  public:
    void bind(const std::string& name, const Loc& loc) {
        // Shadowed variables are still live, so the whole binding list counts.
        for (const auto& e : order_)
            if (e.second == loc && e.first != name)
                throw Error("location " + to_string(loc) + " already backs '" + e.first + "'");
        order_.emplace_back(name, loc);
    }

    std::optional<Loc> lookup(const std::string& name) const {
        for (auto it = order_.rbegin(); it != order_.rend(); ++it)
            if (it->first == name) return it->second;
        return std::nullopt;
    }

    // True while (name, loc) is live, even if an inner scope currently
    // shadows the name: the outer binding still owns its location.
    bool bound_at(const std::string& name, const Loc& loc) const {
        for (const auto& e : order_)
            if (e.first == name && e.second == loc) return true;
        return false;
    }

    size_t mark() const { return order_.size(); }
    void unbind_to(size_t m) { order_.resize(m); }

    // Current binding per name, ordered by where that binding was declared.
    std::vector<const std::pair<std::string, Loc>*> effective() const {
        std::vector<const std::pair<std::string, Loc>*> out;
        for (const auto& e : order_) {
            bool shadowed = false;
            for (auto it = order_.rbegin(); &*it != &e; ++it)
                if (it->first == e.first) {
                    shadowed = true;
                    break;
                }
            if (!shadowed) out.push_back(&e);
        }
        return out;
    }

  private:
    std::vector<std::pair<std::string, Loc>> order_;
};

// What a label remembers: the displacement of every register-resident
// variable in scope, in declaration order. Memory-stripe schemes are fixed
// at declaration and never drift, so registers are the whole story.
struct SnapEntry {
    std::string var;
    Loc loc;
    Offset off;
};

struct SchemeSnapshot {
    std::string label;
    std::vector<SnapEntry> entries;
};

inline SchemeSnapshot snapshot(const std::string& label, const OffsetDB& db,
                               const VarBinding& vars) {
    SchemeSnapshot s;
    s.label = label;
    for (const auto* e : vars.effective()) {
        if (e->second.kind != Loc::Kind::Reg) continue;
        s.entries.push_back({e->first, e->second, db.at(e->second)});
    }
    return s;
}

// Emit the compensating adds that move the current scheme back onto the
// snapshot: per drifted variable, one add-with-constant carrying
// E[snap - now] (component-wise for register pairs). Untouched variables
// emit nothing. The database is updated to agree with the snapshot on its
// whole domain.
inline std::vector<isa::Instruction> restore_code(const SchemeSnapshot& snap, OffsetDB& now,
                                                  const VarBinding& vars,
                                                  const cipher::CipherContext& ctx) {
    std::vector<isa::Instruction> out;
    for (const auto& e : snap.entries) {
        if (!vars.bound_at(e.var, e.loc))
            throw Error("cannot restore '" + e.var + "': no longer bound to " + to_string(e.loc));
        const Offset& cur = now.at(e.loc);
        if (cur == e.off) continue;
        Offset d = offset_sub(e.off, cur);
        isa::Instruction ins;
        if (e.off.wide) {
            ins.op = isa::Opcode::addi2;
            ins.regs = {e.loc.a, e.loc.a, 0};
            ins.consts.emplace_back(
                ctx.encrypt_pair((u64(d.hi) << 32) | d.lo, cipher::Origin::Constant));
        } else {
            ins.op = isa::Opcode::addi;
            ins.regs = {e.loc.a, e.loc.a, 0};
            ins.consts.emplace_back(ctx.encrypt(d.lo, cipher::Origin::Constant));
        }
        out.push_back(std::move(ins));
        now.set(e.loc, e.off);
    }
    return out;
}

} // namespace fxa::obf
