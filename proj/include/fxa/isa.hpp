// Copyright (c) fxacc contributors
// SPDX-License-Identifier: Apache-2.0
//
// Instruction set for the fused-offset machine. Every arithmetic opcode
// embeds the encrypted constants that adjust its operand/result offsets, so
// an instruction is a black box from encrypted inputs to encrypted outputs.
//
// Register operands are indices into one register file: 0..31 are the GPRs,
// indices from 32 up address the temporary (SPR) space. 64-bit values live in
// adjacent register pairs named by their base index, hi half first.
#pragma once

#include <array>
#include <optional>
#include <sstream>
#include <variant>
#include <vector>

#include "fxa/cipher.hpp"
#include "fxa/common.hpp"

namespace fxa::isa {

using cipher::Ciphertext;
using cipher::CipherPair;

constexpr u32 kNumGprs = 32;

// name, regs, consts(kinds), pair-mask over regs, jump kind, branch info
// jump kind: N = none, R = pc-relative, A = absolute
//
// Branch constant conventions:
//   beq/bne (and beq2/bne2): one constant; taken iff r1 [=] r2 [+] k'.
//     Equality survives a common shift, so k' = E[d1 - d2] folds both
//     operand displacements away exactly.
//   blt/bgt/ble/bge (signed word): one constant; taken iff r1 [rel] r2 [+] k'.
//     Signed order does NOT survive a shift mod 2^32, so the left operand
//     must arrive with zero displacement (the compiler strips it with an
//     addi into a scratch register first); k' = E[-d2] handles the right.
//   unsigned/float/64-bit/double order branches: two constants; taken iff
//     (r1 [-] k'1) [rel] (r2 [-] k'2), stripping both displacements inside
//     the fused operation.
#define FXA_OPCODES(X)                                                        \
    /*       name     nregs consts      pairmask jump  branch */             \
    X(add,   "add",   3,    (W),        0b000,   N)                           \
    X(sub,   "sub",   3,    (W),        0b000,   N)                           \
    X(addi,  "addi",  2,    (W),        0b000,   N)                           \
    X(li,    "li",    1,    (W),        0b000,   N)                           \
    X(mul,   "mul",   3,    (W, W, W),  0b000,   N)                           \
    X(div,   "div",   3,    (W, W, W),  0b000,   N)                           \
    X(divu,  "divu",  3,    (W, W, W),  0b000,   N)                           \
    X(mov,   "mov",   2,    (),         0b000,   N)                           \
    X(nop,   "nop",   0,    (),         0b000,   N)                           \
    X(addf,  "addf",  3,    (W, W, W),  0b000,   N)                           \
    X(subf,  "subf",  3,    (W, W, W),  0b000,   N)                           \
    X(mulf,  "mulf",  3,    (W, W, W),  0b000,   N)                           \
    X(divf,  "divf",  3,    (W, W, W),  0b000,   N)                           \
    X(addi2, "addi2", 2,    (P),        0b011,   N)                           \
    X(add2,  "add2",  3,    (P, P, P),  0b111,   N)                           \
    X(sub2,  "sub2",  3,    (P, P, P),  0b111,   N)                           \
    X(mul_ll, "mul_ll", 3,  (P, P, P),  0b111,   N)                           \
    X(div_ll, "div_ll", 3,  (P, P, P),  0b111,   N)                           \
    X(divu_ll, "divu_ll", 3, (P, P, P), 0b111,   N)                           \
    X(add_d, "add_d", 3,    (P, P, P),  0b111,   N)                           \
    X(sub_d, "sub_d", 3,    (P, P, P),  0b111,   N)                           \
    X(mul_d, "mul_d", 3,    (P, P, P),  0b111,   N)                           \
    X(div_d, "div_d", 3,    (P, P, P),  0b111,   N)                           \
    X(beq,   "beq",   2,    (W),        0b000,   R)                           \
    X(bne,   "bne",   2,    (W),        0b000,   R)                           \
    X(blt,   "blt",   2,    (W),        0b000,   R)                           \
    X(bgt,   "bgt",   2,    (W),        0b000,   R)                           \
    X(ble,   "ble",   2,    (W),        0b000,   R)                           \
    X(bge,   "bge",   2,    (W),        0b000,   R)                           \
    X(bltu,  "bltu",  2,    (W, W),     0b000,   R)                           \
    X(bgtu,  "bgtu",  2,    (W, W),     0b000,   R)                           \
    X(bleu,  "bleu",  2,    (W, W),     0b000,   R)                           \
    X(bgeu,  "bgeu",  2,    (W, W),     0b000,   R)                           \
    X(beqf,  "beqf",  2,    (W, W),     0b000,   R)                           \
    X(bnef,  "bnef",  2,    (W, W),     0b000,   R)                           \
    X(bltf,  "bltf",  2,    (W, W),     0b000,   R)                           \
    X(bgtf,  "bgtf",  2,    (W, W),     0b000,   R)                           \
    X(blef,  "blef",  2,    (W, W),     0b000,   R)                           \
    X(bgef,  "bgef",  2,    (W, W),     0b000,   R)                           \
    X(beq2,  "beq2",  2,    (P),        0b011,   R)                           \
    X(bne2,  "bne2",  2,    (P),        0b011,   R)                           \
    X(blt2,  "blt2",  2,    (P, P),     0b011,   R)                           \
    X(bgt2,  "bgt2",  2,    (P, P),     0b011,   R)                           \
    X(ble2,  "ble2",  2,    (P, P),     0b011,   R)                           \
    X(bge2,  "bge2",  2,    (P, P),     0b011,   R)                           \
    X(bltu2, "bltu2", 2,    (P, P),     0b011,   R)                           \
    X(bgtu2, "bgtu2", 2,    (P, P),     0b011,   R)                           \
    X(bleu2, "bleu2", 2,    (P, P),     0b011,   R)                           \
    X(bgeu2, "bgeu2", 2,    (P, P),     0b011,   R)                           \
    X(beqd,  "beqd",  2,    (P, P),     0b011,   R)                           \
    X(bned,  "bned",  2,    (P, P),     0b011,   R)                           \
    X(bltd,  "bltd",  2,    (P, P),     0b011,   R)                           \
    X(bgtd,  "bgtd",  2,    (P, P),     0b011,   R)                           \
    X(bled,  "bled",  2,    (P, P),     0b011,   R)                           \
    X(bged,  "bged",  2,    (P, P),     0b011,   R)                           \
    X(b,     "b",     0,    (),         0b000,   R)                           \
    X(j,     "j",     0,    (),         0b000,   A)                           \
    X(jal,   "jal",   0,    (),         0b000,   A)                           \
    X(jr,    "jr",    0,    (),         0b000,   N)                           \
    X(sw,    "sw",    2,    (W),        0b000,   N)                           \
    X(lw,    "lw",    2,    (W),        0b000,   N)                           \
    X(cvt_if,  "cvt_if",  2, (W, W),    0b000,   N)                           \
    X(cvt_uf,  "cvt_uf",  2, (W, W),    0b000,   N)                           \
    X(cvt_fi,  "cvt_fi",  2, (W, W),    0b000,   N)                           \
    X(cvt_id,  "cvt_id",  2, (W, P),    0b001,   N)                           \
    X(cvt_ud,  "cvt_ud",  2, (W, P),    0b001,   N)                           \
    X(cvt_di,  "cvt_di",  2, (P, W),    0b010,   N)                           \
    X(cvt_lf,  "cvt_lf",  2, (P, W),    0b010,   N)                           \
    X(cvt_ulf, "cvt_ulf", 2, (P, W),    0b010,   N)                           \
    X(cvt_fl,  "cvt_fl",  2, (W, P),    0b001,   N)                           \
    X(cvt_ld,  "cvt_ld",  2, (P, P),    0b011,   N)                           \
    X(cvt_uld, "cvt_uld", 2, (P, P),    0b011,   N)                           \
    X(cvt_dl,  "cvt_dl",  2, (P, P),    0b011,   N)                           \
    X(cvt_fd,  "cvt_fd",  2, (W, P),    0b001,   N)                           \
    X(cvt_df,  "cvt_df",  2, (P, W),    0b010,   N)                           \
    X(cvt_wl,  "cvt_wl",  2, (W, P),    0b001,   N)                           \
    X(cvt_wlu, "cvt_wlu", 2, (W, P),    0b001,   N)                           \
    X(cvt_lw,  "cvt_lw",  2, (P, W),    0b010,   N)

enum class Opcode : u8 {
#define FXA_ENUM(id, name, nregs, consts, pm, jk) id,
    FXA_OPCODES(FXA_ENUM)
#undef FXA_ENUM
};

constexpr size_t kNumOpcodes = 0
#define FXA_COUNT(id, name, nregs, consts, pm, jk) +1
    FXA_OPCODES(FXA_COUNT)
#undef FXA_COUNT
    ;

enum class ConstKind : u8 { Word, Pair };
enum class JumpKind : u8 { None, Relative, Absolute };

struct OpInfo {
    const char* name;
    u8 nregs;
    u8 nconsts;
    std::array<ConstKind, 3> const_kinds;
    u8 reg_pair_mask; // bit i set: regs[i] names a register pair
    JumpKind jump;
    bool is_cond_branch;
};

namespace detail {
constexpr ConstKind W = ConstKind::Word;
constexpr ConstKind P = ConstKind::Pair;

struct CK {
    std::array<ConstKind, 3> kinds{W, W, W};
    u8 n = 0;
    constexpr CK() = default;
    constexpr CK(ConstKind a) : kinds{a, W, W}, n(1) {}
    constexpr CK(ConstKind a, ConstKind b) : kinds{a, b, W}, n(2) {}
    constexpr CK(ConstKind a, ConstKind b, ConstKind c) : kinds{a, b, c}, n(3) {}
};

constexpr JumpKind N = JumpKind::None;
constexpr JumpKind R = JumpKind::Relative;
constexpr JumpKind A = JumpKind::Absolute;
} // namespace detail

inline const OpInfo& op_info(Opcode op) {
    using namespace detail;
    static const std::array<OpInfo, kNumOpcodes> table = [] {
        std::array<OpInfo, kNumOpcodes> t{};
        size_t i = 0;
#define FXA_INFO(id, name_, nregs_, consts_, pm_, jk_)                        \
    {                                                                         \
        CK ck = CK consts_;                                                   \
        t[i++] = OpInfo{name_, nregs_, ck.n, ck.kinds, u8(pm_), jk_,          \
                        jk_ == R && Opcode::id != Opcode::b};                 \
    }
        FXA_OPCODES(FXA_INFO)
#undef FXA_INFO
        return t;
    }();
    return table[size_t(op)];
}

inline const char* op_name(Opcode op) { return op_info(op).name; }

inline std::optional<Opcode> op_from_name(std::string_view name) {
    for (size_t i = 0; i < kNumOpcodes; ++i)
        if (name == op_info(Opcode(i)).name) return Opcode(i);
    return std::nullopt;
}

// Complement of a conditional branch: the opcode deciding the negated
// predicate on the same operands. For float/double families the complements
// are unordered-inclusive (bgef takes exactly when bltf does not, NaN
// included), so the pairing is exact for every input.
inline Opcode complement_of(Opcode op) {
    switch (op) {
    case Opcode::beq: return Opcode::bne;
    case Opcode::bne: return Opcode::beq;
    case Opcode::blt: return Opcode::bge;
    case Opcode::bge: return Opcode::blt;
    case Opcode::ble: return Opcode::bgt;
    case Opcode::bgt: return Opcode::ble;
    case Opcode::bltu: return Opcode::bgeu;
    case Opcode::bgeu: return Opcode::bltu;
    case Opcode::bleu: return Opcode::bgtu;
    case Opcode::bgtu: return Opcode::bleu;
    case Opcode::beqf: return Opcode::bnef;
    case Opcode::bnef: return Opcode::beqf;
    case Opcode::bltf: return Opcode::bgef;
    case Opcode::bgef: return Opcode::bltf;
    case Opcode::blef: return Opcode::bgtf;
    case Opcode::bgtf: return Opcode::blef;
    case Opcode::beq2: return Opcode::bne2;
    case Opcode::bne2: return Opcode::beq2;
    case Opcode::blt2: return Opcode::bge2;
    case Opcode::bge2: return Opcode::blt2;
    case Opcode::ble2: return Opcode::bgt2;
    case Opcode::bgt2: return Opcode::ble2;
    case Opcode::bltu2: return Opcode::bgeu2;
    case Opcode::bgeu2: return Opcode::bltu2;
    case Opcode::bleu2: return Opcode::bgtu2;
    case Opcode::bgtu2: return Opcode::bleu2;
    case Opcode::beqd: return Opcode::bned;
    case Opcode::bned: return Opcode::beqd;
    case Opcode::bltd: return Opcode::bged;
    case Opcode::bged: return Opcode::bltd;
    case Opcode::bled: return Opcode::bgtd;
    case Opcode::bgtd: return Opcode::bled;
    default: throw Error("complement_of: not a conditional branch");
    }
}

// True for the "negated" member of each complement pair (the one a polarity
// swap introduces); shape canonicalization maps it back to its partner.
inline bool is_negated_branch(Opcode op) {
    switch (op) {
    case Opcode::bne:
    case Opcode::bge:
    case Opcode::bgt:
    case Opcode::bgeu:
    case Opcode::bgtu:
    case Opcode::bnef:
    case Opcode::bgef:
    case Opcode::bgtf:
    case Opcode::bne2:
    case Opcode::bge2:
    case Opcode::bgt2:
    case Opcode::bgeu2:
    case Opcode::bgtu2:
    case Opcode::bned:
    case Opcode::bged:
    case Opcode::bgtd:
        return true;
    default:
        return false;
    }
}

inline Opcode canonical_branch(Opcode op) {
    return is_negated_branch(op) ? complement_of(op) : op;
}

using ConstOperand = std::variant<Ciphertext, CipherPair>;

struct Instruction {
    Opcode op = Opcode::nop;
    std::array<u32, 3> regs{0, 0, 0};
    i32 jump = 0;
    std::vector<ConstOperand> consts;
};

// Validate one instruction against the arity table; index/size give the jump
// target context (target N == size is the halt sentinel).
inline void validate_instruction(const Instruction& ins, size_t index, size_t size) {
    const OpInfo& info = op_info(ins.op);
    if (ins.consts.size() != info.nconsts)
        throw FormatError(std::string(info.name) + ": wrong constant count");
    for (u8 k = 0; k < info.nconsts; ++k) {
        bool want_pair = info.const_kinds[k] == ConstKind::Pair;
        bool got_pair = std::holds_alternative<CipherPair>(ins.consts[k]);
        if (want_pair != got_pair)
            throw FormatError(std::string(info.name) + ": wrong constant kind");
    }
    i64 target = -1;
    if (info.jump == JumpKind::Relative) target = i64(index) + ins.jump;
    if (info.jump == JumpKind::Absolute) target = ins.jump;
    if (info.jump != JumpKind::None && (target < 0 || target > i64(size)))
        throw FormatError(std::string(info.name) + ": jump target outside program");
}

struct IoEntry {
    std::string name;
    bool input = true;
    bool mem = false;  // location is a memory word address instead of a register
    bool pair = false; // 64-bit location (register pair / two memory words)
    u32 loc = 0;
    u32 delta_hi = 0; // unused for word entries
    u32 delta_lo = 0;
};

struct IoSchedule {
    u64 seed = 0;
    std::vector<IoEntry> entries;

    std::vector<const IoEntry*> inputs() const {
        std::vector<const IoEntry*> v;
        for (auto& e : entries)
            if (e.input) v.push_back(&e);
        return v;
    }
    std::vector<const IoEntry*> outputs() const {
        std::vector<const IoEntry*> v;
        for (auto& e : entries)
            if (!e.input) v.push_back(&e);
        return v;
    }
};

struct ObjectCode {
    std::vector<Instruction> instructions;
    u32 entry = 0;
    IoSchedule schedule;
};

inline constexpr char kObjectMagic[4] = {'F', 'X', 'A', '1'};

inline std::vector<u8> encode_object(const ObjectCode& obj) {
    std::vector<u8> out;
    out.insert(out.end(), kObjectMagic, kObjectMagic + 4);
    out.push_back(1); // version
    put_u32le(out, obj.entry);
    put_u32le(out, u32(obj.instructions.size()));
    auto put_str = [&](const std::string& s) {
        put_u32le(out, u32(s.size()));
        out.insert(out.end(), s.begin(), s.end());
    };
    for (size_t i = 0; i < obj.instructions.size(); ++i) {
        const Instruction& ins = obj.instructions[i];
        validate_instruction(ins, i, obj.instructions.size());
        const OpInfo& info = op_info(ins.op);
        out.push_back(u8(ins.op));
        for (u8 r = 0; r < info.nregs; ++r) put_u32le(out, ins.regs[r]);
        if (info.jump != JumpKind::None) put_u32le(out, u32(ins.jump));
        for (u8 k = 0; k < info.nconsts; ++k) {
            if (info.const_kinds[k] == ConstKind::Word) {
                put_str(cipher::serialize(std::get<Ciphertext>(ins.consts[k])));
            } else {
                const auto& p = std::get<CipherPair>(ins.consts[k]);
                put_str(cipher::serialize(p.hi));
                put_str(cipher::serialize(p.lo));
            }
        }
    }
    put_u64le(out, obj.schedule.seed);
    put_u32le(out, u32(obj.schedule.entries.size()));
    for (const auto& e : obj.schedule.entries) {
        put_str(e.name);
        out.push_back(u8(e.input) | (u8(e.mem) << 1) | (u8(e.pair) << 2));
        put_u32le(out, e.loc);
        put_u32le(out, e.delta_hi);
        put_u32le(out, e.delta_lo);
    }
    return out;
}

inline ObjectCode decode_object(const std::vector<u8>& bytes) {
    ByteReader rd(bytes);
    for (char m : kObjectMagic)
        if (char(rd.get_u8()) != m) throw FormatError("object: bad magic");
    if (rd.get_u8() != 1) throw FormatError("object: unsupported version");
    ObjectCode obj;
    obj.entry = rd.get_u32le();
    u32 count = rd.get_u32le();
    auto get_str = [&]() {
        u32 n = rd.get_u32le();
        if (n > bytes.size()) throw FormatError("object: bad string length");
        std::string s;
        s.reserve(n);
        for (u32 k = 0; k < n; ++k) s += char(rd.get_u8());
        return s;
    };
    obj.instructions.reserve(count);
    for (u32 i = 0; i < count; ++i) {
        Instruction ins;
        u8 opb = rd.get_u8();
        if (opb >= kNumOpcodes) throw FormatError("object: unknown opcode");
        ins.op = Opcode(opb);
        const OpInfo& info = op_info(ins.op);
        for (u8 r = 0; r < info.nregs; ++r) ins.regs[r] = rd.get_u32le();
        if (info.jump != JumpKind::None) ins.jump = i32(rd.get_u32le());
        for (u8 k = 0; k < info.nconsts; ++k) {
            if (info.const_kinds[k] == ConstKind::Word) {
                ins.consts.emplace_back(cipher::deserialize(get_str()));
            } else {
                CipherPair p;
                p.hi = cipher::deserialize(get_str());
                p.lo = cipher::deserialize(get_str());
                ins.consts.emplace_back(p);
            }
        }
        obj.instructions.push_back(std::move(ins));
    }
    obj.schedule.seed = rd.get_u64le();
    u32 nio = rd.get_u32le();
    for (u32 i = 0; i < nio; ++i) {
        IoEntry e;
        e.name = get_str();
        u8 flags = rd.get_u8();
        e.input = flags & 1;
        e.mem = flags & 2;
        e.pair = flags & 4;
        e.loc = rd.get_u32le();
        e.delta_hi = rd.get_u32le();
        e.delta_lo = rd.get_u32le();
        obj.schedule.entries.push_back(std::move(e));
    }
    if (!rd.done()) throw FormatError("object: trailing bytes");
    if (obj.entry > obj.instructions.size())
        throw FormatError("object: entry point outside program");
    for (size_t i = 0; i < obj.instructions.size(); ++i)
        validate_instruction(obj.instructions[i], i, obj.instructions.size());
    return obj;
}

// Human-readable schedule file: "seed N", then one line per entry:
//   in <name> <loc> <delta>     e.g.  in x r34 81726354
//   out <name> <loc> <delta>    e.g.  out ret r48 7
// loc is rN (register) or mN (memory word); 64-bit deltas are "hi:lo".
inline std::string schedule_to_text(const IoSchedule& sched) {
    std::ostringstream os;
    os << "seed " << sched.seed << "\n";
    for (const auto& e : sched.entries) {
        os << (e.input ? "in " : "out ") << e.name << ' '
           << (e.mem ? 'm' : 'r') << e.loc << ' ';
        if (e.pair)
            os << e.delta_hi << ':' << e.delta_lo;
        else
            os << e.delta_lo;
        os << "\n";
    }
    return os.str();
}

inline IoSchedule schedule_from_text(const std::string& text) {
    IoSchedule sched;
    std::istringstream is(text);
    std::string line;
    bool saw_seed = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "seed") {
            if (!(ls >> sched.seed)) throw FormatError("schedule: bad seed line");
            saw_seed = true;
            continue;
        }
        IoEntry e;
        if (tok == "in")
            e.input = true;
        else if (tok == "out")
            e.input = false;
        else
            throw FormatError("schedule: unknown line '" + tok + "'");
        std::string loc, delta;
        if (!(ls >> e.name >> loc >> delta))
            throw FormatError("schedule: malformed entry line");
        if (loc.size() < 2 || (loc[0] != 'r' && loc[0] != 'm'))
            throw FormatError("schedule: bad location '" + loc + "'");
        e.mem = loc[0] == 'm';
        e.loc = u32(std::stoul(loc.substr(1)));
        auto colon = delta.find(':');
        if (colon == std::string::npos) {
            e.pair = false;
            e.delta_lo = u32(std::stoul(delta));
        } else {
            e.pair = true;
            e.delta_hi = u32(std::stoul(delta.substr(0, colon)));
            e.delta_lo = u32(std::stoul(delta.substr(colon + 1)));
        }
        sched.entries.push_back(std::move(e));
    }
    if (!saw_seed) throw FormatError("schedule: missing seed line");
    return sched;
}

} // namespace fxa::isa
