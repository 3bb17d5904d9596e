// Copyright (c) fxacc contributors
// SPDX-License-Identifier: Apache-2.0
//
// The machine. Executes object code over encrypted state, one whole
// instruction at a time, through the execution unit's fused operations. The
// machine itself holds no key material: it can combine ciphertexts, compare
// them for branching, hash addresses and seal its own control words, but it
// has no way to read a value back out.
//
// Addresses go through a memoising front end: the first touch of an address
// handle grants the next free physical slot, and every write re-grants a
// fresh slot, so RAM sees a sequential allocation pattern rather than the
// program's own access pattern.
#pragma once

#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "fxa/cipher.hpp"
#include "fxa/common.hpp"
#include "fxa/isa.hpp"

namespace fxa::vm {

using cipher::Ciphertext;
using cipher::CipherPair;
using cipher::ExecUnit;

constexpr u32 kRaReg = 31; // link register: jal writes it, jr reads it

enum class RunStatus { Ok, TrapDivide, FaultUnmapped, OutOfBudget };

inline const char* status_name(RunStatus s) {
    switch (s) {
    case RunStatus::Ok: return "ok";
    case RunStatus::TrapDivide: return "trap: divide";
    case RunStatus::FaultUnmapped: return "fault: unmapped read";
    default: return "out of budget";
    }
}

// Raised by a load whose address handle was never granted a slot.
struct FaultUnmapped {};

struct TraceEntry {
    u64 step = 0;
    isa::Opcode op = isa::Opcode::nop;
    std::vector<u32> regs;          // operand indices, in encoding order
    std::vector<std::string> consts; // serialized ciphertext constants
    bool has_branch = false;
    bool branch_taken = false;
    bool has_slot = false;
    u32 slot = 0;
    i32 jump = 0;
};

// step <TAB> opcode <TAB> regs <TAB> consts <TAB> branch flag <TAB> slot
inline std::string to_text(const TraceEntry& e) {
    std::ostringstream os;
    os << e.step << '\t' << isa::op_name(e.op) << '\t';
    for (size_t i = 0; i < e.regs.size(); ++i) os << (i ? "," : "") << e.regs[i];
    if (e.regs.empty()) os << '-';
    os << '\t';
    for (size_t i = 0; i < e.consts.size(); ++i) os << (i ? "," : "") << e.consts[i];
    if (e.consts.empty()) os << '-';
    os << '\t' << (e.has_branch ? (e.branch_taken ? "1" : "0") : "-");
    os << '\t';
    if (e.has_slot)
        os << e.slot;
    else
        os << '-';
    return os.str();
}

using Trace = std::vector<TraceEntry>;

inline std::string to_text(const Trace& t) {
    std::string out;
    for (const auto& e : t) {
        out += to_text(e);
        out += '\n';
    }
    return out;
}

struct MachineState {
    std::unordered_map<u32, Ciphertext> regs;
    std::unordered_map<u32, Ciphertext> mem; // physical slot -> stored word
    std::map<cipher::AddrHandle, u32> tlb;   // address handle -> current slot
    u32 next_free_slot = 0;
    u32 pc = 0;

    const Ciphertext& ra() const { return regs.at(kRaReg); }
};

// One input/output value: a word or a register pair, matching the schedule
// entry it belongs to.
struct IoValue {
    bool pair = false;
    Ciphertext w;
    CipherPair p;
};

struct RunResult {
    RunStatus status = RunStatus::Ok;
    std::vector<IoValue> outputs; // one per schedule output entry, in order
    Trace trace;
    u64 steps = 0;
};

class Machine {
  public:
    Machine(const ExecUnit& eu, const isa::ObjectCode& obj) : eu_(eu), obj_(obj) {
        for (size_t i = 0; i < obj.instructions.size(); ++i)
            isa::validate_instruction(obj.instructions[i], i, obj.instructions.size());
        state_.pc = obj.entry;
    }

    MachineState& state() { return state_; }
    const MachineState& state() const { return state_; }

    bool halted() const { return state_.pc >= obj_.instructions.size(); }

    // Execute the instruction at pc, appending one trace entry.
    void step(Trace& trace) {
        using isa::Opcode;
        const isa::Instruction& ins = obj_.instructions.at(state_.pc);
        const isa::OpInfo& info = isa::op_info(ins.op);

        TraceEntry e;
        e.step = steps_++;
        e.op = ins.op;
        e.jump = info.jump == isa::JumpKind::None ? 0 : ins.jump;
        for (u8 r = 0; r < info.nregs; ++r) e.regs.push_back(ins.regs[r]);
        for (u8 k = 0; k < info.nconsts; ++k) {
            if (const auto* w = std::get_if<Ciphertext>(&ins.consts[k]))
                e.consts.push_back(cipher::serialize(*w));
            else {
                const auto& p = std::get<CipherPair>(ins.consts[k]);
                e.consts.push_back(cipher::serialize(p.hi));
                e.consts.push_back(cipher::serialize(p.lo));
            }
        }

        u32 next = state_.pc + 1;
        switch (ins.op) {
        case Opcode::add:
        case Opcode::sub: {
            auto t = eu_.ct_op(ins.op == Opcode::add ? cipher::WOp::Add : cipher::WOp::Sub,
                               reg(ins.regs[1]), reg(ins.regs[2]));
            wreg(ins.regs[0], eu_.ct_op(cipher::WOp::Add, t, wc(ins, 0)));
            break;
        }
        case Opcode::addi:
            wreg(ins.regs[0], eu_.ct_op(cipher::WOp::Add, reg(ins.regs[1]), wc(ins, 0)));
            break;
        case Opcode::li:
            wreg(ins.regs[0], eu_.refresh(wc(ins, 0)));
            break;
        case Opcode::mul:
        case Opcode::div:
        case Opcode::divu: {
            cipher::WOp op = ins.op == Opcode::mul    ? cipher::WOp::Mul
                             : ins.op == Opcode::div  ? cipher::WOp::DivS
                                                      : cipher::WOp::DivU;
            auto a = eu_.ct_op(cipher::WOp::Sub, reg(ins.regs[1]), wc(ins, 0));
            auto b = eu_.ct_op(cipher::WOp::Sub, reg(ins.regs[2]), wc(ins, 1));
            auto r = eu_.ct_op(op, a, b);
            wreg(ins.regs[0], eu_.ct_op(cipher::WOp::Add, r, wc(ins, 2)));
            break;
        }
        case Opcode::addf:
        case Opcode::subf:
        case Opcode::mulf:
        case Opcode::divf: {
            cipher::WOp op = ins.op == Opcode::addf   ? cipher::WOp::FAdd
                             : ins.op == Opcode::subf ? cipher::WOp::FSub
                             : ins.op == Opcode::mulf ? cipher::WOp::FMul
                                                      : cipher::WOp::FDiv;
            auto a = eu_.ct_op(cipher::WOp::Sub, reg(ins.regs[1]), wc(ins, 0));
            auto b = eu_.ct_op(cipher::WOp::Sub, reg(ins.regs[2]), wc(ins, 1));
            auto r = eu_.ct_op(op, a, b);
            wreg(ins.regs[0], eu_.ct_op(cipher::WOp::Add, r, wc(ins, 2)));
            break;
        }
        case Opcode::mov:
            wreg(ins.regs[0], reg(ins.regs[1])); // bit-for-bit
            break;
        case Opcode::nop:
            break;
        case Opcode::addi2:
            wpair(ins.regs[0], eu_.ct_op(cipher::POp::AddCw, pair(ins.regs[1]), kp(ins, 0)));
            break;
        case Opcode::add2:
        case Opcode::sub2:
        case Opcode::mul_ll:
        case Opcode::div_ll:
        case Opcode::divu_ll:
        case Opcode::add_d:
        case Opcode::sub_d:
        case Opcode::mul_d:
        case Opcode::div_d: {
            cipher::POp op;
            switch (ins.op) {
            case Opcode::add2: op = cipher::POp::Add64; break;
            case Opcode::sub2: op = cipher::POp::Sub64; break;
            case Opcode::mul_ll: op = cipher::POp::Mul64; break;
            case Opcode::div_ll: op = cipher::POp::DivS64; break;
            case Opcode::divu_ll: op = cipher::POp::DivU64; break;
            case Opcode::add_d: op = cipher::POp::FAddD; break;
            case Opcode::sub_d: op = cipher::POp::FSubD; break;
            case Opcode::mul_d: op = cipher::POp::FMulD; break;
            default: op = cipher::POp::FDivD; break;
            }
            auto a = eu_.ct_op(cipher::POp::SubCw, pair(ins.regs[1]), kp(ins, 0));
            auto b = eu_.ct_op(cipher::POp::SubCw, pair(ins.regs[2]), kp(ins, 1));
            auto r = eu_.ct_op(op, a, b);
            wpair(ins.regs[0], eu_.ct_op(cipher::POp::AddCw, r, kp(ins, 2)));
            break;
        }
        case Opcode::beq:
        case Opcode::bne:
        case Opcode::blt:
        case Opcode::bgt:
        case Opcode::ble:
        case Opcode::bge: {
            // One constant folded into the right operand; signed order relies
            // on the left operand arriving with zero displacement.
            auto rhs = eu_.ct_op(cipher::WOp::Add, reg(ins.regs[1]), wc(ins, 0));
            bool taken = decide(ins.op, cipher::CmpW::S32, reg(ins.regs[0]), rhs);
            branch(e, taken, ins.jump, next);
            break;
        }
        case Opcode::bltu:
        case Opcode::bgtu:
        case Opcode::bleu:
        case Opcode::bgeu:
        case Opcode::beqf:
        case Opcode::bnef:
        case Opcode::bltf:
        case Opcode::bgtf:
        case Opcode::blef:
        case Opcode::bgef: {
            auto a = eu_.ct_op(cipher::WOp::Sub, reg(ins.regs[0]), wc(ins, 0));
            auto b = eu_.ct_op(cipher::WOp::Sub, reg(ins.regs[1]), wc(ins, 1));
            cipher::CmpW flavor = is_float_branch(ins.op) ? cipher::CmpW::F32 : cipher::CmpW::U32;
            bool taken = decide(ins.op, flavor, a, b);
            branch(e, taken, ins.jump, next);
            break;
        }
        case Opcode::beq2:
        case Opcode::bne2: {
            auto rhs = eu_.ct_op(cipher::POp::AddCw, pair(ins.regs[1]), kp(ins, 0));
            bool taken = decide(ins.op, cipher::CmpP::S64, pair(ins.regs[0]), rhs);
            branch(e, taken, ins.jump, next);
            break;
        }
        case Opcode::blt2:
        case Opcode::bgt2:
        case Opcode::ble2:
        case Opcode::bge2:
        case Opcode::bltu2:
        case Opcode::bgtu2:
        case Opcode::bleu2:
        case Opcode::bgeu2:
        case Opcode::beqd:
        case Opcode::bned:
        case Opcode::bltd:
        case Opcode::bgtd:
        case Opcode::bled:
        case Opcode::bged: {
            auto a = eu_.ct_op(cipher::POp::SubCw, pair(ins.regs[0]), kp(ins, 0));
            auto b = eu_.ct_op(cipher::POp::SubCw, pair(ins.regs[1]), kp(ins, 1));
            cipher::CmpP flavor = is_double_branch(ins.op)  ? cipher::CmpP::F64
                                  : is_unsigned64(ins.op)   ? cipher::CmpP::U64
                                                            : cipher::CmpP::S64;
            bool taken = decide(ins.op, flavor, a, b);
            branch(e, taken, ins.jump, next);
            break;
        }
        case Opcode::b:
            branch(e, true, ins.jump, next);
            break;
        case Opcode::j:
            next = u32(ins.jump);
            break;
        case Opcode::jal:
            wreg(kRaReg, eu_.seal(state_.pc + 1));
            next = u32(ins.jump);
            break;
        case Opcode::jr:
            next = eu_.jump_target(reg(kRaReg));
            break;
        case Opcode::sw: {
            auto addr = eu_.ct_op(cipher::WOp::Add, reg(ins.regs[0]), wc(ins, 0));
            u32 slot = translate(addr, /*is_write=*/true);
            state_.mem[slot] = reg(ins.regs[1]);
            e.has_slot = true;
            e.slot = slot;
            break;
        }
        case Opcode::lw: {
            auto addr = eu_.ct_op(cipher::WOp::Add, reg(ins.regs[1]), wc(ins, 0));
            u32 slot = translate(addr, /*is_write=*/false);
            wreg(ins.regs[0], state_.mem.at(slot));
            e.has_slot = true;
            e.slot = slot;
            break;
        }
        case Opcode::cvt_if:
        case Opcode::cvt_uf:
        case Opcode::cvt_fi: {
            auto v = eu_.ct_op(cipher::WOp::Sub, reg(ins.regs[1]), wc(ins, 0));
            Ciphertext r = ins.op == Opcode::cvt_if   ? eu_.cvt_i32_f32(v)
                           : ins.op == Opcode::cvt_uf ? eu_.cvt_u32_f32(v)
                                                      : eu_.cvt_f32_w32(v);
            wreg(ins.regs[0], eu_.ct_op(cipher::WOp::Add, r, wc(ins, 1)));
            break;
        }
        case Opcode::cvt_id:
        case Opcode::cvt_ud:
        case Opcode::cvt_fd:
        case Opcode::cvt_wl:
        case Opcode::cvt_wlu:
        case Opcode::cvt_fl: {
            auto v = eu_.ct_op(cipher::WOp::Sub, reg(ins.regs[1]), wc(ins, 0));
            CipherPair r;
            switch (ins.op) {
            case Opcode::cvt_id: r = eu_.cvt_i32_f64(v); break;
            case Opcode::cvt_ud: r = eu_.cvt_u32_f64(v); break;
            case Opcode::cvt_fd: r = eu_.cvt_f32_f64(v); break;
            case Opcode::cvt_wl: r = eu_.cvt_sx_w_l(v); break;
            case Opcode::cvt_wlu: r = eu_.cvt_zx_w_l(v); break;
            default: r = eu_.cvt_f32_w64(v); break;
            }
            wpair(ins.regs[0], eu_.ct_op(cipher::POp::AddCw, r, kp(ins, 1)));
            break;
        }
        case Opcode::cvt_di:
        case Opcode::cvt_lf:
        case Opcode::cvt_ulf:
        case Opcode::cvt_df:
        case Opcode::cvt_lw: {
            auto v = eu_.ct_op(cipher::POp::SubCw, pair(ins.regs[1]), kp(ins, 0));
            Ciphertext r;
            switch (ins.op) {
            case Opcode::cvt_di: r = eu_.cvt_f64_w32(v); break;
            case Opcode::cvt_lf: r = eu_.cvt_i64_f32(v); break;
            case Opcode::cvt_ulf: r = eu_.cvt_u64_f32(v); break;
            case Opcode::cvt_df: r = eu_.cvt_f64_f32(v); break;
            default: r = eu_.cvt_lo_l_w(v); break;
            }
            wreg(ins.regs[0], eu_.ct_op(cipher::WOp::Add, r, wc(ins, 1)));
            break;
        }
        case Opcode::cvt_ld:
        case Opcode::cvt_uld:
        case Opcode::cvt_dl: {
            auto v = eu_.ct_op(cipher::POp::SubCw, pair(ins.regs[1]), kp(ins, 0));
            CipherPair r = ins.op == Opcode::cvt_ld    ? eu_.cvt_i64_f64(v)
                           : ins.op == Opcode::cvt_uld ? eu_.cvt_u64_f64(v)
                                                       : eu_.cvt_f64_w64(v);
            wpair(ins.regs[0], eu_.ct_op(cipher::POp::AddCw, r, kp(ins, 1)));
            break;
        }
        }

        trace.push_back(std::move(e));
        state_.pc = next;
    }

    // Current register content; an untouched register reads as a sealed zero.
    const Ciphertext& reg(u32 i) {
        auto it = state_.regs.find(i);
        if (it == state_.regs.end()) it = state_.regs.emplace(i, eu_.seal(0)).first;
        return it->second;
    }

    CipherPair pair(u32 i) { return {reg(i), reg(i + 1)}; }

    void wreg(u32 i, const Ciphertext& v) { state_.regs[i] = v; }

    void wpair(u32 i, const CipherPair& v) {
        state_.regs[i] = v.hi;
        state_.regs[i + 1] = v.lo;
    }

    u32 translate(const Ciphertext& addr_ct, bool is_write) {
        cipher::AddrHandle h = eu_.addr_handle(addr_ct);
        if (is_write) {
            // Every write gets a fresh slot; the memo moves with it.
            u32 slot = state_.next_free_slot++;
            state_.tlb[h] = slot;
            return slot;
        }
        auto it = state_.tlb.find(h);
        if (it == state_.tlb.end()) throw FaultUnmapped{};
        return it->second;
    }

  private:
    // Decide a conditional branch. The negated member of each complement pair
    // evaluates as "canonical partner does not take", which keeps the pairing
    // exact for every input; float order compares are NaN-false, so their
    // negations are unordered-inclusive.
    template <typename Flavor, typename Operand>
    bool decide(isa::Opcode op, Flavor flavor, const Operand& a, const Operand& b) const {
        isa::Opcode canon = isa::canonical_branch(op);
        bool taken = eu_.ct_cmp(rel_of(canon), flavor, a, b);
        return op == canon ? taken : !taken;
    }

    static plain::Rel rel_of(isa::Opcode op) {
        using isa::Opcode;
        switch (op) {
        case Opcode::beq: case Opcode::beqf: case Opcode::beq2: case Opcode::beqd:
            return plain::Rel::Eq;
        case Opcode::bne: case Opcode::bnef: case Opcode::bne2: case Opcode::bned:
            return plain::Rel::Ne;
        case Opcode::blt: case Opcode::bltu: case Opcode::bltf:
        case Opcode::blt2: case Opcode::bltu2: case Opcode::bltd:
            return plain::Rel::Lt;
        case Opcode::bgt: case Opcode::bgtu: case Opcode::bgtf:
        case Opcode::bgt2: case Opcode::bgtu2: case Opcode::bgtd:
            return plain::Rel::Gt;
        case Opcode::ble: case Opcode::bleu: case Opcode::blef:
        case Opcode::ble2: case Opcode::bleu2: case Opcode::bled:
            return plain::Rel::Le;
        default:
            return plain::Rel::Ge;
        }
    }

    static bool is_float_branch(isa::Opcode op) {
        using isa::Opcode;
        return op == Opcode::beqf || op == Opcode::bnef || op == Opcode::bltf ||
               op == Opcode::bgtf || op == Opcode::blef || op == Opcode::bgef;
    }

    static bool is_double_branch(isa::Opcode op) {
        using isa::Opcode;
        return op == Opcode::beqd || op == Opcode::bned || op == Opcode::bltd ||
               op == Opcode::bgtd || op == Opcode::bled || op == Opcode::bged;
    }

    static bool is_unsigned64(isa::Opcode op) {
        using isa::Opcode;
        return op == Opcode::bltu2 || op == Opcode::bgtu2 || op == Opcode::bleu2 ||
               op == Opcode::bgeu2;
    }

    void branch(TraceEntry& e, bool taken, i32 disp, u32& next) {
        e.has_branch = true;
        e.branch_taken = taken;
        if (taken) next = u32(i64(state_.pc) + disp);
    }

    const Ciphertext& wc(const isa::Instruction& ins, size_t k) {
        return std::get<Ciphertext>(ins.consts[k]);
    }
    const CipherPair& kp(const isa::Instruction& ins, size_t k) {
        return std::get<CipherPair>(ins.consts[k]);
    }

    const ExecUnit& eu_;
    const isa::ObjectCode& obj_;
    MachineState state_;
    u64 steps_ = 0;
};

constexpr u64 kDefaultBudget = 10'000'000;

// Load scheduled inputs, run to the halt sentinel, collect scheduled
// outputs. Inputs are already-encrypted values prepared by the caller; the
// machine neither encrypts inputs nor decrypts outputs.
inline RunResult run(const ExecUnit& eu, const isa::ObjectCode& obj,
                     const std::vector<IoValue>& inputs, u64 budget = kDefaultBudget) {
    Machine m(eu, obj);

    auto ins = obj.schedule.inputs();
    if (ins.size() != inputs.size()) throw Error("input count does not match the schedule");
    for (size_t i = 0; i < ins.size(); ++i) {
        if (ins[i]->pair != inputs[i].pair) throw Error("input width does not match the schedule");
        if (ins[i]->mem) throw Error("memory-resident inputs are not supported");
        if (inputs[i].pair)
            m.wpair(ins[i]->loc, inputs[i].p);
        else
            m.wreg(ins[i]->loc, inputs[i].w);
    }

    RunResult res;
    try {
        while (!m.halted()) {
            if (res.steps >= budget) {
                res.status = RunStatus::OutOfBudget;
                return res;
            }
            m.step(res.trace);
            ++res.steps;
        }
    } catch (const TrapDivZero&) {
        res.status = RunStatus::TrapDivide;
        return res;
    } catch (const FaultUnmapped&) {
        res.status = RunStatus::FaultUnmapped;
        return res;
    }

    for (const auto* out : obj.schedule.outputs()) {
        IoValue v;
        v.pair = out->pair;
        if (out->pair)
            v.p = m.pair(out->loc);
        else
            v.w = m.reg(out->loc);
        res.outputs.push_back(std::move(v));
    }
    return res;
}

} // namespace fxa::vm
