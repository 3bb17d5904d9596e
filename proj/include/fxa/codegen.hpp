// Copyright (c) fxacc contributors
// SPDX-License-Identifier: Apache-2.0
//
// Code generator: lowers a checked program onto the fused-add instruction
// set so that every value, register or memory word, travels displaced by a
// random additive offset drawn per compilation seed.
//
// The scheme discipline in one paragraph: the compiler tracks, per storage
// location, the displacement the runtime value carries at each program
// point (OffsetDB). Every operation folds the operand displacements and a
// freshly drawn result displacement into its encrypted constants, so the
// machine only ever sees displaced words. Control-flow merge points carry a
// snapshot of the scheme; every edge into a merge emits compensating adds
// (and memory re-offset storms) that put the live state back onto the
// snapshot, so downstream code is compiled against a single scheme no
// matter which edge ran. Conditional branches draw a per-site polarity coin
// and emit either the straight or the complemented opcode with swapped
// targets. Function bodies are instantiated per call site; recursive calls
// re-enter the active instance after saving its register window to an
// encrypted shadow stack.
#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fxa/ast.hpp"
#include "fxa/cipher.hpp"
#include "fxa/common.hpp"
#include "fxa/isa.hpp"
#include "fxa/obfuscation.hpp"

namespace fxa::codegen {

using ast::BasicKind;
using cipher::CipherPair;
using cipher::Ciphertext;
using obf::Loc;
using obf::Offset;

// Register conventions. r0/r1 carry return values (pair for two-word types),
// r25..r28 stage spilled temporaries, r29 is the shadow stack pointer for
// recursive calls, r30 stages addresses and stripped compare operands within
// a single statement, r31 is the link register jal writes. Everything from
// r32 up is handed out to globals, emit slots and per-instance windows.
constexpr u32 kRetReg = 0;
constexpr u32 kShuttleA = 25;
constexpr u32 kShuttleB = 27;
constexpr u32 kSpReg = 29;
constexpr u32 kScratchReg = 30;
constexpr u32 kRaReg = 31;
constexpr u32 kFirstAllocReg = 32;

// Address space carving: each memory object owns a disjoint span, the
// shadow stack grows upward from its own base, and displaced temporaries
// beyond the register file live in a third region (obf::kStackBase).
constexpr u32 kObjectBase = 0x1000'0000u;
constexpr u32 kObjectSpan = 0x1'0000u;
constexpr u32 kSpInitAddr = 0x2000'0000u;

// Write storms larger than this run as a compiled loop instead of unrolled
// triples.
constexpr u32 kStormLoopThreshold = 64;

struct CompileStats {
    u64 join_checks = 0;   // scheme entries verified at merge points
    u64 join_failures = 0; // entries that disagreed after restoration
    std::vector<u32> storm_sizes; // element count of every store storm
    u32 instance_count = 0;       // function instances materialized
};

struct CompileResult {
    isa::ObjectCode object;
    obf::OffsetDB offsets; // scheme at the halt point (outputs, globals)
    CompileStats stats;
};

namespace detail {

inline bool is_wide(BasicKind k) { return ast::is_wide_kind(k); }
inline u32 width_of(BasicKind k) { return is_wide(k) ? 2u : 1u; }

// A value materialized into a run of temporary slots. Temporaries are not
// part of the OffsetDB; they carry their displacement with them.
struct Val {
    u32 slot = 0;
    Offset off;
    BasicKind kind = BasicKind::Int;
    bool wide() const { return off.wide; }
};

// Flattened view of a register-resident struct: one entry per basic leaf.
struct FlatLeaf {
    std::string path; // "f" or "f.g"
    u32 word = 0;     // word offset from the struct base
    BasicKind kind = BasicKind::Int;
};

inline void flatten_struct(const ast::TypePtr& t, const std::string& prefix,
                           u32 base, std::vector<FlatLeaf>& out) {
    u32 off = base;
    for (const auto& f : t->fields) {
        // anonymous members contribute no path component
        std::string p = f.name.empty()
                            ? prefix
                            : (prefix.empty() ? f.name : prefix + "." + f.name);
        if (f.type->kind == ast::Type::K::Basic) {
            out.push_back({p, off, f.type->basic});
        } else if (f.type->kind == ast::Type::K::Struct) {
            flatten_struct(f.type, p, off, out);
        } else {
            throw Error("unsupported field layout in struct '" + p + "'");
        }
        off += ast::word_count(f.type);
    }
}

// Word offset of a member within an aggregate, looking through anonymous
// struct/union members; union members all start at word zero.
inline std::optional<u32> member_offset(const ast::Type& agg, const std::string& name) {
    u32 pos = 0;
    for (const auto& f : agg.fields) {
        u32 here = agg.kind == ast::Type::K::Union ? 0 : pos;
        if (f.name == name) return here;
        if (f.name.empty() && (f.type->kind == ast::Type::K::Struct ||
                               f.type->kind == ast::Type::K::Union)) {
            if (auto inner = member_offset(*f.type, name)) return here + *inner;
        }
        pos += ast::word_count(f.type);
    }
    return std::nullopt;
}

// A memory-resident object (array or union) and its stripes. A stripe is
// the unit that shares one displacement: for arrays, all words of one leaf
// (one arithmetic progression); for unions, one overlap class of words.
struct MemStripe {
    bool arith = true;
    // arithmetic form (arrays)
    u32 base = 0;   // word offset of element 0's word within the object
    u32 stride = 0; // words per element
    u32 count = 0;  // elements
    bool wide = false;
    std::string path; // leaf path within the element ("" for basic arrays)
    // explicit form (union classes)
    std::vector<u32> words; // word offsets within the object
};

struct MemObject {
    std::string name;
    u32 serial = 0;
    u32 base = 0; // absolute address of word 0
    u32 words = 0;
    bool is_union = false;
    bool global = false;
    ast::TypePtr type;
    std::vector<MemStripe> stripes;
    std::vector<u32> word_class; // unions: word index -> stripe index

    Loc stripe_loc(u32 idx) const { return Loc::stripe(serial, idx); }
};

// What a variable name resolves to.
struct VarInfo {
    ast::TypePtr type;
    u32 slot = 0;               // register home (scalars, pointers, structs)
    std::vector<FlatLeaf> leaves; // struct layout
    MemObject* obj = nullptr;   // arrays and unions
};

// A control-flow merge point: the register scheme plus every memory stripe
// displacement visible when the point was established.
struct JoinState {
    obf::SchemeSnapshot regs;
    std::vector<std::pair<Loc, Offset>> stripes;
};

// One materialized function body. Each call site of a non-recursive call
// gets its own instance with its own register window and entry scheme.
struct Instance {
    const ast::Function* fn = nullptr;
    u32 id = 0;
    u32 base = 0; // first window register
    u32 span = 0;
    u32 ra_slot = 0;
    bool interior = false;
    std::vector<u32> param_slots;
    std::vector<Offset> param_offs;
    bool has_ret = false;
    Offset ret_off;
    JoinState entry;

    std::vector<isa::Instruction> code;
    std::vector<i64> label_pos;                // label id -> local index
    std::vector<std::pair<u32, u32>> rel_fixups; // (local index, label id)
    std::vector<std::pair<u32, u32>> jal_fixups; // (local index, instance id)
    std::vector<u32> halt_fixups;                // local indices of final jumps
    u32 tsp = 0;       // next free abstract slot
    u32 local_top = 0; // slots below base+local_top are variables
    u32 hwm = 0;
    u32 start_pc = 0;
};

struct LabelCtl {
    JoinState join;
    u32 label = 0;
    bool fn_label = false; // the name belongs to an interior function
};

// Span estimation: count every variable word the body can hold plus the
// deepest expression temp usage, with slack for address/counter temps.
struct SpanEstimator {
    u32 decl_words = 0;
    u32 max_expr = 0;

    static u32 expr_nodes(const ast::Expr* e) {
        if (!e) return 0;
        u32 n = 2; // a node costs at most two slots (pair padding included)
        n += expr_nodes(e->lhs.get());
        n += expr_nodes(e->rhs.get());
        for (const auto& a : e->args) n += expr_nodes(a.get());
        return n;
    }
    void stmt(const ast::Stmt* st) {
        u32 here = expr_nodes(st->target.get()) + expr_nodes(st->value.get()) +
                   expr_nodes(st->cond.get());
        for (const auto& a : st->args) here += expr_nodes(a.get());
        max_expr = std::max(max_expr, here);
        if (st->kind == ast::Stmt::K::Decl) {
            const auto& t = st->decl_type;
            if (t->kind == ast::Type::K::Basic || t->kind == ast::Type::K::Pointer ||
                t->kind == ast::Type::K::Struct)
                decl_words += ast::word_count(t);
        }
        if (st->kind == ast::Stmt::K::InteriorFn) return; // its own window
        for (const auto& s : st->body) stmt(s.get());
        for (const auto& s : st->else_body) stmt(s.get());
    }
};

inline u32 estimate_span(const ast::Function* fn) {
    SpanEstimator e;
    u32 params = 0;
    for (const auto& p : fn->params) params += ast::word_count(p.type);
    for (const auto& s : fn->body) e.stmt(s.get());
    return 1 + params + e.decl_words + e.max_expr + 16;
}

class Compiler {
  public:
    Compiler(const ast::Program& prog, const cipher::CipherContext& ctx, u64 seed)
        : prog_(prog), ctx_(ctx), seed_(seed), rng_(seed) {}

    CompileResult run() {
        scopes_.emplace_back();
        interior_scopes_.emplace_back();
        build_prologue();
        const ast::Function* mainfn = prog_.find_function("main");
        if (!mainfn) throw Error("program has no main");
        Instance* mi = new_instance(mainfn, false, nullptr);
        // transfer into main, then stop on the halt sentinel
        cur_ = prologue_.get();
        emit_jal(mi->id);
        emit_halt();
        finalize_labels(prologue_.get());
        compile_instance(mi);

        CompileResult res;
        assemble(res.object);
        build_schedule(res.object.schedule, mi);
        res.offsets = db_;
        stats_.instance_count = u32(instances_.size());
        res.stats = stats_;
        return res;
    }

  private:
    // ---------------- encryption helpers ----------------

    Ciphertext cw(u32 v) const { return ctx_.encrypt(v, cipher::Origin::Constant); }
    CipherPair cp(u32 hi, u32 lo) const {
        return ctx_.encrypt_pair((u64(hi) << 32) | lo, cipher::Origin::Constant);
    }
    CipherPair cp(const Offset& o) const { return cp(o.hi, o.lo); }

    u32 fresh() { return obf::fresh_offset(rng_); }
    Offset fresh_word() { return obf::fresh_word(rng_); }
    Offset fresh_wide() { return obf::fresh_wide(rng_); }
    Offset fresh_off(bool wide) { return wide ? fresh_wide() : fresh_word(); }
    bool coin() { return (rng_() & 1) != 0; }

    // ---------------- raw emission ----------------

    isa::Instruction& emit(isa::Opcode op, u32 r0 = 0, u32 r1 = 0, u32 r2 = 0) {
        isa::Instruction ins;
        ins.op = op;
        ins.regs = {r0, r1, r2};
        cur_->code.push_back(std::move(ins));
        return cur_->code.back();
    }
    void emit_li(u32 rd, u32 value) { emit(isa::Opcode::li, rd).consts.emplace_back(cw(value)); }
    void emit_addi(u32 rd, u32 rs, u32 k) {
        emit(isa::Opcode::addi, rd, rs).consts.emplace_back(cw(k));
    }
    void emit_addi2(u32 rd, u32 rs, u32 khi, u32 klo) {
        emit(isa::Opcode::addi2, rd, rs).consts.emplace_back(cp(khi, klo));
    }

    u32 new_label() {
        cur_->label_pos.push_back(-1);
        return u32(cur_->label_pos.size() - 1);
    }
    void place(u32 l) { cur_->label_pos[l] = i64(cur_->code.size()); }
    void emit_b(u32 l) {
        cur_->rel_fixups.push_back({u32(cur_->code.size()), l});
        emit(isa::Opcode::b);
    }
    isa::Instruction& emit_branch(isa::Opcode op, u32 r0, u32 r1, u32 l) {
        cur_->rel_fixups.push_back({u32(cur_->code.size()), l});
        return emit(op, r0, r1);
    }
    void emit_jal(u32 instance_id) {
        cur_->jal_fixups.push_back({u32(cur_->code.size()), instance_id});
        emit(isa::Opcode::jal);
    }
    void emit_halt() {
        cur_->halt_fixups.push_back(u32(cur_->code.size()));
        emit(isa::Opcode::j);
    }

    static void finalize_labels(Instance* in) {
        for (auto [idx, l] : in->rel_fixups) {
            i64 pos = in->label_pos[l];
            if (pos < 0) throw Error("internal: unplaced label");
            in->code[idx].jump = i32(pos - i64(idx));
        }
        in->rel_fixups.clear();
    }

    // ---------------- temp slots and spill staging ----------------
    //
    // Abstract slots are register numbers while they fit; past the register
    // file bound they live in the spill region and go through the shuttle
    // registers. Variables must stay register-resident (the merge machinery
    // restores registers only), temporaries may overflow freely.

    static bool spilled(u32 slot) { return slot >= obf::kSprBound; }
    static u32 spill_addr(u32 slot) { return obf::kStackBase + (slot - obf::kSprBound); }

    u32 push(u32 w) {
        if (w == 2 && cur_->tsp == obf::kSprBound - 1) cur_->tsp++; // keep pairs unsplit
        u32 s = cur_->tsp;
        cur_->tsp += w;
        cur_->hwm = std::max(cur_->hwm, cur_->tsp);
        if (cur_->hwm > cur_->base + cur_->span)
            throw Error("internal: window span estimate too small");
        return s;
    }

    // Bring a slot's current word into a readable register.
    u32 use_w(u32 slot, u32 shuttle) {
        if (!spilled(slot)) return slot;
        u32 d = fresh();
        emit_li(kScratchReg, spill_addr(slot) + d);
        emit(isa::Opcode::lw, shuttle, kScratchReg).consts.emplace_back(cw(0 - d));
        return shuttle;
    }
    u32 use_p(u32 slot, u32 shuttle) {
        if (!spilled(slot)) return slot;
        u32 d = fresh();
        emit_li(kScratchReg, spill_addr(slot) + d);
        emit(isa::Opcode::lw, shuttle + 1, kScratchReg).consts.emplace_back(cw(1 - d));
        emit(isa::Opcode::lw, shuttle, kScratchReg).consts.emplace_back(cw(0 - d));
        return shuttle;
    }
    u32 def_w(u32 slot, u32 shuttle) const { return spilled(slot) ? shuttle : slot; }
    void commit_w(u32 slot, u32 phys) {
        if (!spilled(slot)) return;
        u32 d = fresh();
        emit_li(kScratchReg, spill_addr(slot) + d);
        emit(isa::Opcode::sw, kScratchReg, phys).consts.emplace_back(cw(0 - d));
    }
    void commit_p(u32 slot, u32 phys) {
        if (!spilled(slot)) return;
        u32 d = fresh();
        emit_li(kScratchReg, spill_addr(slot) + d);
        emit(isa::Opcode::sw, kScratchReg, phys).consts.emplace_back(cw(0 - d));
        emit(isa::Opcode::sw, kScratchReg, phys + 1).consts.emplace_back(cw(1 - d));
    }

    // ---------------- scopes ----------------

    struct ScopeFrame {
        size_t var_mark;
        std::vector<Loc> kill;
        std::vector<MemObject*> objects;
    };

    void push_scope() {
        scopes_.emplace_back();
        interior_scopes_.emplace_back();
        frames_.push_back({vars_.mark(), {}, {}});
    }
    void pop_scope() {
        ScopeFrame& f = frames_.back();
        for (const Loc& l : f.kill) db_.erase(l);
        for (MemObject* o : f.objects)
            for (u32 i = 0; i < o->stripes.size(); ++i) db_.erase(o->stripe_loc(i));
        vars_.unbind_to(f.var_mark);
        frames_.pop_back();
        interior_scopes_.pop_back();
        scopes_.pop_back();
    }

    VarInfo* find_var(const std::string& name) {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            auto f = it->find(name);
            if (f != it->end()) return &f->second;
        }
        return nullptr;
    }
    Instance* find_interior(const std::string& name) {
        for (auto it = interior_scopes_.rbegin(); it != interior_scopes_.rend(); ++it) {
            auto f = it->find(name);
            if (f != it->end()) return f->second;
        }
        return nullptr;
    }

    // Bind a register word/pair variable: fresh location in the current
    // window, scheme entry, name binding.
    void bind_reg_var(const std::string& bind_name, u32 slot, const Offset& off) {
        if (spilled(slot))
            throw Error("register file exhausted: variable '" + bind_name +
                        "' does not fit; reduce live variables");
        vars_.bind(bind_name, Loc::reg(slot));
        db_.set(Loc::reg(slot), off);
        frames_.back().kill.push_back(Loc::reg(slot));
    }

    // ---------------- memory objects ----------------

    MemObject* new_object(const std::string& name, const ast::TypePtr& t, bool global) {
        auto obj = std::make_unique<MemObject>();
        obj->name = name;
        obj->serial = u32(objects_.size());
        obj->base = kObjectBase + obj->serial * kObjectSpan;
        obj->words = ast::word_count(t);
        obj->global = global;
        obj->type = t;
        if (obj->words == 0 || obj->words > kObjectSpan)
            throw Error("object '" + name + "' does not fit its address span");
        if (t->kind == ast::Type::K::Array) {
            u32 ew = ast::word_count(t->elem);
            if (t->elem->kind == ast::Type::K::Basic) {
                MemStripe s;
                s.base = 0;
                s.stride = ew;
                s.count = t->len;
                s.wide = is_wide(t->elem->basic);
                obj->stripes.push_back(std::move(s));
            } else { // array of struct
                std::vector<FlatLeaf> leaves;
                flatten_struct(t->elem, "", 0, leaves);
                for (const auto& lf : leaves) {
                    MemStripe s;
                    s.base = lf.word;
                    s.stride = ew;
                    s.count = t->len;
                    s.wide = is_wide(lf.kind);
                    s.path = lf.path;
                    obj->stripes.push_back(std::move(s));
                }
            }
        } else if (t->kind == ast::Type::K::Union) {
            build_union_classes(*obj);
        } else {
            throw Error("internal: unexpected memory object type");
        }
        objects_.push_back(std::move(obj));
        return objects_.back().get();
    }

    // Union overlap classes: words start distinct; every array member ties
    // its elements' corresponding words together. Words that then share a
    // class must share a displacement.
    static void union_walk(const ast::TypePtr& t, u32 base, std::vector<u32>& uf) {
        auto find = [&](u32 x) {
            while (uf[x] != x) x = uf[x] = uf[uf[x]];
            return x;
        };
        auto merge = [&](u32 a, u32 b) { uf[find(a)] = find(b); };
        switch (t->kind) {
        case ast::Type::K::Basic:
            break; // hi and lo of a wide scalar stay separate words
        case ast::Type::K::Array: {
            u32 ew = ast::word_count(t->elem);
            for (u32 k = 0; k < t->len; ++k) {
                union_walk(t->elem, base + k * ew, uf);
                for (u32 j = 0; j < ew; ++j) merge(base + j, base + k * ew + j);
            }
            break;
        }
        case ast::Type::K::Struct: {
            u32 off = base;
            for (const auto& f : t->fields) {
                union_walk(f.type, off, uf);
                off += ast::word_count(f.type);
            }
            break;
        }
        case ast::Type::K::Union:
            for (const auto& f : t->fields) union_walk(f.type, base, uf);
            break;
        default:
            throw Error("unsupported member layout in union");
        }
    }

    static void build_union_classes(MemObject& obj) {
        obj.is_union = true;
        std::vector<u32> uf(obj.words);
        for (u32 i = 0; i < obj.words; ++i) uf[i] = i;
        for (const auto& f : obj.type->fields) union_walk(f.type, 0, uf);
        auto find = [&](u32 x) {
            while (uf[x] != x) x = uf[x] = uf[uf[x]];
            return x;
        };
        std::map<u32, u32> root_to_class;
        obj.word_class.resize(obj.words);
        for (u32 w = 0; w < obj.words; ++w) {
            u32 r = find(w);
            auto it = root_to_class.find(r);
            if (it == root_to_class.end()) {
                u32 id = u32(obj.stripes.size());
                root_to_class.emplace(r, id);
                MemStripe s;
                s.arith = false;
                obj.stripes.push_back(std::move(s));
                it = root_to_class.find(r);
            }
            obj.word_class[w] = it->second;
            obj.stripes[it->second].words.push_back(w);
        }
    }

    MemObject* object_of(const std::string& name) {
        VarInfo* vi = find_var(name);
        if (!vi || !vi->obj) throw Error("'" + name + "' is not a memory object here");
        return vi->obj;
    }

    // ---------------- value loads and literals ----------------

    Val make_temp(BasicKind k) {
        bool w = is_wide(k);
        Val v;
        v.slot = push(w ? 2 : 1);
        v.off = fresh_off(w);
        v.kind = k;
        return v;
    }

    Val load_literal_bits(u64 bits, BasicKind k) {
        Val v = make_temp(k);
        if (v.wide()) {
            u32 rd = def_w(v.slot, kShuttleA); // word-wise stores are fine
            emit_li(rd, u32(bits >> 32) + v.off.hi);
            commit_w(v.slot, rd);
            u32 rl = def_w(v.slot + 1, kShuttleA);
            emit_li(rl, u32(bits) + v.off.lo);
            commit_w(v.slot + 1, rl);
        } else {
            u32 rd = def_w(v.slot, kShuttleA);
            emit_li(rd, u32(bits) + v.off.lo);
            commit_w(v.slot, rd);
        }
        return v;
    }

    // Copy a register-resident word/pair (variable or leaf) into a fresh
    // temp under a fresh displacement.
    Val read_reg(u32 src_slot, const Offset& src_off, BasicKind k) {
        Val v = make_temp(k);
        if (v.wide()) {
            u32 ps = use_p(src_slot, kShuttleB);
            u32 rd = def_w(v.slot, kShuttleA);
            emit_addi2(rd, ps, v.off.hi - src_off.hi, v.off.lo - src_off.lo);
            commit_p(v.slot, rd);
        } else {
            u32 ps = use_w(src_slot, kShuttleB);
            u32 rd = def_w(v.slot, kShuttleA);
            emit_addi(rd, ps, v.off.lo - src_off.lo);
            commit_w(v.slot, rd);
        }
        return v;
    }

    // ---------------- lvalue resolution ----------------

    struct Place {
        bool in_reg = true;
        BasicKind kind = BasicKind::Int;
        bool wide = false;
        // register places
        u32 slot = 0;
        std::string bind_name;
        // memory places
        MemObject* obj = nullptr;
        int stripe_hi = -1;
        int stripe_lo = -1; // differs from stripe_hi only inside unions
        u32 rel = 0;        // element-0 word offset from the object base
        bool has_dyn = false;
        Val dyn;            // absolute dynamic address contribution
        u32 static_abs = 0; // absolute address (hi word) when !has_dyn,
                            // else extra words added on top of dyn
    };

    // Walk a Field chain down to its root Var; returns the path and root.
    static const ast::Expr* field_root(const ast::Expr* e, std::string& path) {
        if (e->kind == ast::Expr::K::Field) {
            const ast::Expr* r = field_root(e->lhs.get(), path);
            if (!path.empty()) path += ".";
            path += e->name;
            return r;
        }
        return e;
    }

    Place resolve_place(const ast::Expr* e) {
        switch (e->kind) {
        case ast::Expr::K::Var: {
            VarInfo* vi = find_var(e->name);
            if (!vi) throw Error("unknown variable '" + e->name + "'");
            if (vi->obj) throw Error("'" + e->name + "' is not a scalar location");
            Place p;
            p.kind = vi->type->kind == ast::Type::K::Pointer ? BasicKind::UInt
                                                             : vi->type->basic;
            p.wide = vi->type->kind == ast::Type::K::Basic && is_wide(vi->type->basic);
            p.slot = vi->slot;
            p.bind_name = e->name;
            return p;
        }
        case ast::Expr::K::Field: {
            std::string path;
            const ast::Expr* root = field_root(e, path);
            if (root->kind == ast::Expr::K::Var) {
                VarInfo* vi = find_var(root->name);
                if (!vi) throw Error("unknown variable '" + root->name + "'");
                if (!vi->obj) { // register-resident struct
                    for (const auto& lf : vi->leaves)
                        if (lf.path == path) {
                            Place p;
                            p.kind = lf.kind;
                            p.wide = is_wide(lf.kind);
                            p.slot = vi->slot + lf.word;
                            p.bind_name = root->name + "." + path;
                            return p;
                        }
                    throw Error("no field '" + path + "' in '" + root->name + "'");
                }
            }
            return resolve_mem(e);
        }
        case ast::Expr::K::Index:
        case ast::Expr::K::Deref:
            return resolve_mem(e);
        default:
            throw Error("expression is not an assignable location");
        }
    }

    // Scale an index value by a word stride without exposing the stride as
    // a plain constant: multiply by a blinded factor.
    Val scale_index(Val idx, u32 stride) {
        if (stride == 1) return idx;
        u32 k1 = fresh();
        u32 ks = push(1);
        u32 rk = def_w(ks, kShuttleB);
        emit_li(rk, k1);
        commit_w(ks, rk);
        u32 pi = use_w(idx.slot, kShuttleA);
        u32 pk = use_w(ks, kShuttleB);
        u32 rd = def_w(idx.slot, kShuttleA);
        Offset nd = fresh_word();
        auto& ins = emit(isa::Opcode::mul, rd, pi, pk);
        ins.consts.emplace_back(cw(idx.off.lo));
        ins.consts.emplace_back(cw(k1 - stride));
        ins.consts.emplace_back(cw(nd.lo));
        commit_w(idx.slot, rd);
        cur_->tsp = idx.slot + 1;
        idx.off = nd;
        return idx;
    }

    Val add_words(Val a, Val b) { // word add, fresh displacement, lands on a
        u32 pa = use_w(a.slot, kShuttleA);
        u32 pb = use_w(b.slot, kShuttleB);
        u32 rd = def_w(a.slot, kShuttleA);
        Offset nd = fresh_word();
        emit(isa::Opcode::add, rd, pa, pb)
            .consts.emplace_back(cw(nd.lo - a.off.lo - b.off.lo));
        commit_w(a.slot, rd);
        cur_->tsp = a.slot + 1;
        a.off = nd;
        return a;
    }

    // Resolve an Index/Deref/Field chain into a memory place. The dynamic
    // part, if any, is an absolute word address value; leftover static words
    // fold into access constants.
    Place resolve_mem(const ast::Expr* e) {
        Place p;
        build_mem(e, p);
        // stripe resolution
        if (p.obj->is_union) {
            p.stripe_hi = int(p.obj->word_class.at(p.rel));
            p.stripe_lo = p.wide ? int(p.obj->word_class.at(p.rel + 1)) : p.stripe_hi;
        } else {
            // match the leaf by path
            int found = -1;
            for (u32 i = 0; i < p.obj->stripes.size(); ++i)
                if (p.obj->stripes[i].path == mem_path_) found = int(i);
            if (found < 0)
                throw Error("no leaf '" + mem_path_ + "' in '" + p.obj->name + "'");
            p.stripe_hi = p.stripe_lo = found;
        }
        mem_path_.clear();
        return p;
    }

    void build_mem(const ast::Expr* e, Place& p) {
        switch (e->kind) {
        case ast::Expr::K::Var: { // array or union variable as access root
            VarInfo* vi = find_var(e->name);
            if (!vi || !vi->obj) throw Error("'" + e->name + "' is not in memory");
            p.obj = vi->obj;
            p.in_reg = false;
            p.static_abs = vi->obj->base;
            p.rel = 0;
            mem_path_.clear();
            set_place_kind(p, e->type);
            return;
        }
        case ast::Expr::K::Field: {
            build_mem(e->lhs.get(), p);
            const ast::TypePtr& lt = e->lhs->type;
            auto off = member_offset(*lt, e->name);
            if (!off) throw Error("no member '" + e->name + "'");
            if (lt->kind == ast::Type::K::Struct) {
                // union members do not extend the path
                if (!mem_path_.empty()) mem_path_ += ".";
                mem_path_ += e->name;
            }
            p.static_abs += *off;
            p.rel += *off;
            set_place_kind(p, e->type);
            return;
        }
        case ast::Expr::K::Deref: {
            Val pv = compile_expr(e->lhs.get());
            p.obj = object_of(e->lhs->type->into);
            p.in_reg = false;
            p.has_dyn = true;
            p.dyn = pv;
            p.static_abs = 0;
            p.rel = 0;
            mem_path_.clear();
            set_place_kind(p, e->type);
            return;
        }
        case ast::Expr::K::Index: {
            const ast::Expr* base = e->lhs.get();
            u32 stride;
            if (base->type->kind == ast::Type::K::Pointer) {
                Val pv = compile_expr(base); // absolute word address
                p.obj = object_of(base->type->into);
                p.in_reg = false;
                p.has_dyn = true;
                p.dyn = pv;
                p.static_abs = 0;
                p.rel = 0;
                mem_path_.clear();
                stride = ast::word_count(base->type->pointee);
            } else {
                build_mem(base, p);
                stride = ast::word_count(base->type->elem);
            }
            if (e->rhs->kind == ast::Expr::K::IntLit) {
                u32 words = u32(e->rhs->value) * stride;
                p.static_abs += words;
                // element classes are unified, so `rel` can stay at element 0
            } else {
                Val idx = compile_expr(e->rhs.get());
                idx = scale_index(idx, stride);
                if (p.has_dyn) {
                    p.dyn = add_words(p.dyn, idx);
                } else {
                    // static base becomes the extra on top of the dynamic part
                    p.has_dyn = true;
                    p.dyn = idx;
                }
            }
            set_place_kind(p, e->type);
            return;
        }
        default:
            throw Error("expression does not name a memory location");
        }
    }

    void set_place_kind(Place& p, const ast::TypePtr& t) {
        if (t->kind == ast::Type::K::Basic) {
            p.kind = t->basic;
            p.wide = is_wide(t->basic);
        }
    }

    // Current displacement of a memory place's word(s).
    Offset place_mem_off(const Place& p) {
        if (!p.wide) return db_.at(p.obj->stripe_loc(u32(p.stripe_hi)));
        if (p.stripe_hi == p.stripe_lo && p.obj->stripes[p.stripe_hi].arith)
            return db_.at(p.obj->stripe_loc(u32(p.stripe_hi)));
        Offset h = db_.at(p.obj->stripe_loc(u32(p.stripe_hi)));
        Offset l = db_.at(p.obj->stripe_loc(u32(p.stripe_lo)));
        return Offset::pair(h.lo, l.lo);
    }

    // Stage the address register for a memory access. Returns the register
    // holding (A + abase) where the true word address is A + extra.
    struct Addr {
        u32 reg;
        u32 abase;
        u32 extra;
    };
    Addr stage_addr(const Place& p) {
        if (p.has_dyn) {
            // The address register must survive whole storms, so it cannot
            // ride the shuttles. Deep-expression spill plus indexed stores
            // is out of contract; keep the addressing expression shallower.
            if (spilled(p.dyn.slot))
                throw Error("register file exhausted while addressing memory");
            return {p.dyn.slot, p.dyn.off.lo, p.static_abs};
        }
        u32 d = fresh();
        emit_li(kScratchReg, p.static_abs + d);
        return {kScratchReg, d, 0};
    }

    Val load_place(const Place& p) {
        if (p.in_reg) return read_reg(p.slot, db_.at(Loc::reg(p.slot)), p.kind);
        Val v = make_temp(p.kind);
        Addr a = stage_addr(p);
        Offset cur = place_mem_off(p);
        if (v.wide()) {
            // raw pair lands in shuttle B first; the address register (which
            // may be the scratch) must stay intact across both loads
            emit(isa::Opcode::lw, kShuttleB + 1, a.reg)
                .consts.emplace_back(cw(a.extra + 1 - a.abase));
            emit(isa::Opcode::lw, kShuttleB, a.reg)
                .consts.emplace_back(cw(a.extra - a.abase));
            u32 rd = def_w(v.slot, kShuttleA);
            emit_addi2(rd, kShuttleB, v.off.hi - cur.hi, v.off.lo - cur.lo);
            commit_p(v.slot, rd);
        } else {
            emit(isa::Opcode::lw, kShuttleB, a.reg)
                .consts.emplace_back(cw(a.extra - a.abase));
            u32 rd = def_w(v.slot, kShuttleA);
            emit_addi(rd, kShuttleB, v.off.lo - cur.lo);
            commit_w(v.slot, rd);
        }
        return v;
    }

    // ---------------- write storms ----------------
    //
    // Every store rewrites its whole stripe: the target word(s) take the new
    // value, every other word of the stripe is re-displaced onto the same
    // fresh scheme. An observer sees the identical store pattern no matter
    // which element was written.

    // Rebase one word of a value temp onto a new displacement.
    void rebase_word(u32 slot, u32 from, u32 to) {
        u32 pv = use_w(slot, kShuttleA);
        u32 rd = def_w(slot, kShuttleA);
        emit_addi(rd, pv, to - from);
        commit_w(slot, rd);
    }

    void store_word_at(const Addr& a, u32 word_extra, u32 phys_val) {
        emit(isa::Opcode::sw, a.reg, phys_val)
            .consts.emplace_back(cw(a.extra + word_extra - a.abase));
    }

    // Re-offset one static word (decoy triple). Uses the scratch register
    // for the address and shuttle A for the word.
    void redisplace_static_word(u32 abs_addr, u32 dcur, u32 dnew) {
        u32 d = fresh();
        emit_li(kScratchReg, abs_addr + d);
        emit(isa::Opcode::lw, kShuttleA, kScratchReg).consts.emplace_back(cw(0 - d));
        emit_addi(kShuttleA, kShuttleA, dnew - dcur);
        emit(isa::Opcode::sw, kScratchReg, kShuttleA).consts.emplace_back(cw(0 - d));
    }

    // Skip-guard for decoys when the target address is dynamic: branch over
    // the triple when the staged entry address equals the target.
    void emit_skip_if_target(u32 entry_reg, u32 entry_disp, const Addr& t, u32 skip_label) {
        emit_branch(isa::Opcode::beq, entry_reg, t.reg, skip_label)
            .consts.emplace_back(cw(entry_disp + t.extra - t.abase));
    }

    // Storm over one arithmetic stripe. `target` gives the address of the
    // written element's hi word; `val` must already carry `nd`.
    void storm_arith(MemObject* obj, u32 stripe_idx, const MemStripe& s,
                     const std::optional<Addr>& target, u32 target_static,
                     const Val& val, const Offset& nd) {
        Offset cur = db_.at(obj->stripe_loc(stripe_idx));
        u32 w = s.wide ? 2u : 1u;
        // the real store(s)
        if (target) {
            u32 pv = use_w(val.slot, kShuttleA);
            store_word_at(*target, 0, pv);
            if (s.wide) {
                u32 pl = use_w(val.slot + 1, kShuttleA);
                store_word_at(*target, 1, pl);
            }
        } else {
            u32 d = fresh();
            emit_li(kScratchReg, target_static + d);
            u32 pv = use_w(val.slot, kShuttleA);
            emit(isa::Opcode::sw, kScratchReg, pv).consts.emplace_back(cw(0 - d));
            if (s.wide) {
                u32 pl = use_w(val.slot + 1, kShuttleA);
                emit(isa::Opcode::sw, kScratchReg, pl).consts.emplace_back(cw(1 - d));
            }
        }
        stats_.storm_sizes.push_back(s.count);
        if (s.count > kStormLoopThreshold) {
            storm_loop(obj, s, target, target_static, cur, nd, w);
        } else {
            for (u32 k = 0; k < s.count; ++k) {
                u32 ea = obj->base + s.base + k * s.stride;
                if (!target && ea == target_static) continue; // statically skipped
                u32 skip = target ? new_label() : 0;
                if (target) {
                    u32 d = fresh();
                    emit_li(kScratchReg, ea + d);
                    emit_skip_if_target(kScratchReg, d, *target, skip);
                    // reuse the staged address for the triple
                    emit(isa::Opcode::lw, kShuttleA, kScratchReg).consts.emplace_back(cw(0 - d));
                    emit_addi(kShuttleA, kShuttleA,
                              (s.wide ? nd.hi : nd.lo) - (s.wide ? cur.hi : cur.lo));
                    emit(isa::Opcode::sw, kScratchReg, kShuttleA).consts.emplace_back(cw(0 - d));
                    if (s.wide) {
                        emit(isa::Opcode::lw, kShuttleA, kScratchReg)
                            .consts.emplace_back(cw(1 - d));
                        emit_addi(kShuttleA, kShuttleA, nd.lo - cur.lo);
                        emit(isa::Opcode::sw, kScratchReg, kShuttleA)
                            .consts.emplace_back(cw(1 - d));
                    }
                    place(skip);
                } else {
                    redisplace_static_word(ea, s.wide ? cur.hi : cur.lo,
                                           s.wide ? nd.hi : nd.lo);
                    if (s.wide) redisplace_static_word(ea + 1, cur.lo, nd.lo);
                }
            }
        }
        db_.set(obj->stripe_loc(stripe_idx), nd);
    }

    // Loop form of the storm walk: a counter register steps over the
    // stripe's element addresses; the counter keeps its displacement across
    // iterations so the loop can advance it with one add.
    void storm_loop(MemObject* obj, const MemStripe& s, const std::optional<Addr>& target,
                    u32 target_static, const Offset& cur, const Offset& nd, u32 w) {
        (void)w;
        u32 sctr = push(1), send = push(1);
        u32 da = fresh(), de = fresh();
        u32 first = obj->base + s.base;
        {
            u32 rc = def_w(sctr, kShuttleA);
            emit_li(rc, first + da);
            commit_w(sctr, rc);
            u32 re = def_w(send, kShuttleA);
            emit_li(re, first + s.count * s.stride + de);
            commit_w(send, re);
        }
        u32 head = new_label(), exit_l = new_label(), next_l = new_label();
        place(head);
        {
            u32 rc = use_w(sctr, kShuttleA);
            u32 re = use_w(send, kShuttleB);
            emit_branch(isa::Opcode::beq, rc, re, exit_l).consts.emplace_back(cw(da - de));
            if (target) {
                emit_skip_if_target(rc, da, *target, next_l);
            } else {
                // static target: stage it fresh each round for the compare
                u32 dt = fresh();
                emit_li(kScratchReg, target_static + dt);
                emit_branch(isa::Opcode::beq, rc, kScratchReg, next_l)
                    .consts.emplace_back(cw(da - dt));
            }
            emit(isa::Opcode::lw, kShuttleA, rc).consts.emplace_back(cw(0 - da));
            emit_addi(kShuttleA, kShuttleA, (s.wide ? nd.hi : nd.lo) - (s.wide ? cur.hi : cur.lo));
            emit(isa::Opcode::sw, rc, kShuttleA).consts.emplace_back(cw(0 - da));
            if (s.wide) {
                emit(isa::Opcode::lw, kShuttleA, rc).consts.emplace_back(cw(1 - da));
                emit_addi(kShuttleA, kShuttleA, nd.lo - cur.lo);
                emit(isa::Opcode::sw, rc, kShuttleA).consts.emplace_back(cw(1 - da));
            }
            place(next_l);
            // advance; the counter displacement deliberately stays put
            u32 rc2 = use_w(sctr, kShuttleA);
            u32 rd = def_w(sctr, kShuttleA);
            emit_addi(rd, rc2, s.stride);
            commit_w(sctr, rd);
            emit_b(head);
        }
        place(exit_l);
        cur_->tsp = sctr;
    }

    // Storm over a union class (explicit word list). `real` lists the
    // written words of this class as (delta from the member's first word,
    // value slot); they are stored, the rest of the class re-displaces.
    // `tgt_rel` is the member's first word offset within the object for
    // static targets.
    void storm_union_class(MemObject* obj, u32 class_idx,
                           const std::vector<std::pair<u32, u32>>& real,
                           const std::optional<Addr>& target, u32 tgt_rel,
                           const Offset& nd_w) {
        const MemStripe& s = obj->stripes[class_idx];
        Offset cur = db_.at(obj->stripe_loc(class_idx));
        for (const auto& [delta, vslot] : real) {
            if (target) {
                u32 pv = use_w(vslot, kShuttleA);
                store_word_at(*target, delta, pv);
            } else {
                u32 d = fresh();
                emit_li(kScratchReg, obj->base + tgt_rel + delta + d);
                u32 pv = use_w(vslot, kShuttleA);
                emit(isa::Opcode::sw, kScratchReg, pv).consts.emplace_back(cw(0 - d));
            }
        }
        stats_.storm_sizes.push_back(u32(s.words.size()));
        for (u32 wrel : s.words) {
            if (!target) {
                bool is_real = false;
                for (const auto& [delta, vslot] : real) {
                    (void)vslot;
                    if (tgt_rel + delta == wrel) is_real = true;
                }
                if (is_real) continue;
                redisplace_static_word(obj->base + wrel, cur.lo, nd_w.lo);
                continue;
            }
            u32 skip = new_label();
            u32 d = fresh();
            emit_li(kScratchReg, obj->base + wrel + d);
            // skip every word the member write covered
            for (const auto& [delta, vslot] : real) {
                (void)vslot;
                Addr t = *target;
                t.extra += delta;
                emit_skip_if_target(kScratchReg, d, t, skip);
            }
            emit(isa::Opcode::lw, kShuttleA, kScratchReg).consts.emplace_back(cw(0 - d));
            emit_addi(kShuttleA, kShuttleA, nd_w.lo - cur.lo);
            emit(isa::Opcode::sw, kScratchReg, kShuttleA).consts.emplace_back(cw(0 - d));
            place(skip);
        }
        db_.set(obj->stripe_loc(class_idx), nd_w);
    }

    void store_place(const Place& p, Val v) {
        if (p.in_reg) {
            Offset nd = fresh_off(p.wide);
            if (p.wide) {
                u32 pv = use_p(v.slot, kShuttleB);
                u32 rd = def_w(p.slot, kShuttleA);
                emit_addi2(rd, pv, nd.hi - v.off.hi, nd.lo - v.off.lo);
                commit_p(p.slot, rd);
            } else {
                u32 pv = use_w(v.slot, kShuttleB);
                u32 rd = def_w(p.slot, kShuttleA);
                emit_addi(rd, pv, nd.lo - v.off.lo);
                commit_w(p.slot, rd);
            }
            db_.set(Loc::reg(p.slot), nd);
            return;
        }
        std::optional<Addr> target;
        if (p.has_dyn) target = stage_addr(p);
        if (!p.obj->is_union) {
            const MemStripe& s = p.obj->stripes[p.stripe_hi];
            Offset nd = fresh_off(s.wide);
            // rebase the value onto the stripe's new displacement first
            if (s.wide) {
                rebase_word(v.slot, v.off.hi, nd.hi);
                rebase_word(v.slot + 1, v.off.lo, nd.lo);
            } else {
                rebase_word(v.slot, v.off.lo, nd.lo);
            }
            storm_arith(p.obj, u32(p.stripe_hi), s, target, p.static_abs, v, nd);
            return;
        }
        // Union: one storm per touched class.
        u32 tgt_rel = p.has_dyn ? 0 : p.static_abs - p.obj->base;
        if (!p.wide) {
            Offset nd = fresh_word();
            rebase_word(v.slot, v.off.lo, nd.lo);
            storm_union_class(p.obj, u32(p.stripe_hi), {{0, v.slot}}, target, tgt_rel, nd);
            return;
        }
        if (p.stripe_hi == p.stripe_lo) {
            Offset nd = fresh_word();
            rebase_word(v.slot, v.off.hi, nd.lo);
            rebase_word(v.slot + 1, v.off.lo, nd.lo);
            storm_union_class(p.obj, u32(p.stripe_hi),
                              {{0, v.slot}, {1, v.slot + 1}}, target, tgt_rel, nd);
            return;
        }
        Offset ndh = fresh_word(), ndl = fresh_word();
        rebase_word(v.slot, v.off.hi, ndh.lo);
        rebase_word(v.slot + 1, v.off.lo, ndl.lo);
        storm_union_class(p.obj, u32(p.stripe_hi), {{0, v.slot}}, target, tgt_rel, ndh);
        storm_union_class(p.obj, u32(p.stripe_lo), {{1, v.slot + 1}}, target, tgt_rel, ndl);
    }

    // Zero-fill a fresh object, one storm-shaped pass per stripe (every
    // declared word must be written before it can be read).
    void fill_object(MemObject* obj) {
        for (u32 i = 0; i < obj->stripes.size(); ++i) {
            const MemStripe& s = obj->stripes[i];
            Offset nd = fresh_off(s.arith && s.wide);
            db_.set(obj->stripe_loc(i), nd);
            if (s.arith) {
                u32 vh = push(1);
                u32 rv = def_w(vh, kShuttleB);
                emit_li(rv, s.wide ? nd.hi : nd.lo);
                commit_w(vh, rv);
                u32 vl = 0;
                if (s.wide) {
                    vl = push(1);
                    u32 rl = def_w(vl, kShuttleB);
                    emit_li(rl, nd.lo);
                    commit_w(vl, rl);
                }
                if (s.count > kStormLoopThreshold) {
                    fill_loop(obj, s, vh, vl);
                } else {
                    for (u32 k = 0; k < s.count; ++k) {
                        u32 ea = obj->base + s.base + k * s.stride;
                        u32 d = fresh();
                        emit_li(kScratchReg, ea + d);
                        u32 pv = use_w(vh, kShuttleA);
                        emit(isa::Opcode::sw, kScratchReg, pv).consts.emplace_back(cw(0 - d));
                        if (s.wide) {
                            u32 pl = use_w(vl, kShuttleA);
                            emit(isa::Opcode::sw, kScratchReg, pl)
                                .consts.emplace_back(cw(1 - d));
                        }
                    }
                }
                cur_->tsp = vh;
            } else {
                u32 vs = push(1);
                u32 rv = def_w(vs, kShuttleB);
                emit_li(rv, nd.lo);
                commit_w(vs, rv);
                for (u32 wrel : s.words) {
                    u32 d = fresh();
                    emit_li(kScratchReg, obj->base + wrel + d);
                    u32 pv = use_w(vs, kShuttleA);
                    emit(isa::Opcode::sw, kScratchReg, pv).consts.emplace_back(cw(0 - d));
                }
                cur_->tsp = vs;
            }
        }
    }

    void fill_loop(MemObject* obj, const MemStripe& s, u32 vh, u32 vl) {
        u32 sctr = push(1), send = push(1);
        u32 da = fresh(), de = fresh();
        u32 first = obj->base + s.base;
        u32 rc0 = def_w(sctr, kShuttleA);
        emit_li(rc0, first + da);
        commit_w(sctr, rc0);
        u32 re0 = def_w(send, kShuttleA);
        emit_li(re0, first + s.count * s.stride + de);
        commit_w(send, re0);
        u32 head = new_label(), exit_l = new_label();
        place(head);
        u32 rc = use_w(sctr, kShuttleA);
        u32 re = use_w(send, kShuttleB);
        emit_branch(isa::Opcode::beq, rc, re, exit_l).consts.emplace_back(cw(da - de));
        u32 pv = use_w(vh, kShuttleB);
        emit(isa::Opcode::sw, rc, pv).consts.emplace_back(cw(0 - da));
        if (s.wide) {
            u32 pl = use_w(vl, kShuttleB);
            emit(isa::Opcode::sw, rc, pl).consts.emplace_back(cw(1 - da));
        }
        u32 rc2 = use_w(sctr, kShuttleA);
        u32 rd = def_w(sctr, kShuttleA);
        emit_addi(rd, rc2, s.stride);
        commit_w(sctr, rd);
        emit_b(head);
        place(exit_l);
        cur_->tsp = sctr;
    }

    // Re-displace a whole stripe from its current scheme onto `target`
    // (merge-point reconciliation; no payload store).
    void reconcile_stripe(MemObject* obj, u32 idx, const Offset& target) {
        const MemStripe& s = obj->stripes[idx];
        Offset cur = db_.at(obj->stripe_loc(idx));
        if (cur == target) return;
        if (s.arith) {
            if (s.count > kStormLoopThreshold) {
                storm_loop(obj, s, std::nullopt, obj->base - 1 /* matches nothing */,
                           cur, target, s.wide ? 2u : 1u);
            } else {
                for (u32 k = 0; k < s.count; ++k) {
                    u32 ea = obj->base + s.base + k * s.stride;
                    redisplace_static_word(ea, s.wide ? cur.hi : cur.lo,
                                           s.wide ? target.hi : target.lo);
                    if (s.wide) redisplace_static_word(ea + 1, cur.lo, target.lo);
                }
            }
        } else {
            for (u32 wrel : s.words)
                redisplace_static_word(obj->base + wrel, cur.lo, target.lo);
        }
        db_.set(obj->stripe_loc(idx), target);
    }

    // ---------------- merge points ----------------

    JoinState capture_join(const std::string& tag) {
        JoinState j;
        j.regs = obf::snapshot(tag, db_, vars_);
        for (const auto& [loc, off] : db_)
            if (loc.kind == Loc::Kind::Stripe) j.stripes.push_back({loc, off});
        return j;
    }

    void join_to(const JoinState& j) {
        auto code = obf::restore_code(j.regs, db_, vars_, ctx_);
        for (auto& ins : code) cur_->code.push_back(std::move(ins));
        for (const auto& [loc, off] : j.stripes) {
            if (!db_.contains(loc)) continue; // object no longer in scope here
            MemObject* obj = objects_.at(loc.a).get();
            reconcile_stripe(obj, loc.b, off);
        }
        // verify: everything the snapshot names must now agree
        stats_.join_checks += j.regs.entries.size() + j.stripes.size();
        for (const auto& e : j.regs.entries)
            if (!(db_.at(e.loc) == e.off)) stats_.join_failures++;
        for (const auto& [loc, off] : j.stripes)
            if (db_.contains(loc) && !(db_.at(loc) == off)) stats_.join_failures++;
    }

    // ---------------- conditions and branches ----------------

    struct BranchPick {
        isa::Opcode op;
        bool swap_operands = false;
        enum class Form { FoldEq, StripS32, TwoConst, PairEq, TwoPair } form;
    };

    static BranchPick pick_branch(ast::BinOp op, BasicKind k) {
        using ast::BinOp;
        using isa::Opcode;
        using F = BranchPick::Form;
        switch (k) {
        case BasicKind::Int:
            switch (op) {
            case BinOp::Eq: return {Opcode::beq, false, F::FoldEq};
            case BinOp::Ne: return {Opcode::bne, false, F::FoldEq};
            case BinOp::Lt: return {Opcode::blt, false, F::StripS32};
            case BinOp::Gt: return {Opcode::bgt, false, F::StripS32};
            case BinOp::Le: return {Opcode::ble, false, F::StripS32};
            default: return {Opcode::bge, false, F::StripS32};
            }
        case BasicKind::UInt:
            switch (op) {
            case BinOp::Eq: return {Opcode::beq, false, F::FoldEq};
            case BinOp::Ne: return {Opcode::bne, false, F::FoldEq};
            case BinOp::Lt: return {Opcode::bltu, false, F::TwoConst};
            case BinOp::Gt: return {Opcode::bgtu, false, F::TwoConst};
            case BinOp::Le: return {Opcode::bleu, false, F::TwoConst};
            default: return {Opcode::bgeu, false, F::TwoConst};
            }
        case BasicKind::Float:
            // only the positive float compares carry plain source semantics;
            // Gt/Ge become swapped Lt/Le
            switch (op) {
            case BinOp::Eq: return {Opcode::beqf, false, F::TwoConst};
            case BinOp::Ne: return {Opcode::bnef, false, F::TwoConst};
            case BinOp::Lt: return {Opcode::bltf, false, F::TwoConst};
            case BinOp::Gt: return {Opcode::bltf, true, F::TwoConst};
            case BinOp::Le: return {Opcode::blef, false, F::TwoConst};
            default: return {Opcode::blef, true, F::TwoConst};
            }
        case BasicKind::LongLong:
            switch (op) {
            case BinOp::Eq: return {Opcode::beq2, false, F::PairEq};
            case BinOp::Ne: return {Opcode::bne2, false, F::PairEq};
            case BinOp::Lt: return {Opcode::blt2, false, F::TwoPair};
            case BinOp::Gt: return {Opcode::bgt2, false, F::TwoPair};
            case BinOp::Le: return {Opcode::ble2, false, F::TwoPair};
            default: return {Opcode::bge2, false, F::TwoPair};
            }
        case BasicKind::ULongLong:
            switch (op) {
            case BinOp::Eq: return {Opcode::beq2, false, F::PairEq};
            case BinOp::Ne: return {Opcode::bne2, false, F::PairEq};
            case BinOp::Lt: return {Opcode::bltu2, false, F::TwoPair};
            case BinOp::Gt: return {Opcode::bgtu2, false, F::TwoPair};
            case BinOp::Le: return {Opcode::bleu2, false, F::TwoPair};
            default: return {Opcode::bgeu2, false, F::TwoPair};
            }
        case BasicKind::Double:
            switch (op) {
            case BinOp::Eq: return {Opcode::beqd, false, F::TwoPair};
            case BinOp::Ne: return {Opcode::bned, false, F::TwoPair};
            case BinOp::Lt: return {Opcode::bltd, false, F::TwoPair};
            case BinOp::Gt: return {Opcode::bltd, true, F::TwoPair};
            case BinOp::Le: return {Opcode::bled, false, F::TwoPair};
            default: return {Opcode::bled, true, F::TwoPair};
            }
        default:
            // narrow kinds compare as their canonical 32-bit forms
            return pick_branch(op, ast::is_signed_kind(k) || k == BasicKind::Bool
                                       ? BasicKind::Int
                                       : BasicKind::UInt);
        }
    }

    // Emit one comparison leaf with a per-site polarity coin: either the
    // straight opcode jumping to the true label, or its complement jumping
    // to the false label. The fall edge always gets an explicit jump.
    void emit_cond_leaf(ast::BinOp op, Val a, Val b, BasicKind k, u32 lt, u32 lf) {
        BranchPick pk = pick_branch(op, k);
        if (pk.swap_operands) std::swap(a, b);
        bool lie = coin();
        isa::Opcode actual = lie ? isa::complement_of(pk.op) : pk.op;
        u32 tgt = lie ? lf : lt;
        u32 other = lie ? lt : lf;
        using F = BranchPick::Form;
        switch (pk.form) {
        case F::FoldEq: {
            u32 pa = use_w(a.slot, kShuttleA);
            u32 pb = use_w(b.slot, kShuttleB);
            emit_branch(actual, pa, pb, tgt).consts.emplace_back(cw(a.off.lo - b.off.lo));
            break;
        }
        case F::StripS32: {
            u32 pa = use_w(a.slot, kShuttleA);
            u32 pb = use_w(b.slot, kShuttleB);
            emit_addi(kScratchReg, pa, 0 - a.off.lo); // signed order wants a bare left side
            emit_branch(actual, kScratchReg, pb, tgt).consts.emplace_back(cw(0 - b.off.lo));
            break;
        }
        case F::TwoConst: {
            u32 pa = use_w(a.slot, kShuttleA);
            u32 pb = use_w(b.slot, kShuttleB);
            auto& ins = emit_branch(actual, pa, pb, tgt);
            ins.consts.emplace_back(cw(a.off.lo));
            ins.consts.emplace_back(cw(b.off.lo));
            break;
        }
        case F::PairEq: {
            u32 pa = use_p(a.slot, kShuttleA);
            u32 pb = use_p(b.slot, kShuttleB);
            emit_branch(actual, pa, pb, tgt)
                .consts.emplace_back(cp(a.off.hi - b.off.hi, a.off.lo - b.off.lo));
            break;
        }
        case F::TwoPair: {
            u32 pa = use_p(a.slot, kShuttleA);
            u32 pb = use_p(b.slot, kShuttleB);
            auto& ins = emit_branch(actual, pa, pb, tgt);
            ins.consts.emplace_back(cp(a.off));
            ins.consts.emplace_back(cp(b.off));
            break;
        }
        }
        emit_b(other);
    }

    void compile_cond(const ast::Expr* c, u32 lt, u32 lf) {
        if (c->kind == ast::Expr::K::Binary && c->op == ast::BinOp::LAnd) {
            u32 mid = new_label();
            compile_cond(c->lhs.get(), mid, lf);
            place(mid);
            compile_cond(c->rhs.get(), lt, lf);
            return;
        }
        if (c->kind == ast::Expr::K::Binary && c->op == ast::BinOp::LOr) {
            u32 mid = new_label();
            compile_cond(c->lhs.get(), lt, mid);
            place(mid);
            compile_cond(c->rhs.get(), lt, lf);
            return;
        }
        if (c->kind != ast::Expr::K::Binary || !ast::is_comparison(c->op))
            throw Error("internal: condition did not normalize to comparisons");
        u32 m = cur_->tsp;
        Val a = compile_expr(c->lhs.get());
        Val b = compile_expr(c->rhs.get());
        emit_cond_leaf(c->op, a, b, c->lhs->type->basic, lt, lf);
        cur_->tsp = m;
    }

    // 0/1 word from a condition (comparisons and logical operators in value
    // position). Both arms fold onto one fresh displacement.
    Val materialize_cond(const ast::Expr* c) {
        Val v = make_temp(BasicKind::Int);
        u32 lt = new_label(), lf = new_label(), lj = new_label();
        compile_cond(c, lt, lf);
        place(lt);
        {
            u32 rd = def_w(v.slot, kShuttleA);
            emit_li(rd, 1 + v.off.lo);
            commit_w(v.slot, rd);
        }
        emit_b(lj);
        place(lf);
        {
            u32 rd = def_w(v.slot, kShuttleA);
            emit_li(rd, 0 + v.off.lo);
            commit_w(v.slot, rd);
        }
        place(lj);
        return v;
    }

    // (x != 0) with the source's compare family; used by casts to Bool.
    Val materialize_nonzero(Val x) {
        u32 m = cur_->tsp;
        Val zero = load_literal_bits(0, x.kind);
        Val v;
        {
            u32 lt = new_label(), lf = new_label(), lj = new_label();
            emit_cond_leaf(ast::BinOp::Ne, x, zero, x.kind, lt, lf);
            cur_->tsp = m;
            v = make_temp(BasicKind::Bool);
            place(lt);
            u32 rd = def_w(v.slot, kShuttleA);
            emit_li(rd, 1 + v.off.lo);
            commit_w(v.slot, rd);
            emit_b(lj);
            place(lf);
            rd = def_w(v.slot, kShuttleA);
            emit_li(rd, 0 + v.off.lo);
            commit_w(v.slot, rd);
            place(lj);
        }
        return v;
    }

    // ---------------- casts ----------------

    Val emit_cvt(isa::Opcode op, Val src, BasicKind out_kind) {
        bool in_wide = src.wide();
        bool out_wide = is_wide(out_kind) || out_kind == BasicKind::Double;
        cur_->tsp = src.slot; // consume the operand
        Val dst = make_temp(out_kind);
        u32 ps = in_wide ? use_p(src.slot, kShuttleB) : use_w(src.slot, kShuttleB);
        u32 rd = def_w(dst.slot, kShuttleA);
        auto& ins = emit(op, rd, ps);
        if (in_wide)
            ins.consts.emplace_back(cp(src.off));
        else
            ins.consts.emplace_back(cw(src.off.lo));
        if (out_wide)
            ins.consts.emplace_back(cp(dst.off));
        else
            ins.consts.emplace_back(cw(dst.off.lo));
        if (out_wide)
            commit_p(dst.slot, rd);
        else
            commit_w(dst.slot, rd);
        return dst;
    }

    // Clamp a canonical 32-bit word to a narrower canonical form: shift the
    // kept bits to the top with a blinded multiply, shift back down with a
    // blinded divide (signed for sign extension, unsigned for zero fill).
    // The intermediate is always an exact multiple of the divisor.
    Val narrow_word(Val x, BasicKind t) {
        u32 sh = t == BasicKind::Char || t == BasicKind::UChar ? 24 : 16;
        u32 shpow = 1u << sh;
        bool sgn = ast::is_signed_kind(t);
        u32 ks = push(1);
        // scale up
        u32 k1 = fresh();
        {
            u32 rk = def_w(ks, kShuttleB);
            emit_li(rk, k1);
            commit_w(ks, rk);
        }
        Offset mid = fresh_word();
        {
            u32 px = use_w(x.slot, kShuttleA);
            u32 pk = use_w(ks, kShuttleB);
            u32 rd = def_w(x.slot, kShuttleA);
            auto& ins = emit(isa::Opcode::mul, rd, px, pk);
            ins.consts.emplace_back(cw(x.off.lo));
            ins.consts.emplace_back(cw(k1 - shpow));
            ins.consts.emplace_back(cw(mid.lo));
            commit_w(x.slot, rd);
        }
        // scale back down
        u32 k3 = fresh();
        {
            u32 rk = def_w(ks, kShuttleB);
            emit_li(rk, k3);
            commit_w(ks, rk);
        }
        Offset out = fresh_word();
        {
            u32 px = use_w(x.slot, kShuttleA);
            u32 pk = use_w(ks, kShuttleB);
            u32 rd = def_w(x.slot, kShuttleA);
            auto& ins = emit(sgn ? isa::Opcode::div : isa::Opcode::divu, rd, px, pk);
            ins.consts.emplace_back(cw(mid.lo));
            ins.consts.emplace_back(cw(k3 - shpow));
            ins.consts.emplace_back(cw(out.lo));
            commit_w(x.slot, rd);
        }
        cur_->tsp = x.slot + 1;
        x.off = out;
        x.kind = t;
        return x;
    }

    Val compile_cast(const ast::Expr* e) {
        Val v = compile_expr(e->lhs.get());
        BasicKind s = e->lhs->type->kind == ast::Type::K::Basic ? e->lhs->type->basic
                                                                : BasicKind::UInt;
        BasicKind t = e->cast_to->basic;
        using K = BasicKind;
        if (t == K::Bool) return materialize_nonzero(v);
        if (t == K::Float) {
            switch (s) {
            case K::Float: v.kind = t; return v;
            case K::Double: return emit_cvt(isa::Opcode::cvt_df, v, t);
            case K::LongLong: return emit_cvt(isa::Opcode::cvt_lf, v, t);
            case K::ULongLong: return emit_cvt(isa::Opcode::cvt_ulf, v, t);
            case K::UInt:
            case K::ULong: return emit_cvt(isa::Opcode::cvt_uf, v, t);
            default: return emit_cvt(isa::Opcode::cvt_if, v, t);
            }
        }
        if (t == K::Double) {
            switch (s) {
            case K::Double: v.kind = t; return v;
            case K::Float: return emit_cvt(isa::Opcode::cvt_fd, v, t);
            case K::LongLong: return emit_cvt(isa::Opcode::cvt_ld, v, t);
            case K::ULongLong: return emit_cvt(isa::Opcode::cvt_uld, v, t);
            case K::UInt:
            case K::ULong: return emit_cvt(isa::Opcode::cvt_ud, v, t);
            default: return emit_cvt(isa::Opcode::cvt_id, v, t);
            }
        }
        if (is_wide(t)) { // LongLong / ULongLong
            if (s == K::Float) return emit_cvt(isa::Opcode::cvt_fl, v, t);
            if (s == K::Double) return emit_cvt(isa::Opcode::cvt_dl, v, t);
            if (is_wide(s)) { v.kind = t; return v; } // same bits, new label
            return emit_cvt(ast::is_signed_kind(s) ? isa::Opcode::cvt_wl
                                                   : isa::Opcode::cvt_wlu,
                            v, t);
        }
        // 32-bit and narrower integer targets
        if (s == K::Float) v = emit_cvt(isa::Opcode::cvt_fi, v, K::Int);
        else if (s == K::Double) v = emit_cvt(isa::Opcode::cvt_di, v, K::Int);
        else if (is_wide(s)) v = emit_cvt(isa::Opcode::cvt_lw, v, K::Int);
        if (ast::int_width(t) < 32) return narrow_word(v, t);
        v.kind = t;
        return v;
    }

    // ---------------- expressions ----------------

    Val compile_expr(const ast::Expr* e) {
        switch (e->kind) {
        case ast::Expr::K::IntLit: {
            BasicKind k = e->type->basic;
            u64 bits = is_wide(k) ? e->value : u64(u32(e->value));
            return load_literal_bits(bits, k);
        }
        case ast::Expr::K::FloatLit: {
            if (e->type->basic == BasicKind::Float)
                return load_literal_bits(plain::bits_of_f32(float(e->fval)),
                                         BasicKind::Float);
            return load_literal_bits(plain::bits_of_f64(e->fval), BasicKind::Double);
        }
        case ast::Expr::K::Var: {
            VarInfo* vi = find_var(e->name);
            if (!vi) throw Error("unknown variable '" + e->name + "'");
            if (vi->obj) { // array decays to its base address
                if (vi->type->kind != ast::Type::K::Array)
                    throw Error("'" + e->name + "' has no scalar value");
                Val v = make_temp(BasicKind::UInt);
                u32 rd = def_w(v.slot, kShuttleA);
                emit_li(rd, vi->obj->base + v.off.lo);
                commit_w(v.slot, rd);
                return v;
            }
            BasicKind k = vi->type->kind == ast::Type::K::Pointer ? BasicKind::UInt
                                                                  : vi->type->basic;
            return read_reg(vi->slot, db_.at(Loc::reg(vi->slot)), k);
        }
        case ast::Expr::K::Binary:
            return compile_binary(e);
        case ast::Expr::K::Cast:
            return compile_cast(e);
        case ast::Expr::K::Index:
        case ast::Expr::K::Deref:
            return load_place(resolve_mem(e));
        case ast::Expr::K::Field: {
            Place p = resolve_place(e);
            return load_place(p);
        }
        case ast::Expr::K::Call:
            throw Error("internal: call survived expression position");
        }
        throw Error("internal: unhandled expression");
    }

    Val compile_binary(const ast::Expr* e) {
        using ast::BinOp;
        if (e->op == BinOp::LAnd || e->op == BinOp::LOr || ast::is_comparison(e->op))
            return materialize_cond(e);
        // pointer arithmetic: fold the scaled index into a word add/sub
        if (e->type->kind == ast::Type::K::Pointer) {
            // an array operand decays; it stays array-typed in the tree
            bool lptr = e->lhs->type->kind != ast::Type::K::Basic;
            Val lv = compile_expr(e->lhs.get());
            Val rv = compile_expr(e->rhs.get());
            const ast::Expr* pe = lptr ? e->lhs.get() : e->rhs.get();
            Val pv = lptr ? lv : rv;
            Val iv = lptr ? rv : lv;
            const ast::TypePtr& et = pe->type->kind == ast::Type::K::Pointer
                                         ? pe->type->pointee
                                         : pe->type->elem;
            iv = scale_index(iv, ast::word_count(et));
            u32 pa = use_w(pv.slot, kShuttleA);
            u32 pb = use_w(iv.slot, kShuttleB);
            u32 rd = def_w(pv.slot, kShuttleA);
            Offset nd = fresh_word();
            if (e->op == BinOp::Add)
                emit(isa::Opcode::add, rd, pa, pb)
                    .consts.emplace_back(cw(nd.lo - pv.off.lo - iv.off.lo));
            else
                emit(isa::Opcode::sub, rd, pa, pb)
                    .consts.emplace_back(cw(nd.lo - pv.off.lo + iv.off.lo));
            commit_w(pv.slot, rd);
            cur_->tsp = pv.slot + 1;
            pv.off = nd;
            return pv;
        }
        Val a = compile_expr(e->lhs.get());
        Val b = compile_expr(e->rhs.get());
        BasicKind k = e->type->basic;
        Offset nd = fresh_off(is_wide(k));
        using isa::Opcode;
        if (!is_wide(k) && !ast::is_float_kind(k)) {
            u32 pa = use_w(a.slot, kShuttleA);
            u32 pb = use_w(b.slot, kShuttleB);
            u32 rd = def_w(a.slot, kShuttleA);
            switch (e->op) {
            case BinOp::Add:
                emit(Opcode::add, rd, pa, pb)
                    .consts.emplace_back(cw(nd.lo - a.off.lo - b.off.lo));
                break;
            case BinOp::Sub:
                emit(Opcode::sub, rd, pa, pb)
                    .consts.emplace_back(cw(nd.lo - a.off.lo + b.off.lo));
                break;
            case BinOp::Mul:
            case BinOp::Div: {
                Opcode op = e->op == BinOp::Mul ? Opcode::mul
                            : k == BasicKind::UInt ? Opcode::divu
                                                   : Opcode::div;
                auto& ins = emit(op, rd, pa, pb);
                ins.consts.emplace_back(cw(a.off.lo));
                ins.consts.emplace_back(cw(b.off.lo));
                ins.consts.emplace_back(cw(nd.lo));
                break;
            }
            default:
                throw Error("internal: unexpected arithmetic operator");
            }
            commit_w(a.slot, rd);
        } else if (k == BasicKind::Float) {
            u32 pa = use_w(a.slot, kShuttleA);
            u32 pb = use_w(b.slot, kShuttleB);
            u32 rd = def_w(a.slot, kShuttleA);
            Opcode op = e->op == BinOp::Add   ? Opcode::addf
                        : e->op == BinOp::Sub ? Opcode::subf
                        : e->op == BinOp::Mul ? Opcode::mulf
                                              : Opcode::divf;
            auto& ins = emit(op, rd, pa, pb);
            ins.consts.emplace_back(cw(a.off.lo));
            ins.consts.emplace_back(cw(b.off.lo));
            ins.consts.emplace_back(cw(nd.lo));
            commit_w(a.slot, rd);
        } else {
            u32 pa = use_p(a.slot, kShuttleA);
            u32 pb = use_p(b.slot, kShuttleB);
            u32 rd = def_w(a.slot, kShuttleA);
            Opcode op;
            if (k == BasicKind::Double) {
                op = e->op == BinOp::Add   ? Opcode::add_d
                     : e->op == BinOp::Sub ? Opcode::sub_d
                     : e->op == BinOp::Mul ? Opcode::mul_d
                                           : Opcode::div_d;
            } else {
                op = e->op == BinOp::Add   ? Opcode::add2
                     : e->op == BinOp::Sub ? Opcode::sub2
                     : e->op == BinOp::Mul ? Opcode::mul_ll
                     : k == BasicKind::ULongLong ? Opcode::divu_ll
                                                 : Opcode::div_ll;
            }
            auto& ins = emit(op, rd, pa, pb);
            ins.consts.emplace_back(cp(a.off));
            ins.consts.emplace_back(cp(b.off));
            ins.consts.emplace_back(cp(nd));
            commit_p(a.slot, rd);
        }
        cur_->tsp = a.slot + width_of(k);
        a.off = nd;
        a.kind = k;
        return a;
    }

    // ---------------- statements ----------------

    void compile_stmts(const std::vector<ast::StmtPtr>& body) {
        for (const auto& st : body) compile_stmt(st.get());
    }

    void compile_stmt(const ast::Stmt* st) {
        cur_->tsp = cur_->base + cur_->local_top;
        switch (st->kind) {
        case ast::Stmt::K::Decl: return compile_decl(st);
        case ast::Stmt::K::Assign: {
            Val v = compile_expr(st->value.get());
            Place p = resolve_place(st->target.get());
            store_place(p, v);
            return;
        }
        case ast::Stmt::K::If: return compile_if(st);
        case ast::Stmt::K::While: return compile_while(st);
        case ast::Stmt::K::Block: {
            push_scope();
            compile_stmts(st->body);
            pop_scope();
            return;
        }
        case ast::Stmt::K::Goto: {
            auto it = labels_.find(st->name);
            if (it == labels_.end()) throw Error("goto to unknown label '" + st->name + "'");
            if (it->second.fn_label)
                throw Error("goto targets the function label '" + st->name + "'");
            join_to(it->second.join);
            emit_b(it->second.label);
            return;
        }
        case ast::Stmt::K::LabelDecl: {
            LabelCtl ctl;
            ctl.join = capture_join("label:" + st->name);
            ctl.label = new_label();
            labels_[st->name] = std::move(ctl);
            return;
        }
        case ast::Stmt::K::Label: {
            auto it = labels_.find(st->name);
            if (it == labels_.end())
                throw Error("label '" + st->name + "' placed without declaration");
            join_to(it->second.join); // fall-through edge
            place(it->second.label);
            // Rebase the join on the full state at the placement so backward
            // jumps also pin variables declared after the label declaration.
            // Forward jumps ran against the declaration-point state; anything
            // declared in between holds no contract across such an edge.
            it->second.join = capture_join("label:" + st->name);
            return;
        }
        case ast::Stmt::K::Return: {
            std::optional<Val> v;
            if (st->value) v = compile_expr(st->value.get());
            emit_exit(v);
            return;
        }
        case ast::Stmt::K::Emit: {
            Val v = compile_expr(st->value.get());
            u32 slot = u32(st->emit_slot);
            u32 reg = emit_regs_.at(slot);
            const Offset& d = emit_offs_.at(slot);
            if (v.wide()) {
                u32 pv = use_p(v.slot, kShuttleB);
                emit_addi2(reg, pv, d.hi - v.off.hi, d.lo - v.off.lo);
            } else {
                u32 pv = use_w(v.slot, kShuttleB);
                emit_addi(reg, pv, d.lo - v.off.lo);
            }
            return;
        }
        case ast::Stmt::K::Call: return compile_call(st);
        case ast::Stmt::K::ExprStmt: {
            const ast::TypePtr& t = st->value->type;
            if (t && (t->kind == ast::Type::K::Basic || t->kind == ast::Type::K::Pointer))
                compile_expr(st->value.get()); // evaluated for traps, then dropped
            return;
        }
        case ast::Stmt::K::InteriorFn: return compile_interior_def(st);
        }
    }

    void compile_decl(const ast::Stmt* st) {
        const ast::TypePtr& t = st->decl_type;
        switch (t->kind) {
        case ast::Type::K::Basic:
        case ast::Type::K::Pointer: {
            BasicKind k = t->kind == ast::Type::K::Basic ? t->basic : BasicKind::UInt;
            u32 w = width_of(k);
            u32 home = cur_->base + cur_->local_top;
            if (spilled(home + w - 1))
                throw Error("register file exhausted: variable '" + st->name +
                            "' does not fit; reduce live variables");
            Val v = st->value ? compile_expr(st->value.get()) : load_literal_bits(0, k);
            if (v.slot != home) {
                // initializer landed above the variable's fixed home; a bit
                // copy moves it without touching the displacement
                u32 pv = use_w(v.slot, kShuttleB);
                emit(isa::Opcode::mov, home, pv);
                if (w == 2) {
                    u32 pl = use_w(v.slot + 1, kShuttleB);
                    emit(isa::Opcode::mov, home + 1, pl);
                }
            }
            bind_reg_var(st->name, home, v.off);
            VarInfo vi;
            vi.type = t;
            vi.slot = home;
            scopes_.back()[st->name] = std::move(vi);
            cur_->local_top += w;
            cur_->tsp = cur_->base + cur_->local_top;
            return;
        }
        case ast::Type::K::Struct: {
            VarInfo vi;
            vi.type = t;
            flatten_struct(t, "", 0, vi.leaves);
            u32 words = ast::word_count(t);
            u32 base_slot = push(words); // contiguous leaf block
            if (spilled(base_slot + words - 1))
                throw Error("register file exhausted: variable '" + st->name +
                            "' does not fit; reduce live variables");
            vi.slot = base_slot;
            for (const auto& lf : vi.leaves) {
                u32 slot = base_slot + lf.word;
                bool w = is_wide(lf.kind);
                Offset off = fresh_off(w);
                u32 rd = def_w(slot, kShuttleA);
                emit_li(rd, 0 + (w ? off.hi : off.lo));
                commit_w(slot, rd);
                if (w) {
                    u32 rl = def_w(slot + 1, kShuttleA);
                    emit_li(rl, 0 + off.lo);
                    commit_w(slot + 1, rl);
                }
                bind_reg_var(st->name + "." + lf.path, slot, off);
            }
            scopes_.back()[st->name] = std::move(vi);
            cur_->local_top = base_slot + words - cur_->base;
            cur_->tsp = cur_->base + cur_->local_top;
            return;
        }
        case ast::Type::K::Array:
        case ast::Type::K::Union: {
            MemObject* obj = new_object(st->name, t, cur_ == prologue_.get());
            VarInfo vi;
            vi.type = t;
            vi.obj = obj;
            scopes_.back()[st->name] = std::move(vi);
            if (cur_ != prologue_.get()) frames_.back().objects.push_back(obj);
            fill_object(obj);
            return;
        }
        default:
            throw Error("cannot declare a variable of this type");
        }
    }

    void compile_if(const ast::Stmt* st) {
        u32 lt = new_label(), lf = new_label(), lj = new_label();
        compile_cond(st->cond.get(), lt, lf);
        obf::OffsetDB db0 = db_;
        place(lt);
        push_scope();
        compile_stmts(st->body);
        pop_scope();
        JoinState after = capture_join("if-join");
        emit_b(lj);
        place(lf);
        db_ = db0;
        push_scope();
        compile_stmts(st->else_body);
        pop_scope();
        join_to(after);
        place(lj);
    }

    void compile_while(const ast::Stmt* st) {
        JoinState head_state = capture_join("loop-head");
        u32 head = new_label(), body_l = new_label(), exit_l = new_label();
        place(head);
        compile_cond(st->cond.get(), body_l, exit_l);
        place(body_l);
        push_scope();
        compile_stmts(st->body);
        pop_scope();
        join_to(head_state);
        emit_b(head);
        place(exit_l);
        join_to(head_state); // exit edge: verify, nothing should move
    }

    // ---------------- functions, instances, calls ----------------

    // Entry scheme for a top-level instance: every global register variable
    // (plus the shadow stack pointer) and every global stripe, at their
    // displacements as of the call edge.
    JoinState global_entry_state() {
        JoinState j;
        j.regs.label = "entry";
        for (const auto* e : vars_.effective()) {
            if (e->second.kind != Loc::Kind::Reg) continue;
            if (!global_names_.count(e->first)) continue;
            j.regs.entries.push_back({e->first, e->second, db_.at(e->second)});
        }
        for (const auto& [loc, off] : db_) {
            if (loc.kind != Loc::Kind::Stripe) continue;
            if (!objects_.at(loc.a)->global) continue;
            j.stripes.push_back({loc, off});
        }
        return j;
    }

    Instance* new_instance(const ast::Function* fn, bool interior, const JoinState* at) {
        auto inst = std::make_unique<Instance>();
        inst->fn = fn;
        inst->id = u32(instances_.size());
        inst->span = estimate_span(fn);
        inst->base = next_window_;
        next_window_ += inst->span;
        inst->ra_slot = inst->base;
        inst->interior = interior;
        inst->tsp = inst->base;
        inst->local_top = 1; // return-address save
        u32 at_slot = inst->base + 1;
        for (const auto& p : fn->params) {
            u32 w = ast::word_count(p.type);
            if (w == 2 && at_slot == obf::kSprBound - 1) at_slot++;
            inst->param_slots.push_back(at_slot);
            inst->param_offs.push_back(fresh_off(w == 2));
            at_slot += w;
        }
        inst->local_top = at_slot - inst->base;
        inst->has_ret = fn->ret->kind == ast::Type::K::Basic;
        if (inst->has_ret) inst->ret_off = fresh_off(is_wide(fn->ret->basic));
        inst->entry = interior ? *at : global_entry_state();
        instances_.push_back(std::move(inst));
        return instances_.back().get();
    }

    void compile_instance(Instance* in) {
        Instance* save_cur = cur_;
        auto save_labels = std::move(labels_);
        labels_.clear();
        compile_stack_.push_back(in);
        cur_ = in;
        in->tsp = in->base + in->local_top;
        in->hwm = in->tsp;

        // stow the link register
        u32 rd = def_w(in->ra_slot, kShuttleA);
        emit(isa::Opcode::mov, rd, kRaReg);
        commit_w(in->ra_slot, rd);

        push_scope();
        for (size_t i = 0; i < in->fn->params.size(); ++i) {
            const auto& p = in->fn->params[i];
            bind_reg_var(p.name, in->param_slots[i], in->param_offs[i]);
            VarInfo vi;
            vi.type = p.type;
            vi.slot = in->param_slots[i];
            scopes_.back()[p.name] = std::move(vi);
        }
        compile_stmts(in->fn->body);
        emit_exit(std::nullopt); // fall-off: a missing return yields zero
        pop_scope();

        finalize_labels(in);
        if (in->hwm > in->base + in->span)
            throw Error("internal: window overflow in '" + in->fn->name + "'");
        labels_ = std::move(save_labels);
        compile_stack_.pop_back();
        cur_ = save_cur;
    }

    void emit_exit(const std::optional<Val>& v) {
        join_to(cur_->entry);
        if (cur_->has_ret) {
            const Offset& r = cur_->ret_off;
            if (r.wide) {
                if (v) {
                    u32 pv = use_p(v->slot, kShuttleB);
                    emit_addi2(kRetReg, pv, r.hi - v->off.hi, r.lo - v->off.lo);
                } else {
                    emit_li(kRetReg, 0 + r.hi);
                    emit_li(kRetReg + 1, 0 + r.lo);
                }
            } else {
                if (v) {
                    u32 pv = use_w(v->slot, kShuttleB);
                    emit_addi(kRetReg, pv, r.lo - v->off.lo);
                } else {
                    emit_li(kRetReg, 0 + r.lo);
                }
            }
        }
        u32 pr = use_w(cur_->ra_slot, kShuttleA);
        emit(isa::Opcode::mov, kRaReg, pr);
        emit(isa::Opcode::jr);
    }

    Instance* find_ancestor(const ast::Function* fn) {
        for (auto it = compile_stack_.rbegin(); it != compile_stack_.rend(); ++it)
            if ((*it)->fn == fn) return *it;
        return nullptr;
    }

    void write_params(Instance* callee, const std::vector<Val>& args) {
        for (size_t i = 0; i < args.size(); ++i) {
            u32 preg = callee->param_slots[i];
            if (spilled(preg)) throw Error("internal: spilled parameter window");
            const Offset& po = callee->param_offs[i];
            if (args[i].wide()) {
                u32 pv = use_p(args[i].slot, kShuttleB);
                emit_addi2(preg, pv, po.hi - args[i].off.hi, po.lo - args[i].off.lo);
            } else {
                u32 pv = use_w(args[i].slot, kShuttleB);
                emit_addi(preg, pv, po.lo - args[i].off.lo);
            }
        }
    }

    void compile_call(const ast::Stmt* st) {
        std::vector<Val> args;
        args.reserve(st->args.size());
        for (const auto& a : st->args) args.push_back(compile_expr(a.get()));

        Instance* interior = find_interior(st->name);
        const ast::Function* fn =
            interior ? interior->fn : prog_.find_function(st->name);
        if (!fn) throw Error("call to unknown function '" + st->name + "'");
        Instance* callee = nullptr;

        if (Instance* anc = find_ancestor(fn)) {
            compile_ancestor_call(anc, args);
            callee = anc;
        } else if (interior) {
            join_to(interior->entry);
            write_params(interior, args);
            emit_jal(interior->id);
            callee = interior;
        } else {
            callee = new_instance(fn, false, nullptr);
            write_params(callee, args);
            emit_jal(callee->id);
            compile_instance(callee);
        }

        if (st->target) {
            if (st->target->kind != ast::Expr::K::Var)
                throw Error("internal: call target is not a variable");
            if (!callee->has_ret) throw Error("void call cannot produce a value");
            Place p = resolve_place(st->target.get());
            Offset nd = fresh_off(callee->ret_off.wide);
            if (callee->ret_off.wide) {
                u32 rd = def_w(p.slot, kShuttleA);
                emit_addi2(rd, kRetReg, nd.hi - callee->ret_off.hi,
                           nd.lo - callee->ret_off.lo);
                commit_p(p.slot, rd);
            } else {
                u32 rd = def_w(p.slot, kShuttleA);
                emit_addi(rd, kRetReg, nd.lo - callee->ret_off.lo);
                commit_w(p.slot, rd);
            }
            db_.set(Loc::reg(p.slot), nd);
        }
    }

    // Re-enter an active instance: park the whole register span above its
    // window base on the shadow stack, re-enter on the entry scheme, then
    // put the world back.
    void compile_ancestor_call(Instance* anc, const std::vector<Val>& args) {
        if (cur_->tsp > obf::kSprBound)
            throw Error("recursive call with spilled temporaries live; simplify the "
                        "expression around the call");
        u32 lo = anc->base, hi = next_window_;
        u32 n = hi - lo;
        Offset sp_cur = db_.at(Loc::reg(kSpReg));
        // park registers at [sp, sp+n)
        for (u32 k = 0; k < n; ++k) {
            u32 pv = use_w(lo + k, kShuttleA);
            emit(isa::Opcode::sw, kSpReg, pv).consts.emplace_back(cw(k - sp_cur.lo));
        }
        // advance the stack pointer
        u32 db2 = fresh();
        Offset sp_new = fresh_word();
        emit_li(kShuttleA, n + db2);
        emit(isa::Opcode::add, kSpReg, kSpReg, kShuttleA)
            .consts.emplace_back(cw(sp_new.lo - sp_cur.lo - db2));
        db_.set(Loc::reg(kSpReg), sp_new);
        join_to(anc->entry);
        write_params(anc, args);
        emit_jal(anc->id);
        // back: the callee exit pinned everything in its entry scheme
        Offset sp_ret = db_.at(Loc::reg(kSpReg));
        for (u32 k = 0; k < n; ++k) {
            u32 rd = def_w(lo + k, kShuttleA);
            emit(isa::Opcode::lw, rd, kSpReg).consts.emplace_back(cw(k - n - sp_ret.lo));
            commit_w(lo + k, rd);
        }
        u32 db3 = fresh();
        Offset sp_back = fresh_word();
        emit_li(kShuttleA, n + db3);
        emit(isa::Opcode::sub, kSpReg, kSpReg, kShuttleA)
            .consts.emplace_back(cw(sp_back.lo - sp_ret.lo + db3));
        db_.set(Loc::reg(kSpReg), sp_back);
    }

    void compile_interior_def(const ast::Stmt* st) {
        auto it = labels_.find(st->name);
        if (it == labels_.end() || it->second.fn_label)
            throw Error("interior function '" + st->name + "' lacks its label");
        it->second.fn_label = true;
        Instance* inst = new_instance(st->fn.get(), true, &it->second.join);
        interior_scopes_.back()[st->name] = inst;
        // compile against the label-point scheme, then restore the present
        obf::OffsetDB db_save = db_;
        for (const auto& e : inst->entry.regs.entries) db_.set(e.loc, e.off);
        for (const auto& [loc, off] : inst->entry.stripes) db_.set(loc, off);
        compile_instance(inst);
        db_ = std::move(db_save);
    }

    // ---------------- program assembly ----------------

    void build_prologue() {
        prologue_ = std::make_unique<Instance>();
        prologue_->span = 1u << 16; // effectively uncapped for the global window
        prologue_->base = next_window_;
        prologue_->tsp = next_window_;
        prologue_->local_top = 0;
        cur_ = prologue_.get();

        // shadow stack pointer
        Offset sp0 = fresh_word();
        emit_li(kSpReg, kSpInitAddr + sp0.lo);
        vars_.bind("$sp", Loc::reg(kSpReg));
        db_.set(Loc::reg(kSpReg), sp0);
        global_names_.insert("$sp");

        // output slots: fixed displacements for the run's whole lifetime
        collect_emit_kinds();
        for (size_t i = 0; i < emit_kinds_.size(); ++i) {
            bool w = is_wide(emit_kinds_[i]);
            u32 reg = push(w ? 2 : 1);
            if (spilled(reg)) throw Error("too many output slots");
            Offset d = fresh_off(w);
            emit_li(reg, 0 + (w ? d.hi : d.lo));
            if (w) emit_li(reg + 1, 0 + d.lo);
            emit_regs_.push_back(reg);
            emit_offs_.push_back(d);
            prologue_->local_top = reg + (w ? 2 : 1) - prologue_->base;
        }

        // globals, in declaration order
        frames_.push_back({vars_.mark(), {}, {}});
        for (const auto& g : prog_.globals) {
            cur_->tsp = prologue_->base + prologue_->local_top;
            compile_decl(g.get());
        }
        frames_.pop_back(); // globals never die; drop the bookkeeping only
        for (const auto& g : prog_.globals) global_names_.insert(g->name);
        // struct globals bind their leaves under dotted names
        for (const auto& g : prog_.globals)
            if (g->decl_type->kind == ast::Type::K::Struct) {
                VarInfo* vi = find_var(g->name);
                for (const auto& lf : vi->leaves)
                    global_names_.insert(g->name + "." + lf.path);
            }
        next_window_ = std::max(next_window_, prologue_->hwm);
        next_window_ = std::max(next_window_, prologue_->base + prologue_->local_top);
    }

    void collect_emit_kinds() {
        emit_kinds_.assign(size_t(prog_.emit_slots), BasicKind::Int);
        auto walk = [&](auto&& self, const std::vector<ast::StmtPtr>& body) -> void {
            for (const auto& st : body) {
                if (st->kind == ast::Stmt::K::Emit && st->emit_slot >= 0)
                    emit_kinds_.at(size_t(st->emit_slot)) = st->decl_type->basic;
                if (st->kind == ast::Stmt::K::InteriorFn) self(self, st->fn->body);
                self(self, st->body);
                self(self, st->else_body);
            }
        };
        for (const auto& f : prog_.functions) walk(walk, f->body);
    }

    void assemble(isa::ObjectCode& obj) {
        u32 pc = 0;
        prologue_->start_pc = pc;
        pc += u32(prologue_->code.size());
        for (auto& in : instances_) {
            in->start_pc = pc;
            pc += u32(in->code.size());
        }
        u32 total = pc;
        auto flush = [&](Instance* in) {
            for (auto [idx, inst_id] : in->jal_fixups)
                in->code[idx].jump = i32(instances_.at(inst_id)->start_pc);
            for (u32 idx : in->halt_fixups) in->code[idx].jump = i32(total);
            for (auto& ins : in->code) obj.instructions.push_back(std::move(ins));
        };
        flush(prologue_.get());
        for (auto& in : instances_) flush(in.get());
        obj.entry = 0;
        for (size_t i = 0; i < obj.instructions.size(); ++i)
            isa::validate_instruction(obj.instructions[i], i, obj.instructions.size());
    }

    void build_schedule(isa::IoSchedule& sched, Instance* mi) {
        sched.seed = seed_;
        for (size_t i = 0; i < mi->fn->params.size(); ++i) {
            isa::IoEntry e;
            e.name = mi->fn->params[i].name;
            e.input = true;
            e.pair = ast::word_count(mi->fn->params[i].type) == 2;
            e.loc = mi->param_slots[i];
            e.delta_hi = mi->param_offs[i].hi;
            e.delta_lo = mi->param_offs[i].lo;
            sched.entries.push_back(std::move(e));
        }
        if (mi->has_ret) {
            isa::IoEntry e;
            e.name = "ret";
            e.input = false;
            e.pair = mi->ret_off.wide;
            e.loc = kRetReg;
            e.delta_hi = mi->ret_off.hi;
            e.delta_lo = mi->ret_off.lo;
            sched.entries.push_back(std::move(e));
        }
        for (size_t i = 0; i < emit_regs_.size(); ++i) {
            isa::IoEntry e;
            e.name = "emit" + std::to_string(i);
            e.input = false;
            e.pair = is_wide(emit_kinds_[i]);
            e.loc = emit_regs_[i];
            e.delta_hi = emit_offs_[i].hi;
            e.delta_lo = emit_offs_[i].lo;
            sched.entries.push_back(std::move(e));
        }
    }

    // ---------------- members ----------------

    const ast::Program& prog_;
    const cipher::CipherContext& ctx_;
    u64 seed_;
    obf::Rng rng_;

    obf::OffsetDB db_;
    obf::VarBinding vars_;
    std::vector<std::map<std::string, VarInfo>> scopes_;
    std::vector<std::map<std::string, Instance*>> interior_scopes_;
    std::vector<ScopeFrame> frames_;
    std::set<std::string> global_names_;
    std::vector<std::unique_ptr<MemObject>> objects_;

    std::unique_ptr<Instance> prologue_;
    std::vector<std::unique_ptr<Instance>> instances_;
    std::vector<Instance*> compile_stack_;
    Instance* cur_ = nullptr;
    u32 next_window_ = kFirstAllocReg;

    std::map<std::string, LabelCtl> labels_;
    std::vector<BasicKind> emit_kinds_;
    std::vector<u32> emit_regs_;
    std::vector<Offset> emit_offs_;

    std::string mem_path_;

    CompileStats stats_;
};

} // namespace detail

using detail::Compiler;

// Compile a checked program under one displacement seed. The context only
// encrypts; byte-identical output for equal (program, seed, context state)
// is part of the contract.
inline CompileResult compile(const ast::Program& prog, const cipher::CipherContext& ctx,
                             u64 seed) {
    detail::Compiler c(prog, ctx, seed);
    return c.run();
}

} // namespace fxa::codegen
