// Copyright (c) fxacc contributors
// SPDX-License-Identifier: Apache-2.0
//
// Plaintext reference interpreter. Runs the type-checked tree directly on
// plain words and produces the values an encrypted run must reproduce
// bit-for-bit: the main return value and every emit slot.
//
// Scalar representation: one u64 per value. 32-bit kinds live in the low
// word; char/short/_Bool are kept sign- or zero-extended to 32 bits, so all
// arithmetic can run at word width. float keeps its bit pattern in the low
// word, double and the long longs use all 64 bits. Aggregates are flat
// vectors of 32-bit words in the same layout the code generator stripes into
// machine memory (64-bit scalars: high word first), which makes union type
// punning agree between the two sides.
//
// Anything ISO C leaves undefined is pinned by fxa/plainops.hpp; genuinely
// erroneous programs (out-of-bounds indexing, runaway loops) raise
// OracleError rather than guessing what hardware would do. Integer division
// by zero throws TrapDivZero, the same trap the execution unit raises.
#pragma once

#include <map>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fxa/ast.hpp"
#include "fxa/common.hpp"
#include "fxa/plainops.hpp"

namespace fxa::oracle {

struct OracleError : Error {
    using Error::Error;
};

using ast::BasicKind;
using ast::BinOp;
using ast::Expr;
using ast::Function;
using ast::Program;
using ast::Stmt;
using ast::Type;
using ast::TypePtr;

// ---- scalar semantics ----

namespace sem {

inline bool is64(BasicKind k) { return ast::is_wide_kind(k); }

// canonicalize an integer value into the stored form of kind k
inline u64 canon_int(u64 v, BasicKind k) {
    switch (int_width(k)) {
    case 1: return v & 1;
    case 8:
        return ast::is_signed_kind(k)
                   ? u64(u32(i32(std::int8_t(v & 0xFF))))
                   : (v & 0xFF);
    case 16:
        return ast::is_signed_kind(k)
                   ? u64(u32(i32(std::int16_t(v & 0xFFFF))))
                   : (v & 0xFFFF);
    case 32: return v & 0xFFFFFFFFull;
    default: return v;
    }
}

// value of an integer-kind scalar widened to 64 bits per its signedness
inline u64 widen(u64 bits, BasicKind k) {
    if (is64(k)) return bits;
    return ast::is_signed_kind(k) ? plain::sext32(u32(bits)) : plain::zext32(u32(bits));
}

inline u64 convert(u64 bits, BasicKind from, BasicKind to) {
    using namespace plain;
    if (from == to) return bits;
    // source as a 64-bit integer or float
    if (to == BasicKind::Bool) {
        // _Bool gets "value != 0", not truncation
        if (from == BasicKind::Float) return cmp_f32(Rel::Ne, u32(bits), bits_of_f32(0.0f));
        if (from == BasicKind::Double) return cmp_f64(Rel::Ne, bits, bits_of_f64(0.0));
        return widen(bits, from) != 0 ? 1 : 0;
    }
    if (to == BasicKind::Float) {
        switch (from) {
        case BasicKind::Double: return f64_to_f32(bits);
        case BasicKind::LongLong: return i64_to_f32(bits);
        case BasicKind::ULongLong: return u64_to_f32(bits);
        case BasicKind::UInt:
        case BasicKind::ULong: return u32_to_f32(u32(bits));
        default: return i32_to_f32(u32(bits)); // narrow kinds are canonical 32-bit
        }
    }
    if (to == BasicKind::Double) {
        switch (from) {
        case BasicKind::Float: return f32_to_f64(u32(bits));
        case BasicKind::LongLong: return i64_to_f64(bits);
        case BasicKind::ULongLong: return u64_to_f64(bits);
        case BasicKind::UInt:
        case BasicKind::ULong: return u32_to_f64(u32(bits));
        default: return i32_to_f64(u32(bits));
        }
    }
    // integer target
    u64 wide;
    if (from == BasicKind::Float) wide = f32_to_w64(u32(bits));
    else if (from == BasicKind::Double) wide = f64_to_w64(bits);
    else wide = widen(bits, from);
    return canon_int(wide, to);
}

// arithmetic at the node's annotated kind; div-by-zero traps on integers
inline u64 binary(BinOp op, BasicKind k, u64 a, u64 b) {
    using namespace plain;
    switch (k) {
    case BasicKind::Float:
        switch (op) {
        case BinOp::Add: return fadd32(u32(a), u32(b));
        case BinOp::Sub: return fsub32(u32(a), u32(b));
        case BinOp::Mul: return fmul32(u32(a), u32(b));
        case BinOp::Div: return fdiv32(u32(a), u32(b));
        default: break;
        }
        break;
    case BasicKind::Double:
        switch (op) {
        case BinOp::Add: return fadd64(a, b);
        case BinOp::Sub: return fsub64(a, b);
        case BinOp::Mul: return fmul64(a, b);
        case BinOp::Div: return fdiv64(a, b);
        default: break;
        }
        break;
    case BasicKind::LongLong:
    case BasicKind::ULongLong:
        switch (op) {
        case BinOp::Add: return add64(a, b);
        case BinOp::Sub: return sub64(a, b);
        case BinOp::Mul: return mul64(a, b);
        case BinOp::Div:
            if (b == 0) throw TrapDivZero{};
            return k == BasicKind::LongLong ? sdiv64(a, b) : udiv64(a, b);
        default: break;
        }
        break;
    default: // 32-bit integer kinds
        switch (op) {
        case BinOp::Add: return add32(u32(a), u32(b));
        case BinOp::Sub: return sub32(u32(a), u32(b));
        case BinOp::Mul: return mul32(u32(a), u32(b));
        case BinOp::Div:
            if (u32(b) == 0) throw TrapDivZero{};
            return ast::is_signed_kind(k) ? sdiv32(u32(a), u32(b))
                                          : udiv32(u32(a), u32(b));
        default: break;
        }
        break;
    }
    throw Error("not an arithmetic operator");
}

inline plain::Rel rel_of(BinOp op) {
    switch (op) {
    case BinOp::Lt: return plain::Rel::Lt;
    case BinOp::Gt: return plain::Rel::Gt;
    case BinOp::Le: return plain::Rel::Le;
    case BinOp::Ge: return plain::Rel::Ge;
    case BinOp::Eq: return plain::Rel::Eq;
    case BinOp::Ne: return plain::Rel::Ne;
    default: throw Error("not a comparison");
    }
}

// comparison at the operands' common kind; result is 0 or 1
inline bool compare(BinOp op, BasicKind k, u64 a, u64 b) {
    using namespace plain;
    Rel r = rel_of(op);
    switch (k) {
    case BasicKind::Float: return cmp_f32(r, u32(a), u32(b));
    case BasicKind::Double: return cmp_f64(r, a, b);
    case BasicKind::LongLong: return cmp_i64(r, a, b);
    case BasicKind::ULongLong: return cmp_u64(r, a, b);
    default:
        return ast::is_signed_kind(k) ? cmp_i32(r, u32(a), u32(b))
                                      : cmp_u32(r, u32(a), u32(b));
    }
}

} // namespace sem

// ---- aggregate layout ----

namespace detail {

// word offset and type of a (possibly anonymous-nested) field
inline std::optional<std::pair<u32, TypePtr>>
field_offset(const Type& agg, const std::string& name) {
    u32 pos = 0;
    for (auto& f : agg.fields) {
        u32 here = agg.kind == Type::K::Union ? 0 : pos;
        if (f.name == name) return std::make_pair(here, f.type);
        if (f.name.empty() && (f.type->kind == Type::K::Struct ||
                               f.type->kind == Type::K::Union)) {
            if (auto inner = field_offset(*f.type, name))
                return std::make_pair(here + inner->first, inner->second);
        }
        pos += ast::word_count(f.type);
    }
    return std::nullopt;
}

} // namespace detail

// ---- runtime values ----

struct ArrayStore {
    std::vector<u32> words;
};

struct PtrVal {
    std::shared_ptr<ArrayStore> store; // null until bound
    BasicKind elem = BasicKind::Int;
    u32 elem_words = 1;
    u32 len = 0;   // in elements
    i64 index = 0; // in elements
};

struct Cell {
    enum class K : u8 { Scalar, Ptr, Words } kind = K::Scalar;
    u64 bits = 0;                      // Scalar
    PtrVal ptr;                        // Ptr
    std::shared_ptr<ArrayStore> words; // aggregate storage
    TypePtr type;
};

struct EmitVal {
    u64 bits = 0;
    BasicKind kind = BasicKind::Int;
};

struct RunResult {
    bool trapped = false;
    std::string trap;
    u64 ret_bits = 0;
    BasicKind ret_kind = BasicKind::Int;
    std::vector<EmitVal> emits;
    u64 steps = 0;
};

// ---- interpreter ----

namespace detail {

struct InteriorEntry {
    const Function* fn = nullptr;
    size_t decl_depth = 0; // visible frame scopes at declaration
};

struct Scope {
    std::map<std::string, Cell> vars;
    std::map<std::string, InteriorEntry> fns;
};

// hides scopes between an interior function's declaration point and its call
struct InteriorCtx {
    size_t base_depth;
    size_t entry_size;
};

struct Frame {
    std::vector<Scope> scopes;
    std::vector<InteriorCtx> ictx;
};

enum class Flow : u8 { Normal, Returned, Jump };

class Interp {
  public:
    Interp(const Program& prog, u64 budget) : prog_(prog), budget_(budget) {}

    RunResult run(const std::vector<u64>& inputs) {
        RunResult res;
        res.emits.assign(size_t(prog_.emit_slots), EmitVal{});
        collect_emit_kinds(res);
        const Function* main = prog_.find_function("main");
        if (!main) throw OracleError("program has no main function");
        if (inputs.size() != main->params.size())
            throw OracleError("main expects " +
                              std::to_string(main->params.size()) +
                              " inputs, got " + std::to_string(inputs.size()));
        emits_ = &res;
        globals_ = Scope{};
        for (auto& g : prog_.globals) {
            // globals live in one shared scope, initialized in order
            exec_decl(globals_, g.get());
        }
        try {
            std::vector<u64> args;
            for (size_t i = 0; i < inputs.size(); ++i)
                args.push_back(sem::canon_int(inputs[i], main->params[i].type->basic));
            // float inputs arrive as raw bit patterns
            for (size_t i = 0; i < inputs.size(); ++i)
                if (ast::is_float_kind(main->params[i].type->basic))
                    args[i] = ast::is_wide_kind(main->params[i].type->basic)
                                  ? inputs[i]
                                  : (inputs[i] & 0xFFFFFFFFull);
            res.ret_bits = call_function(main, args);
            res.ret_kind = main->ret->kind == Type::K::Basic ? main->ret->basic
                                                             : BasicKind::Int;
        } catch (const TrapDivZero&) {
            res.trapped = true;
            res.trap = "integer division by zero";
        }
        res.steps = steps_;
        return res;
    }

  private:
    const Program& prog_;
    u64 budget_;
    u64 steps_ = 0;
    RunResult* emits_ = nullptr;
    Scope globals_;
    // frames are pushed while references to outer frames are live
    // (interior bodies run on the declaring frame), so the container
    // must not relocate elements on growth
    std::deque<Frame> stack_;
    std::string jump_label_; // target while Flow::Jump is unwinding

    [[noreturn]] void die(const Stmt* st, const std::string& m) {
        throw OracleError("line " + std::to_string(st->line) + ": " + m);
    }
    [[noreturn]] void die(const Expr* e, const std::string& m) {
        throw OracleError("line " + std::to_string(e->line) + ": " + m);
    }

    void charge() {
        if (++steps_ > budget_) throw OracleError("step budget exceeded");
    }

    void collect_emit_kinds(RunResult& res) {
        // slot kinds were fixed by the checker; scan once for the table
        std::vector<const Stmt*> work;
        auto scan = [&](const std::vector<ast::StmtPtr>& body, auto&& self) -> void {
            for (auto& st : body) {
                if (st->kind == Stmt::K::Emit)
                    res.emits[size_t(st->emit_slot)].kind = st->decl_type->basic;
                self(st->body, self);
                self(st->else_body, self);
                if (st->fn) self(st->fn->body, self);
            }
        };
        for (auto& fn : prog_.functions) scan(fn->body, scan);
    }

    // ---- name resolution ----

    Cell* find_var(const std::string& name) {
        if (!stack_.empty()) { // empty while globals initialize
            Frame& f = stack_.back();
            size_t top = f.scopes.size();
            size_t hidden_hi = top, hidden_lo = top; // nothing hidden
            if (!f.ictx.empty()) {
                hidden_lo = f.ictx.back().base_depth;
                hidden_hi = f.ictx.back().entry_size;
            }
            for (size_t i = top; i-- > 0;) {
                if (i >= hidden_lo && i < hidden_hi) continue;
                auto it = f.scopes[i].vars.find(name);
                if (it != f.scopes[i].vars.end()) return &it->second;
            }
        }
        auto it = globals_.vars.find(name);
        if (it != globals_.vars.end()) return &it->second;
        return nullptr;
    }

    const InteriorEntry* find_interior(const std::string& name) {
        if (stack_.empty()) return nullptr;
        Frame& f = stack_.back();
        size_t top = f.scopes.size();
        size_t hidden_hi = top, hidden_lo = top;
        if (!f.ictx.empty()) {
            hidden_lo = f.ictx.back().base_depth;
            hidden_hi = f.ictx.back().entry_size;
        }
        for (size_t i = top; i-- > 0;) {
            if (i >= hidden_lo && i < hidden_hi) continue;
            auto it = f.scopes[i].fns.find(name);
            if (it != f.scopes[i].fns.end()) return &it->second;
        }
        return nullptr;
    }

    // ---- declarations ----

    void exec_decl(Scope& scope, const Stmt* st) {
        Cell c;
        c.type = st->decl_type;
        switch (st->decl_type->kind) {
        case Type::K::Basic:
            c.kind = Cell::K::Scalar;
            if (st->value) c.bits = eval(st->value.get());
            break;
        case Type::K::Pointer:
            c.kind = Cell::K::Ptr;
            if (st->value) c.ptr = eval_pointer(st->value.get());
            break;
        default:
            c.kind = Cell::K::Words;
            c.words = std::make_shared<ArrayStore>();
            c.words->words.assign(ast::word_count(st->decl_type), 0);
            break;
        }
        scope.vars[st->name] = std::move(c);
    }

    // ---- places (lvalues) ----

    struct Place {
        Cell* cell = nullptr;        // scalar or pointer cell, or
        ArrayStore* store = nullptr; // aggregate words
        u32 off = 0;
        BasicKind kind = BasicKind::Int;
        TypePtr type;
    };

    u64 load(const Place& p) {
        if (p.cell) return p.cell->bits;
        if (sem::is64(p.kind))
            return plain::make64(p.store->words[p.off], p.store->words[p.off + 1]);
        return plain::zext32(p.store->words[p.off]);
    }

    void store(const Place& p, u64 bits) {
        if (p.cell) {
            p.cell->bits = bits;
            return;
        }
        if (sem::is64(p.kind)) {
            p.store->words[p.off] = plain::hi32(bits);
            p.store->words[p.off + 1] = plain::lo32(bits);
        } else {
            p.store->words[p.off] = plain::lo32(bits);
        }
    }

    Place resolve(const Expr* e) {
        switch (e->kind) {
        case Expr::K::Var: {
            Cell* c = find_var(e->name);
            if (!c) die(e, "unbound variable '" + e->name + "'");
            Place p;
            p.type = c->type;
            if (c->kind == Cell::K::Scalar || c->kind == Cell::K::Ptr) {
                p.cell = c;
                if (c->type->kind == Type::K::Basic) p.kind = c->type->basic;
            } else {
                p.store = c->words.get();
                p.off = 0;
            }
            return p;
        }
        case Expr::K::Index: {
            u64 ixbits = eval(e->rhs.get());
            i64 ix = i64(i32(u32(ixbits)));
            const Expr* base = e->lhs.get();
            if (base->type->kind == Type::K::Pointer ||
                (base->type->kind == Type::K::Array &&
                 base->kind == Expr::K::Var &&
                 find_var(base->name)->kind == Cell::K::Ptr)) {
                PtrVal pv = eval_pointer(base);
                return deref_place(e, pv, ix);
            }
            // array place (possibly a member)
            Place ap = resolve(base);
            if (!ap.store) die(e, "not an addressable array");
            const Type& at = *ap.type;
            if (at.kind != Type::K::Array) die(e, "indexing a non-array");
            if (ix < 0 || u64(ix) >= at.len)
                die(e, "index " + std::to_string(ix) + " out of bounds for " +
                           std::to_string(at.len) + " elements");
            Place p;
            p.store = ap.store;
            p.off = ap.off + u32(ix) * ast::word_count(at.elem);
            p.type = at.elem;
            if (at.elem->kind == Type::K::Basic) p.kind = at.elem->basic;
            return p;
        }
        case Expr::K::Deref: {
            PtrVal pv = eval_pointer(e->lhs.get());
            return deref_place(e, pv, 0);
        }
        case Expr::K::Field: {
            Place base = resolve(e->lhs.get());
            if (!base.store) die(e, "field access on a non-aggregate place");
            auto hit = field_offset(*base.type, e->name);
            if (!hit) die(e, "no member named '" + e->name + "'");
            Place p;
            p.store = base.store;
            p.off = base.off + hit->first;
            p.type = hit->second;
            if (hit->second->kind == Type::K::Basic) p.kind = hit->second->basic;
            return p;
        }
        default:
            die(e, "not an lvalue");
        }
    }

    Place deref_place(const Expr* at, const PtrVal& pv, i64 extra) {
        if (!pv.store) die(at, "pointer used before it was bound to its array");
        i64 ix = pv.index + extra;
        if (ix < 0 || u64(ix) >= pv.len)
            die(at, "pointer index " + std::to_string(ix) +
                        " out of bounds for " + std::to_string(pv.len) +
                        " elements");
        Place p;
        p.store = pv.store.get();
        p.off = u32(ix) * pv.elem_words;
        p.kind = pv.elem;
        p.type = ast::make_basic(pv.elem);
        return p;
    }

    // ---- expressions ----

    PtrVal eval_pointer(const Expr* e) {
        switch (e->kind) {
        case Expr::K::Var: {
            Cell* c = find_var(e->name);
            if (!c) die(e, "unbound variable '" + e->name + "'");
            if (c->kind == Cell::K::Ptr) return c->ptr;
            if (c->kind == Cell::K::Words &&
                c->type->kind == Type::K::Array) {
                // array decays to a pointer to its first element
                PtrVal pv;
                pv.store = c->words;
                pv.elem = c->type->elem->basic;
                pv.elem_words = ast::word_count(c->type->elem);
                pv.len = c->type->len;
                pv.index = 0;
                return pv;
            }
            die(e, "'" + e->name + "' is not a pointer");
        }
        case Expr::K::Binary: {
            // p + i / p - i / A + i
            PtrVal pv = eval_pointer(e->lhs->type &&
                                             (e->lhs->type->kind == Type::K::Pointer ||
                                              e->lhs->type->kind == Type::K::Array)
                                         ? e->lhs.get()
                                         : e->rhs.get());
            const Expr* iside = (e->lhs->type &&
                                 (e->lhs->type->kind == Type::K::Pointer ||
                                  e->lhs->type->kind == Type::K::Array))
                                    ? e->rhs.get()
                                    : e->lhs.get();
            i64 d = i64(i32(u32(eval(iside))));
            pv.index += e->op == BinOp::Sub ? -d : d;
            return pv;
        }
        default:
            die(e, "expected a pointer-valued expression");
        }
    }

    bool eval_cond(const Expr* e) {
        if (e->kind == Expr::K::Binary && e->op == BinOp::LAnd)
            return eval_cond(e->lhs.get()) && eval_cond(e->rhs.get());
        if (e->kind == Expr::K::Binary && e->op == BinOp::LOr)
            return eval_cond(e->lhs.get()) || eval_cond(e->rhs.get());
        if (e->kind == Expr::K::Binary && ast::is_comparison(e->op)) {
            BasicKind ck = e->lhs->type->basic;
            u64 a = eval(e->lhs.get());
            u64 b = eval(e->rhs.get());
            return sem::compare(e->op, ck, a, b);
        }
        return eval(e) != 0;
    }

    u64 eval(const Expr* e) {
        switch (e->kind) {
        case Expr::K::IntLit:
            return sem::canon_int(e->value, e->type->basic);
        case Expr::K::FloatLit:
            return e->type->basic == BasicKind::Float
                       ? plain::bits_of_f32(float(e->fval))
                       : plain::bits_of_f64(e->fval);
        case Expr::K::Var:
        case Expr::K::Index:
        case Expr::K::Deref:
        case Expr::K::Field:
            return load(resolve(e));
        case Expr::K::Cast: {
            u64 v = eval(e->lhs.get());
            return sem::convert(v, e->lhs->type->basic, e->cast_to->basic);
        }
        case Expr::K::Binary: {
            if (e->op == BinOp::LAnd || e->op == BinOp::LOr ||
                ast::is_comparison(e->op))
                return eval_cond(e) ? 1 : 0;
            u64 a = eval(e->lhs.get());
            u64 b = eval(e->rhs.get());
            return sem::binary(e->op, e->type->basic, a, b);
        }
        case Expr::K::Call:
            die(e, "call was not hoisted to a statement");
        }
        throw Error("unreachable");
    }

    // ---- calls ----

    u64 call_function(const Function* fn, const std::vector<u64>& args) {
        if (stack_.size() >= 256) throw OracleError("call depth exceeded");
        stack_.emplace_back();
        Frame& f = stack_.back();
        f.scopes.emplace_back();
        for (size_t i = 0; i < fn->params.size(); ++i) {
            Cell c;
            c.kind = Cell::K::Scalar;
            c.type = fn->params[i].type;
            c.bits = args[i];
            f.scopes.back().vars[fn->params[i].name] = std::move(c);
        }
        u64 ret = 0;
        exec_body(const_cast<std::vector<ast::StmtPtr>&>(fn->body), ret);
        stack_.pop_back();
        return ret;
    }

    u64 call_interior(const InteriorEntry& ent, const std::vector<u64>& args) {
        Frame& f = stack_.back();
        f.ictx.push_back({ent.decl_depth, f.scopes.size()});
        f.scopes.emplace_back();
        for (size_t i = 0; i < ent.fn->params.size(); ++i) {
            Cell c;
            c.kind = Cell::K::Scalar;
            c.type = ent.fn->params[i].type;
            c.bits = args[i];
            f.scopes.back().vars[ent.fn->params[i].name] = std::move(c);
        }
        u64 ret = 0;
        exec_body(const_cast<std::vector<ast::StmtPtr>&>(ent.fn->body), ret);
        f.scopes.pop_back();
        f.ictx.pop_back();
        return ret;
    }

    // runs a function body; the parameter scope is already in place
    void exec_body(std::vector<ast::StmtPtr>& body, u64& ret) {
        Flow fl = exec_block(body, ret, /*own_scope=*/false);
        if (fl == Flow::Jump)
            throw OracleError("goto to label '" + jump_label_ +
                              "' escaped its function");
        // falling off the end returns zero (the result cell starts at 0)
        if (fl == Flow::Normal) ret = 0;
    }

    Flow exec_block(std::vector<ast::StmtPtr>& body, u64& ret, bool own_scope) {
        Frame& f = stack_.back();
        if (own_scope) f.scopes.emplace_back();
        size_t scope_mark = f.scopes.size();
        Flow fl = Flow::Normal;
        size_t i = 0;
        while (i < body.size()) {
            fl = exec_stmt(body[i].get(), ret);
            if (fl == Flow::Jump) {
                // a label in this block absorbs the jump
                bool found = false;
                for (size_t j = 0; j < body.size(); ++j) {
                    if (body[j]->kind == Stmt::K::Label &&
                        body[j]->name == jump_label_) {
                        i = j + 1;
                        found = true;
                        break;
                    }
                }
                if (found) {
                    fl = Flow::Normal;
                    continue;
                }
                break; // propagate to the enclosing block
            }
            if (fl == Flow::Returned) break;
            ++i;
        }
        while (f.scopes.size() > scope_mark) f.scopes.pop_back();
        if (own_scope) f.scopes.pop_back();
        return fl;
    }

    Flow exec_stmt(Stmt* st, u64& ret) {
        charge();
        switch (st->kind) {
        case Stmt::K::Decl:
            exec_decl(stack_.back().scopes.back(), st);
            return Flow::Normal;
        case Stmt::K::Assign: {
            if (st->target->type->kind == Type::K::Pointer) {
                Cell* c = find_var(st->target->name);
                c->ptr = eval_pointer(st->value.get());
                return Flow::Normal;
            }
            u64 v = eval(st->value.get());
            store(resolve(st->target.get()), v);
            return Flow::Normal;
        }
        case Stmt::K::If: {
            if (eval_cond(st->cond.get()))
                return exec_block(st->body, ret, true);
            return exec_block(st->else_body, ret, true);
        }
        case Stmt::K::While: {
            while (true) {
                charge();
                if (!eval_cond(st->cond.get())) return Flow::Normal;
                Flow fl = exec_block(st->body, ret, true);
                if (fl != Flow::Normal) return fl;
            }
        }
        case Stmt::K::Block:
            return exec_block(st->body, ret, true);
        case Stmt::K::Goto:
            jump_label_ = st->name;
            return Flow::Jump;
        case Stmt::K::LabelDecl:
        case Stmt::K::Label:
            return Flow::Normal;
        case Stmt::K::Return:
            ret = st->value ? eval(st->value.get()) : 0;
            return Flow::Returned;
        case Stmt::K::Emit: {
            u64 v = eval(st->value.get());
            auto& slot = emits_->emits[size_t(st->emit_slot)];
            slot.bits = v;
            slot.kind = st->decl_type->basic;
            return Flow::Normal;
        }
        case Stmt::K::Call: {
            std::vector<u64> args;
            for (auto& a : st->args) args.push_back(eval(a.get()));
            u64 r;
            if (const InteriorEntry* ent = find_interior(st->name)) {
                r = call_interior(*ent, args);
            } else {
                const Function* fn = prog_.find_function(st->name);
                if (!fn) die(st, "unknown function '" + st->name + "'");
                r = call_function(fn, args);
            }
            if (st->target) store(resolve(st->target.get()), r);
            return Flow::Normal;
        }
        case Stmt::K::ExprStmt:
            eval(st->value.get());
            return Flow::Normal;
        case Stmt::K::InteriorFn: {
            Frame& f = stack_.back();
            InteriorEntry ent;
            ent.fn = st->fn.get();
            ent.decl_depth = f.scopes.size();
            f.scopes.back().fns[st->name] = ent;
            return Flow::Normal;
        }
        }
        throw Error("unreachable");
    }
};

} // namespace detail

// Interprets a type-checked program on plain words. `inputs` are the main
// parameters as canonical bit patterns; float inputs pass their IEEE bits.
inline RunResult run(const Program& prog, const std::vector<u64>& inputs,
                     u64 budget = 10'000'000) {
    detail::Interp in(prog, budget);
    return in.run(inputs);
}

} // namespace fxa::oracle
