// Copyright (c) fxacc contributors
// SPDX-License-Identifier: Apache-2.0
//
// Abstract syntax for the supported C subset, shared by the type checker,
// the plaintext interpreter and the code generator.
//
// The tree the parser hands out is already partly normalized:
//   - unary minus is (0 - e), logical not is (e == 0)
//   - a % b is a - (a / b) * b
//   - for loops are while loops
// The type checker then inserts explicit Cast nodes for every implicit
// promotion or conversion and hoists calls out of expressions, so downstream
// consumers see side-effect-free expressions and statement-level calls only.
#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fxa/common.hpp"

namespace fxa::ast {

// The 13 basic types. long is a 32-bit word here (the target is a 32-bit
// word machine); long long is the two-word type.
enum class BasicKind : u8 {
    Bool,
    Char,
    UChar,
    Short,
    UShort,
    Int,
    UInt,
    Long,
    ULong,
    LongLong,
    ULongLong,
    Float,
    Double,
};

inline bool is_float_kind(BasicKind k) {
    return k == BasicKind::Float || k == BasicKind::Double;
}
inline bool is_wide_kind(BasicKind k) {
    return k == BasicKind::LongLong || k == BasicKind::ULongLong ||
           k == BasicKind::Double;
}
inline bool is_signed_kind(BasicKind k) {
    switch (k) {
    case BasicKind::Char:
    case BasicKind::Short:
    case BasicKind::Int:
    case BasicKind::Long:
    case BasicKind::LongLong:
        return true;
    default:
        return false;
    }
}
// bit width of the integer types (0 for float/double)
inline int int_width(BasicKind k) {
    switch (k) {
    case BasicKind::Bool: return 1;
    case BasicKind::Char:
    case BasicKind::UChar: return 8;
    case BasicKind::Short:
    case BasicKind::UShort: return 16;
    case BasicKind::Int:
    case BasicKind::UInt:
    case BasicKind::Long:
    case BasicKind::ULong: return 32;
    case BasicKind::LongLong:
    case BasicKind::ULongLong: return 64;
    default: return 0;
    }
}

inline const char* basic_name(BasicKind k) {
    switch (k) {
    case BasicKind::Bool: return "_Bool";
    case BasicKind::Char: return "char";
    case BasicKind::UChar: return "unsigned char";
    case BasicKind::Short: return "short";
    case BasicKind::UShort: return "unsigned short";
    case BasicKind::Int: return "int";
    case BasicKind::UInt: return "unsigned int";
    case BasicKind::Long: return "long";
    case BasicKind::ULong: return "unsigned long";
    case BasicKind::LongLong: return "long long";
    case BasicKind::ULongLong: return "unsigned long long";
    case BasicKind::Float: return "float";
    case BasicKind::Double: return "double";
    }
    return "?";
}

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct StructField {
    std::string name; // empty for an anonymous struct member inside a union
    TypePtr type;
};

struct Type {
    enum class K : u8 { Basic, Array, Pointer, Struct, Union, Void } kind;

    BasicKind basic = BasicKind::Int; // K::Basic

    TypePtr elem; // K::Array element type
    u32 len = 0;  // K::Array length

    std::string into; // K::Pointer: name of the restrict array pointed into
    TypePtr pointee;  // K::Pointer: element type of that array

    std::string tag;                 // struct/union tag, may be empty
    std::vector<StructField> fields; // K::Struct / K::Union members
};

inline TypePtr make_basic(BasicKind k) {
    auto t = std::make_shared<Type>();
    t->kind = Type::K::Basic;
    t->basic = k;
    return t;
}
inline TypePtr make_void() {
    auto t = std::make_shared<Type>();
    t->kind = Type::K::Void;
    return t;
}
inline TypePtr make_array(TypePtr elem, u32 len) {
    auto t = std::make_shared<Type>();
    t->kind = Type::K::Array;
    t->elem = std::move(elem);
    t->len = len;
    return t;
}
inline TypePtr make_pointer(std::string into, TypePtr pointee) {
    auto t = std::make_shared<Type>();
    t->kind = Type::K::Pointer;
    t->into = std::move(into);
    t->pointee = std::move(pointee);
    return t;
}

inline bool type_equal(const TypePtr& a, const TypePtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case Type::K::Void: return true;
    case Type::K::Basic: return a->basic == b->basic;
    case Type::K::Array:
        return a->len == b->len && type_equal(a->elem, b->elem);
    case Type::K::Pointer:
        return a->into == b->into && type_equal(a->pointee, b->pointee);
    case Type::K::Struct:
    case Type::K::Union: {
        if (a->fields.size() != b->fields.size()) return false;
        for (size_t i = 0; i < a->fields.size(); ++i) {
            if (a->fields[i].name != b->fields[i].name) return false;
            if (!type_equal(a->fields[i].type, b->fields[i].type)) return false;
        }
        return true;
    }
    }
    return false;
}

// Number of 32-bit words a value of this type occupies when laid out in
// memory. 64-bit scalars take two words, hi half at the lower address.
inline u32 word_count(const TypePtr& t) {
    switch (t->kind) {
    case Type::K::Basic: return is_wide_kind(t->basic) ? 2 : 1;
    case Type::K::Array: return t->len * word_count(t->elem);
    case Type::K::Struct: {
        u32 n = 0;
        for (auto& f : t->fields) n += word_count(f.type);
        return n;
    }
    case Type::K::Union: {
        u32 n = 0;
        for (auto& f : t->fields) n = std::max(n, word_count(f.type));
        return n;
    }
    default: return 1;
    }
}

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

enum class BinOp : u8 { Add, Sub, Mul, Div, Lt, Gt, Le, Ge, Eq, Ne, LAnd, LOr };

inline bool is_comparison(BinOp op) {
    switch (op) {
    case BinOp::Lt:
    case BinOp::Gt:
    case BinOp::Le:
    case BinOp::Ge:
    case BinOp::Eq:
    case BinOp::Ne:
        return true;
    default:
        return false;
    }
}
inline const char* binop_name(BinOp op) {
    switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Lt: return "<";
    case BinOp::Gt: return ">";
    case BinOp::Le: return "<=";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::LAnd: return "&&";
    case BinOp::LOr: return "||";
    }
    return "?";
}

struct Expr {
    enum class K : u8 {
        IntLit,   // value (two's-complement bits), literal type
        FloatLit, // fval, literal type float or double
        Var,      // name
        Binary,   // op, lhs, rhs
        Cast,     // cast_to, lhs
        Index,    // lhs = array-or-pointer expr, rhs = index (pure)
        Deref,    // lhs = pointer expr
        Field,    // lhs = struct-valued expr, field name
        Call,     // callee name, args; hoisted to statements by typecheck
    } kind;

    // literals
    u64 value = 0;
    double fval = 0.0;

    std::string name; // Var, Field (field name), Call (callee)
    BinOp op = BinOp::Add;
    ExprPtr lhs, rhs;
    std::vector<ExprPtr> args;

    TypePtr cast_to;

    // filled by the type checker
    TypePtr type;

    int line = 0, col = 0;
};

inline ExprPtr make_int_lit(u64 v, TypePtr t, int line = 0, int col = 0) {
    auto e = std::make_unique<Expr>();
    e->kind = Expr::K::IntLit;
    e->value = v;
    e->type = std::move(t);
    e->line = line;
    e->col = col;
    return e;
}

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;
struct Function;

struct Stmt {
    enum class K : u8 {
        Decl,       // type name [= init]
        Assign,     // target = value
        If,         // cond, then_body, else_body
        While,      // cond, body
        Block,      // body
        Goto,       // name
        LabelDecl,  // __label__ name
        Label,      // name:
        Return,     // optional value
        Emit,       // emit(value)
        Call,       // [target =] callee(args) as a statement
        ExprStmt,   // evaluate and discard
        InteriorFn, // nested function definition
    } kind;

    TypePtr decl_type;
    std::string name; // Decl/Goto/LabelDecl/Label var or label; Call callee

    ExprPtr target; // Assign/Call: lvalue expression (Var/Index/Deref/Field)
    ExprPtr value;  // Decl init, Assign value, Return, Emit, ExprStmt
    ExprPtr cond;
    std::vector<ExprPtr> args; // Call

    std::vector<StmtPtr> body;      // Block, While, If-then
    std::vector<StmtPtr> else_body; // If-else

    std::unique_ptr<Function> fn; // InteriorFn

    int line = 0, col = 0;

    // filled by the type checker on Emit: the output slot index
    int emit_slot = -1;
};

struct Param {
    TypePtr type;
    std::string name;
};

struct Function {
    TypePtr ret;
    std::string name;
    std::vector<Param> params;
    std::vector<StmtPtr> body;
    int line = 0, col = 0;
};

struct Program {
    // struct/union tag definitions, in declaration order
    std::vector<std::pair<std::string, TypePtr>> tags;
    std::vector<StmtPtr> globals; // Decl statements only
    std::vector<std::unique_ptr<Function>> functions;
    int emit_slots = 0; // filled by the type checker

    const Function* find_function(const std::string& n) const {
        for (auto& f : functions)
            if (f->name == n) return f.get();
        return nullptr;
    }
};

// ---- structural equality (used by the parse/print round-trip property) ----

inline bool expr_equal(const Expr* a, const Expr* b) {
    if (!a || !b) return a == b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case Expr::K::IntLit:
        return a->value == b->value && type_equal(a->type, b->type);
    case Expr::K::FloatLit:
        return a->fval == b->fval && type_equal(a->type, b->type);
    case Expr::K::Var: return a->name == b->name;
    case Expr::K::Binary:
        return a->op == b->op && expr_equal(a->lhs.get(), b->lhs.get()) &&
               expr_equal(a->rhs.get(), b->rhs.get());
    case Expr::K::Cast:
        return type_equal(a->cast_to, b->cast_to) &&
               expr_equal(a->lhs.get(), b->lhs.get());
    case Expr::K::Index:
    case Expr::K::Deref:
        return expr_equal(a->lhs.get(), b->lhs.get()) &&
               expr_equal(a->rhs.get(), b->rhs.get());
    case Expr::K::Field:
        return a->name == b->name && expr_equal(a->lhs.get(), b->lhs.get());
    case Expr::K::Call: {
        if (a->name != b->name || a->args.size() != b->args.size()) return false;
        for (size_t i = 0; i < a->args.size(); ++i)
            if (!expr_equal(a->args[i].get(), b->args[i].get())) return false;
        return true;
    }
    }
    return false;
}

inline bool stmt_equal(const Stmt* a, const Stmt* b);

inline bool stmt_list_equal(const std::vector<StmtPtr>& a,
                            const std::vector<StmtPtr>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!stmt_equal(a[i].get(), b[i].get())) return false;
    return true;
}

inline bool function_equal(const Function* a, const Function* b) {
    if (a->name != b->name || !type_equal(a->ret, b->ret)) return false;
    if (a->params.size() != b->params.size()) return false;
    for (size_t i = 0; i < a->params.size(); ++i)
        if (a->params[i].name != b->params[i].name ||
            !type_equal(a->params[i].type, b->params[i].type))
            return false;
    return stmt_list_equal(a->body, b->body);
}

inline bool stmt_equal(const Stmt* a, const Stmt* b) {
    if (!a || !b) return a == b;
    if (a->kind != b->kind) return false;
    if (a->name != b->name) return false;
    if (!type_equal(a->decl_type, b->decl_type)) return false;
    if (!expr_equal(a->target.get(), b->target.get())) return false;
    if (!expr_equal(a->value.get(), b->value.get())) return false;
    if (!expr_equal(a->cond.get(), b->cond.get())) return false;
    if (a->args.size() != b->args.size()) return false;
    for (size_t i = 0; i < a->args.size(); ++i)
        if (!expr_equal(a->args[i].get(), b->args[i].get())) return false;
    if (!stmt_list_equal(a->body, b->body)) return false;
    if (!stmt_list_equal(a->else_body, b->else_body)) return false;
    if (a->kind == Stmt::K::InteriorFn)
        return function_equal(a->fn.get(), b->fn.get());
    return true;
}

inline bool program_equal(const Program& a, const Program& b) {
    if (a.tags.size() != b.tags.size()) return false;
    for (size_t i = 0; i < a.tags.size(); ++i)
        if (a.tags[i].first != b.tags[i].first ||
            !type_equal(a.tags[i].second, b.tags[i].second))
            return false;
    if (!stmt_list_equal(a.globals, b.globals)) return false;
    if (a.functions.size() != b.functions.size()) return false;
    for (size_t i = 0; i < a.functions.size(); ++i)
        if (!function_equal(a.functions[i].get(), b.functions[i].get()))
            return false;
    return true;
}

} // namespace fxa::ast
