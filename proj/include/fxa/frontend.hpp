// Copyright (c) fxacc contributors
// SPDX-License-Identifier: Apache-2.0
//
// Lexer, recursive-descent parser, pretty printer and type checker for the
// C subset. parse() produces a normalized tree (see ast.hpp); typecheck()
// annotates every expression with its type, inserts explicit Cast nodes for
// the integer promotions and usual arithmetic conversions, hoists calls out
// of expressions to statement level, and enforces the label and restrict
// pointer rules. Excluded C features are reported with targeted diagnostics.
#pragma once

#include <cctype>
#include <cstdlib>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "fxa/ast.hpp"
#include "fxa/common.hpp"

namespace fxa::frontend {

using namespace fxa::ast;

struct CompileError : Error {
    using Error::Error;
};

namespace detail {

[[noreturn]] inline void fail(const std::string& file, int line, int col,
                              const std::string& msg) {
    std::ostringstream os;
    os << file << ":" << line << ":" << col << ": " << msg;
    throw CompileError(os.str());
}

enum class Tok : u8 {
    Eof, Ident, IntLit, FloatLit,
    LParen, RParen, LBrace, RBrace, LBracket, RBracket,
    Semi, Comma, Colon, Dot, Assign,
    Plus, Minus, Star, Slash, Percent,
    Lt, Gt, Le, Ge, EqEq, Ne, AmpAmp, PipePipe, Bang,
    Amp, Pipe, Caret, Tilde, Shl, Shr, Question, Ellipsis,
    KwChar, KwShort, KwInt, KwLong, KwFloat, KwDouble, KwBool, KwVoid,
    KwSigned, KwUnsigned, KwStruct, KwUnion, KwRestrict,
    KwIf, KwElse, KwWhile, KwFor, KwGoto, KwReturn, KwLabel,
    KwUnsupported, // switch/break/continue/...: rejected with a message
};

struct Token {
    Tok kind = Tok::Eof;
    std::string text;
    u64 ival = 0;
    double fval = 0;
    BasicKind lit_type = BasicKind::Int;
    int line = 1, col = 1;
};

class Lexer {
  public:
    Lexer(std::string src, std::string file)
        : src_(std::move(src)), file_(std::move(file)) {
        next_char();
        advance();
    }

    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }
    const std::string& file() const { return file_; }

  private:
    std::string src_;
    std::string file_;
    size_t pos_ = 0;
    int ch_ = EOF;
    int line_ = 1, col_ = 0;
    Token tok_;

    [[noreturn]] void err(const std::string& m) { fail(file_, line_, col_, m); }

    void next_char() {
        if (pos_ >= src_.size()) {
            ch_ = EOF;
            ++col_;
            return;
        }
        ch_ = u8(src_[pos_++]);
        if (ch_ == '\n') {
            ++line_;
            col_ = 0;
        } else {
            ++col_;
        }
    }

    void skip_space_and_comments() {
        while (true) {
            while (ch_ != EOF && std::isspace(ch_)) next_char();
            if (ch_ == '/' && pos_ < src_.size() && src_[pos_] == '/') {
                while (ch_ != EOF && ch_ != '\n') next_char();
                continue;
            }
            if (ch_ == '/' && pos_ < src_.size() && src_[pos_] == '*') {
                next_char();
                next_char();
                while (true) {
                    if (ch_ == EOF) err("unterminated comment");
                    if (ch_ == '*' && pos_ < src_.size() && src_[pos_] == '/') {
                        next_char();
                        next_char();
                        break;
                    }
                    next_char();
                }
                continue;
            }
            break;
        }
    }

    void advance() {
        skip_space_and_comments();
        tok_ = Token{};
        tok_.line = line_;
        tok_.col = col_;
        if (ch_ == EOF) {
            tok_.kind = Tok::Eof;
            return;
        }
        if (ch_ == '"') err("string literals are not supported");
        if (ch_ == '#') err("preprocessor directives are not supported");
        if (std::isalpha(ch_) || ch_ == '_') {
            std::string id;
            while (ch_ != EOF && (std::isalnum(ch_) || ch_ == '_')) {
                id += char(ch_);
                next_char();
            }
            tok_.text = id;
            tok_.kind = keyword(id);
            return;
        }
        if (std::isdigit(ch_) || (ch_ == '.' && pos_ < src_.size() &&
                                  std::isdigit(u8(src_[pos_])))) {
            lex_number();
            return;
        }
        if (ch_ == '\'') {
            lex_char();
            return;
        }
        lex_punct();
    }

    Tok keyword(const std::string& id) {
        if (id == "char") return Tok::KwChar;
        if (id == "short") return Tok::KwShort;
        if (id == "int") return Tok::KwInt;
        if (id == "long") return Tok::KwLong;
        if (id == "float") return Tok::KwFloat;
        if (id == "double") return Tok::KwDouble;
        if (id == "_Bool") return Tok::KwBool;
        if (id == "void") return Tok::KwVoid;
        if (id == "signed") return Tok::KwSigned;
        if (id == "unsigned") return Tok::KwUnsigned;
        if (id == "struct") return Tok::KwStruct;
        if (id == "union") return Tok::KwUnion;
        if (id == "restrict") return Tok::KwRestrict;
        if (id == "if") return Tok::KwIf;
        if (id == "else") return Tok::KwElse;
        if (id == "while") return Tok::KwWhile;
        if (id == "for") return Tok::KwFor;
        if (id == "goto") return Tok::KwGoto;
        if (id == "return") return Tok::KwReturn;
        if (id == "__label__") return Tok::KwLabel;
        if (id == "switch" || id == "case" || id == "default" ||
            id == "break" || id == "continue" || id == "do" ||
            id == "sizeof" || id == "typedef" || id == "static" ||
            id == "extern" || id == "enum" || id == "const" ||
            id == "volatile")
            return Tok::KwUnsupported;
        return Tok::Ident;
    }

    void lex_number() {
        std::string num;
        bool is_float = false;
        bool hex = false;
        if (ch_ == '0' && pos_ < src_.size() &&
            (src_[pos_] == 'x' || src_[pos_] == 'X')) {
            hex = true;
            num += char(ch_);
            next_char();
            num += char(ch_);
            next_char();
            while (ch_ != EOF && std::isxdigit(ch_)) {
                num += char(ch_);
                next_char();
            }
        } else {
            while (ch_ != EOF && std::isdigit(ch_)) {
                num += char(ch_);
                next_char();
            }
            if (ch_ == '.') {
                is_float = true;
                num += '.';
                next_char();
                while (ch_ != EOF && std::isdigit(ch_)) {
                    num += char(ch_);
                    next_char();
                }
            }
            if (ch_ == 'e' || ch_ == 'E') {
                is_float = true;
                num += char(ch_);
                next_char();
                if (ch_ == '+' || ch_ == '-') {
                    num += char(ch_);
                    next_char();
                }
                while (ch_ != EOF && std::isdigit(ch_)) {
                    num += char(ch_);
                    next_char();
                }
            }
        }
        if (is_float) {
            tok_.kind = Tok::FloatLit;
            tok_.fval = std::strtod(num.c_str(), nullptr);
            tok_.lit_type = BasicKind::Double;
            if (ch_ == 'f' || ch_ == 'F') {
                tok_.lit_type = BasicKind::Float;
                next_char();
            }
            return;
        }
        bool uns = false;
        int longs = 0;
        while (ch_ == 'u' || ch_ == 'U' || ch_ == 'l' || ch_ == 'L') {
            if (ch_ == 'u' || ch_ == 'U') uns = true;
            else ++longs;
            next_char();
        }
        tok_.kind = Tok::IntLit;
        tok_.ival = std::strtoull(num.c_str(), nullptr, hex ? 16 : 10);
        if (longs >= 2)
            tok_.lit_type = uns ? BasicKind::ULongLong : BasicKind::LongLong;
        else if (uns)
            tok_.lit_type = BasicKind::UInt;
        else if (tok_.ival > 0x7fffffffULL && !hex)
            tok_.lit_type = BasicKind::LongLong; // decimal too big for int
        else
            tok_.lit_type = BasicKind::Int;
    }

    void lex_char() {
        next_char(); // opening quote
        int v;
        if (ch_ == '\\') {
            next_char();
            switch (ch_) {
            case 'n': v = '\n'; break;
            case 't': v = '\t'; break;
            case 'r': v = '\r'; break;
            case '0': v = 0; break;
            case '\\': v = '\\'; break;
            case '\'': v = '\''; break;
            default: err("unknown escape in character constant");
            }
            next_char();
        } else if (ch_ == EOF || ch_ == '\'') {
            err("empty character constant");
        } else {
            v = ch_;
            next_char();
        }
        if (ch_ != '\'') err("unterminated character constant");
        next_char();
        tok_.kind = Tok::IntLit;
        tok_.ival = u64(v);
        tok_.lit_type = BasicKind::Int;
    }

    void lex_punct() {
        auto two = [&](char a, char b) {
            return ch_ == a && pos_ < src_.size() && src_[pos_] == b;
        };
        if (two('=', '=')) { next_char(); next_char(); tok_.kind = Tok::EqEq; return; }
        if (two('!', '=')) { next_char(); next_char(); tok_.kind = Tok::Ne; return; }
        if (two('<', '=')) { next_char(); next_char(); tok_.kind = Tok::Le; return; }
        if (two('>', '=')) { next_char(); next_char(); tok_.kind = Tok::Ge; return; }
        if (two('&', '&')) { next_char(); next_char(); tok_.kind = Tok::AmpAmp; return; }
        if (two('|', '|')) { next_char(); next_char(); tok_.kind = Tok::PipePipe; return; }
        if (two('<', '<')) { next_char(); next_char(); tok_.kind = Tok::Shl; return; }
        if (two('>', '>')) { next_char(); next_char(); tok_.kind = Tok::Shr; return; }
        if (two('.', '.')) {
            next_char(); next_char();
            if (ch_ == '.') { next_char(); tok_.kind = Tok::Ellipsis; return; }
            err("unexpected '..'");
        }
        Tok k;
        switch (ch_) {
        case '(': k = Tok::LParen; break;
        case ')': k = Tok::RParen; break;
        case '{': k = Tok::LBrace; break;
        case '}': k = Tok::RBrace; break;
        case '[': k = Tok::LBracket; break;
        case ']': k = Tok::RBracket; break;
        case ';': k = Tok::Semi; break;
        case ',': k = Tok::Comma; break;
        case ':': k = Tok::Colon; break;
        case '.': k = Tok::Dot; break;
        case '=': k = Tok::Assign; break;
        case '+': k = Tok::Plus; break;
        case '-': k = Tok::Minus; break;
        case '*': k = Tok::Star; break;
        case '/': k = Tok::Slash; break;
        case '%': k = Tok::Percent; break;
        case '<': k = Tok::Lt; break;
        case '>': k = Tok::Gt; break;
        case '!': k = Tok::Bang; break;
        case '&': k = Tok::Amp; break;
        case '|': k = Tok::Pipe; break;
        case '^': k = Tok::Caret; break;
        case '~': k = Tok::Tilde; break;
        case '?': k = Tok::Question; break;
        default: err("unexpected character '" + std::string(1, char(ch_)) + "'");
        }
        next_char();
        tok_.kind = k;
    }
};

inline ExprPtr clone_expr(const Expr* e) {
    if (!e) return nullptr;
    auto c = std::make_unique<Expr>();
    c->kind = e->kind;
    c->value = e->value;
    c->fval = e->fval;
    c->name = e->name;
    c->op = e->op;
    c->lhs = clone_expr(e->lhs.get());
    c->rhs = clone_expr(e->rhs.get());
    for (auto& a : e->args) c->args.push_back(clone_expr(a.get()));
    c->cast_to = e->cast_to;
    c->type = e->type;
    c->line = e->line;
    c->col = e->col;
    return c;
}

class Parser {
  public:
    Parser(std::string src, std::string file)
        : lex_(std::move(src), std::move(file)) {}

    Program parse_program() {
        Program prog;
        while (lex_.peek().kind != Tok::Eof) parse_global(prog);
        return prog;
    }

  private:
    Lexer lex_;

    [[noreturn]] void err(const Token& t, const std::string& m) {
        fail(lex_.file(), t.line, t.col, m);
    }
    [[noreturn]] void err_here(const std::string& m) { err(lex_.peek(), m); }

    Token expect(Tok k, const char* what) {
        if (lex_.peek().kind != k) err_here(std::string("expected ") + what);
        return lex_.take();
    }

    bool accept(Tok k) {
        if (lex_.peek().kind == k) {
            lex_.take();
            return true;
        }
        return false;
    }

    void reject_unsupported(const Token& t) {
        if (t.kind == Tok::KwUnsupported)
            err(t, "'" + t.text + "' is not supported");
        if (t.kind == Tok::Ellipsis) err(t, "varargs are not supported");
        if (t.kind == Tok::Question) err(t, "the ?: operator is not supported");
        if (t.kind == Tok::Amp || t.kind == Tok::Pipe || t.kind == Tok::Caret ||
            t.kind == Tok::Tilde || t.kind == Tok::Shl || t.kind == Tok::Shr)
            err(t, "bitwise operators are not supported");
    }

    bool starts_type(Tok k) {
        switch (k) {
        case Tok::KwChar:
        case Tok::KwShort:
        case Tok::KwInt:
        case Tok::KwLong:
        case Tok::KwFloat:
        case Tok::KwDouble:
        case Tok::KwBool:
        case Tok::KwVoid:
        case Tok::KwSigned:
        case Tok::KwUnsigned:
        case Tok::KwStruct:
        case Tok::KwUnion:
            return true;
        default:
            return false;
        }
    }

    // Parses "struct|union [Tag] { members }" returning the type; registers
    // the tag when named.
    TypePtr parse_struct_body(Program& prog, bool is_union) {
        std::string tag;
        if (lex_.peek().kind == Tok::Ident) tag = lex_.take().text;
        if (!accept(Tok::LBrace)) {
            // not a definition: existing tag reference
            if (tag.empty()) err_here("expected struct/union tag or body");
            for (auto& [n, t] : prog.tags)
                if (n == tag) return t;
            err_here("unknown struct/union tag '" + tag + "'");
        }
        auto ty = std::make_shared<Type>();
        ty->kind = is_union ? Type::K::Union : Type::K::Struct;
        ty->tag = tag;
        while (!accept(Tok::RBrace)) {
            reject_unsupported(lex_.peek());
            if ((lex_.peek().kind == Tok::KwStruct ||
                 lex_.peek().kind == Tok::KwUnion)) {
                bool inner_union = lex_.take().kind == Tok::KwUnion;
                TypePtr inner = parse_struct_body(prog, inner_union);
                if (accept(Tok::Semi)) {
                    // anonymous member (its fields are accessed directly)
                    ty->fields.push_back(StructField{"", inner});
                    continue;
                }
                Token name = expect(Tok::Ident, "member name");
                TypePtr fty = inner;
                if (accept(Tok::LBracket)) {
                    Token len = expect(Tok::IntLit, "array length");
                    expect(Tok::RBracket, "']'");
                    fty = make_array(fty, u32(len.ival));
                }
                expect(Tok::Semi, "';'");
                ty->fields.push_back(StructField{name.text, fty});
                continue;
            }
            TypePtr base = parse_basic_type();
            Token name = expect(Tok::Ident, "member name");
            TypePtr fty = base;
            if (accept(Tok::LBracket)) {
                Token len = expect(Tok::IntLit, "array length");
                expect(Tok::RBracket, "']'");
                fty = make_array(fty, u32(len.ival));
            }
            expect(Tok::Semi, "';'");
            ty->fields.push_back(StructField{name.text, fty});
        }
        if (!tag.empty()) prog.tags.emplace_back(tag, ty);
        return ty;
    }

    BasicKind map_basic(bool uns, bool sgn, int longs, int shorts, Tok base,
                        const Token& at) {
        if (base == Tok::KwFloat || base == Tok::KwDouble || base == Tok::KwBool) {
            if (uns || sgn || longs || shorts)
                err(at, "invalid type specifier combination");
            if (base == Tok::KwFloat) return BasicKind::Float;
            if (base == Tok::KwDouble) return BasicKind::Double;
            return BasicKind::Bool;
        }
        if (base == Tok::KwChar) {
            if (longs || shorts) err(at, "invalid type specifier combination");
            return uns ? BasicKind::UChar : BasicKind::Char;
        }
        if (shorts) return uns ? BasicKind::UShort : BasicKind::Short;
        if (longs >= 2) return uns ? BasicKind::ULongLong : BasicKind::LongLong;
        if (longs == 1) return uns ? BasicKind::ULong : BasicKind::Long;
        return uns ? BasicKind::UInt : BasicKind::Int;
    }

    // Parses a basic type (possibly multi-token: "unsigned long long int").
    TypePtr parse_basic_type() {
        Token first = lex_.peek();
        bool uns = false, sgn = false, seen_base = false, is_void = false;
        int longs = 0, shorts = 0;
        Tok base = Tok::KwInt;
        bool any = false;
        while (true) {
            Tok k = lex_.peek().kind;
            if (k == Tok::KwUnsigned) { uns = true; lex_.take(); any = true; continue; }
            if (k == Tok::KwSigned) { sgn = true; lex_.take(); any = true; continue; }
            if (k == Tok::KwLong) { ++longs; lex_.take(); any = true; continue; }
            if (k == Tok::KwShort) { ++shorts; lex_.take(); any = true; continue; }
            if (k == Tok::KwChar || k == Tok::KwFloat || k == Tok::KwDouble ||
                k == Tok::KwBool) {
                if (seen_base) err_here("invalid type specifier combination");
                base = k;
                seen_base = true;
                lex_.take();
                any = true;
                continue;
            }
            if (k == Tok::KwInt) {
                if (seen_base) err_here("invalid type specifier combination");
                seen_base = true; // base stays KwInt
                lex_.take();
                any = true;
                continue;
            }
            if (k == Tok::KwVoid) {
                is_void = true;
                lex_.take();
                any = true;
            }
            break;
        }
        if (!any) err(first, "expected a type");
        if (is_void) {
            if (uns || sgn || longs || shorts || seen_base)
                err(first, "invalid type specifier combination");
            return make_void();
        }
        if (uns && sgn) err(first, "both signed and unsigned");
        return make_basic(map_basic(uns, sgn, longs, shorts,
                                    seen_base ? base : Tok::KwInt, first));
    }

    TypePtr parse_type(Program& prog) {
        if (lex_.peek().kind == Tok::KwStruct || lex_.peek().kind == Tok::KwUnion) {
            bool is_union = lex_.take().kind == Tok::KwUnion;
            return parse_struct_body(prog, is_union);
        }
        return parse_basic_type();
    }

    // "restrict A int *p" — already consumed 'restrict'.
    StmtPtr parse_restrict_decl(const Token& kw) {
        Token arr = expect(Tok::Ident, "array name after 'restrict'");
        TypePtr base = parse_basic_type();
        expect(Tok::Star, "'*' in restrict pointer declaration");
        Token name = expect(Tok::Ident, "pointer name");
        auto st = std::make_unique<Stmt>();
        st->kind = Stmt::K::Decl;
        st->line = kw.line;
        st->col = kw.col;
        st->name = name.text;
        st->decl_type = make_pointer(arr.text, base);
        if (accept(Tok::Assign)) st->value = parse_expr();
        expect(Tok::Semi, "';'");
        return st;
    }

    void reject_bare_pointer() {
        if (lex_.peek().kind == Tok::Star)
            err(lex_.peek(), "pointer declarations need a 'restrict' array "
                             "binding: restrict A type *p");
    }

    void parse_global(Program& prog) {
        reject_unsupported(lex_.peek());
        if (lex_.peek().kind == Tok::KwRestrict) {
            Token kw = lex_.take();
            prog.globals.push_back(parse_restrict_decl(kw));
            return;
        }
        if (!starts_type(lex_.peek().kind)) err_here("expected a declaration");
        Token at = lex_.peek();
        TypePtr ty = parse_type(prog);
        if (lex_.peek().kind == Tok::Semi) {
            // bare tag definition already registered
            lex_.take();
            return;
        }
        reject_bare_pointer();
        Token name = expect(Tok::Ident, "name");
        if (lex_.peek().kind == Tok::LParen) {
            prog.functions.push_back(parse_function_rest(prog, ty, name));
            return;
        }
        prog.globals.push_back(parse_var_decl_rest(ty, name, at));
    }

    StmtPtr parse_var_decl_rest(TypePtr ty, const Token& name, const Token& at) {
        auto st = std::make_unique<Stmt>();
        st->kind = Stmt::K::Decl;
        st->line = at.line;
        st->col = at.col;
        st->name = name.text;
        if (accept(Tok::LBracket)) {
            Token len = expect(Tok::IntLit, "array length");
            if (len.ival == 0) err(len, "array length must be positive");
            expect(Tok::RBracket, "']'");
            ty = make_array(ty, u32(len.ival));
        }
        st->decl_type = ty;
        if (accept(Tok::Assign)) {
            if (st->decl_type->kind == Type::K::Array)
                err_here("array initializers are not supported");
            st->value = parse_expr();
        }
        expect(Tok::Semi, "';'");
        return st;
    }

    std::unique_ptr<Function> parse_function_rest(Program& prog, TypePtr ret,
                                                  const Token& name) {
        auto fn = std::make_unique<Function>();
        fn->ret = std::move(ret);
        fn->name = name.text;
        fn->line = name.line;
        fn->col = name.col;
        expect(Tok::LParen, "'('");
        if (!accept(Tok::RParen)) {
            if (lex_.peek().kind == Tok::KwVoid) {
                lex_.take();
                expect(Tok::RParen, "')'");
            } else {
                while (true) {
                    reject_unsupported(lex_.peek());
                    TypePtr pty = parse_type(prog);
                    Token pname = expect(Tok::Ident, "parameter name");
                    fn->params.push_back(Param{pty, pname.text});
                    if (accept(Tok::RParen)) break;
                    expect(Tok::Comma, "','");
                }
            }
        }
        expect(Tok::LBrace, "function body");
        fn->body = parse_block_rest(prog);
        return fn;
    }

    std::vector<StmtPtr> parse_block_rest(Program& prog) {
        std::vector<StmtPtr> body;
        while (!accept(Tok::RBrace)) {
            if (lex_.peek().kind == Tok::Eof) err_here("unexpected end of file");
            body.push_back(parse_stmt(prog));
        }
        return body;
    }

    std::vector<StmtPtr> parse_stmt_or_block(Program& prog) {
        if (accept(Tok::LBrace)) return parse_block_rest(prog);
        std::vector<StmtPtr> v;
        v.push_back(parse_stmt(prog));
        return v;
    }

    StmtPtr parse_stmt(Program& prog) {
        reject_unsupported(lex_.peek());
        Token at = lex_.peek();
        switch (at.kind) {
        case Tok::KwRestrict: {
            lex_.take();
            return parse_restrict_decl(at);
        }
        case Tok::KwLabel: {
            lex_.take();
            Token name = expect(Tok::Ident, "label name");
            expect(Tok::Semi, "';'");
            auto st = std::make_unique<Stmt>();
            st->kind = Stmt::K::LabelDecl;
            st->name = name.text;
            st->line = at.line;
            st->col = at.col;
            return st;
        }
        case Tok::KwGoto: {
            lex_.take();
            Token name = expect(Tok::Ident, "label name");
            expect(Tok::Semi, "';'");
            auto st = std::make_unique<Stmt>();
            st->kind = Stmt::K::Goto;
            st->name = name.text;
            st->line = at.line;
            st->col = at.col;
            return st;
        }
        case Tok::KwReturn: {
            lex_.take();
            auto st = std::make_unique<Stmt>();
            st->kind = Stmt::K::Return;
            st->line = at.line;
            st->col = at.col;
            if (!accept(Tok::Semi)) {
                st->value = parse_expr();
                expect(Tok::Semi, "';'");
            }
            return st;
        }
        case Tok::KwIf: {
            lex_.take();
            expect(Tok::LParen, "'('");
            auto st = std::make_unique<Stmt>();
            st->kind = Stmt::K::If;
            st->line = at.line;
            st->col = at.col;
            st->cond = parse_expr();
            expect(Tok::RParen, "')'");
            st->body = parse_stmt_or_block(prog);
            if (accept(Tok::KwElse)) st->else_body = parse_stmt_or_block(prog);
            return st;
        }
        case Tok::KwWhile: {
            lex_.take();
            expect(Tok::LParen, "'('");
            auto st = std::make_unique<Stmt>();
            st->kind = Stmt::K::While;
            st->line = at.line;
            st->col = at.col;
            st->cond = parse_expr();
            expect(Tok::RParen, "')'");
            st->body = parse_stmt_or_block(prog);
            return st;
        }
        case Tok::KwFor: {
            // for (init; cond; step) body  =>  { init; while (cond) { body; step; } }
            lex_.take();
            expect(Tok::LParen, "'('");
            StmtPtr init;
            if (!accept(Tok::Semi)) {
                init = parse_simple_stmt(prog, at);
                expect(Tok::Semi, "';'");
            }
            ExprPtr cond;
            if (!accept(Tok::Semi)) {
                cond = parse_expr();
                expect(Tok::Semi, "';'");
            } else {
                cond = make_int_lit(1, ast::make_basic(ast::BasicKind::Int), at.line, at.col);
            }
            StmtPtr step;
            if (!accept(Tok::RParen)) {
                step = parse_simple_stmt(prog, at);
                expect(Tok::RParen, "')'");
            }
            auto loop = std::make_unique<Stmt>();
            loop->kind = Stmt::K::While;
            loop->line = at.line;
            loop->col = at.col;
            loop->cond = std::move(cond);
            loop->body = parse_stmt_or_block(prog);
            if (step) loop->body.push_back(std::move(step));
            auto blk = std::make_unique<Stmt>();
            blk->kind = Stmt::K::Block;
            blk->line = at.line;
            blk->col = at.col;
            if (init) blk->body.push_back(std::move(init));
            blk->body.push_back(std::move(loop));
            return blk;
        }
        case Tok::LBrace: {
            lex_.take();
            auto st = std::make_unique<Stmt>();
            st->kind = Stmt::K::Block;
            st->line = at.line;
            st->col = at.col;
            st->body = parse_block_rest(prog);
            return st;
        }
        default:
            break;
        }
        if (starts_type(at.kind)) {
            TypePtr ty = parse_type(prog);
            reject_bare_pointer();
            Token name = expect(Tok::Ident, "name");
            if (lex_.peek().kind == Tok::LParen) {
                // interior function definition
                auto st = std::make_unique<Stmt>();
                st->kind = Stmt::K::InteriorFn;
                st->line = at.line;
                st->col = at.col;
                st->name = name.text;
                st->fn = parse_function_rest(prog, ty, name);
                return st;
            }
            return parse_var_decl_rest(ty, name, at);
        }
        // label "ident:" / assignment / call / expression statement
        if (at.kind == Tok::Ident) {
            // need two-token lookahead for "ident:"; parse the expression and
            // recover the label case first via a cheap check
            Token id = lex_.take();
            if (accept(Tok::Colon)) {
                auto st = std::make_unique<Stmt>();
                st->kind = Stmt::K::Label;
                st->name = id.text;
                st->line = at.line;
                st->col = at.col;
                return st;
            }
            return parse_assign_or_call_rest(id, at);
        }
        if (at.kind == Tok::Star || at.kind == Tok::LParen) {
            // *p = e; / *(p+1) = e; / (*p) = e;
            StmtPtr st = parse_simple_stmt(prog, at);
            expect(Tok::Semi, "';'");
            return st;
        }
        err(at, "expected a statement");
    }

    // assignment / call / expr statement (no trailing ';' consumed here when
    // used inside for(...); the ';' is consumed by the caller for for-parts)
    StmtPtr parse_simple_stmt(Program& prog, const Token& at) {
        if (starts_type(lex_.peek().kind)) {
            TypePtr ty = parse_type(prog);
            reject_bare_pointer();
            Token name = expect(Tok::Ident, "name");
            // decl without trailing ';' for for-init
            auto st = std::make_unique<Stmt>();
            st->kind = Stmt::K::Decl;
            st->line = at.line;
            st->col = at.col;
            st->name = name.text;
            st->decl_type = ty;
            if (accept(Tok::Assign)) st->value = parse_expr();
            return st;
        }
        ExprPtr target = parse_unary();
        if (accept(Tok::Assign)) {
            auto st = std::make_unique<Stmt>();
            st->kind = Stmt::K::Assign;
            st->line = at.line;
            st->col = at.col;
            st->target = std::move(target);
            st->value = parse_expr();
            return st;
        }
        return finish_expr_stmt(std::move(target), at);
    }

    StmtPtr parse_assign_or_call_rest(const Token& id, const Token& at) {
        ExprPtr e = parse_postfix_from_ident(id);
        if (accept(Tok::Assign)) {
            auto st = std::make_unique<Stmt>();
            st->kind = Stmt::K::Assign;
            st->line = at.line;
            st->col = at.col;
            st->target = std::move(e);
            st->value = parse_expr();
            expect(Tok::Semi, "';'");
            return st;
        }
        if (e->kind == Expr::K::Call && lex_.peek().kind == Tok::Semi) {
            lex_.take();
            if (e->name == "emit") {
                if (e->args.size() != 1) err(at, "emit takes one argument");
                auto st = std::make_unique<Stmt>();
                st->kind = Stmt::K::Emit;
                st->line = at.line;
                st->col = at.col;
                st->value = std::move(e->args[0]);
                return st;
            }
            auto st = std::make_unique<Stmt>();
            st->kind = Stmt::K::Call;
            st->line = at.line;
            st->col = at.col;
            st->name = e->name;
            st->args = std::move(e->args);
            return st;
        }
        StmtPtr st = finish_expr_stmt(std::move(e), at);
        expect(Tok::Semi, "';'");
        return st;
    }

    StmtPtr finish_expr_stmt(ExprPtr first, const Token& at) {
        // continue parsing the binary expression the first fragment begins
        ExprPtr e = parse_binary_rest(std::move(first), 0);
        auto st = std::make_unique<Stmt>();
        st->kind = Stmt::K::ExprStmt;
        st->line = at.line;
        st->col = at.col;
        st->value = std::move(e);
        return st;
    }

    // ---- expressions ----

    int precedence(Tok k) {
        switch (k) {
        case Tok::Star:
        case Tok::Slash:
        case Tok::Percent: return 6;
        case Tok::Plus:
        case Tok::Minus: return 5;
        case Tok::Lt:
        case Tok::Gt:
        case Tok::Le:
        case Tok::Ge: return 4;
        case Tok::EqEq:
        case Tok::Ne: return 3;
        case Tok::AmpAmp: return 2;
        case Tok::PipePipe: return 1;
        default: return 0;
        }
    }

    ExprPtr parse_expr() { return parse_binary_rest(parse_unary(), 0); }

    ExprPtr mk_bin(BinOp op, ExprPtr l, ExprPtr r, int line, int col) {
        auto e = std::make_unique<Expr>();
        e->kind = Expr::K::Binary;
        e->op = op;
        e->lhs = std::move(l);
        e->rhs = std::move(r);
        e->line = line;
        e->col = col;
        return e;
    }

    ExprPtr parse_binary_rest(ExprPtr lhs, int min_prec) {
        while (true) {
            Token t = lex_.peek();
            reject_unsupported(t);
            if (t.kind == Tok::Assign)
                err(t, "assignment inside an expression is not supported");
            int prec = precedence(t.kind);
            if (prec == 0 || prec < min_prec) return lhs;
            lex_.take();
            ExprPtr rhs = parse_unary();
            while (precedence(lex_.peek().kind) > prec)
                rhs = parse_binary_rest(std::move(rhs),
                                        precedence(lex_.peek().kind));
            switch (t.kind) {
            case Tok::Plus:
                lhs = mk_bin(BinOp::Add, std::move(lhs), std::move(rhs), t.line, t.col);
                break;
            case Tok::Minus:
                lhs = mk_bin(BinOp::Sub, std::move(lhs), std::move(rhs), t.line, t.col);
                break;
            case Tok::Star:
                lhs = mk_bin(BinOp::Mul, std::move(lhs), std::move(rhs), t.line, t.col);
                break;
            case Tok::Slash:
                lhs = mk_bin(BinOp::Div, std::move(lhs), std::move(rhs), t.line, t.col);
                break;
            case Tok::Percent: {
                // a % b  =>  a - (a / b) * b
                ExprPtr a2 = clone_expr(lhs.get());
                ExprPtr b2 = clone_expr(rhs.get());
                ExprPtr div = mk_bin(BinOp::Div, std::move(a2), std::move(rhs),
                                     t.line, t.col);
                ExprPtr prod = mk_bin(BinOp::Mul, std::move(div), std::move(b2),
                                      t.line, t.col);
                lhs = mk_bin(BinOp::Sub, std::move(lhs), std::move(prod),
                             t.line, t.col);
                break;
            }
            case Tok::Lt:
                lhs = mk_bin(BinOp::Lt, std::move(lhs), std::move(rhs), t.line, t.col);
                break;
            case Tok::Gt:
                lhs = mk_bin(BinOp::Gt, std::move(lhs), std::move(rhs), t.line, t.col);
                break;
            case Tok::Le:
                lhs = mk_bin(BinOp::Le, std::move(lhs), std::move(rhs), t.line, t.col);
                break;
            case Tok::Ge:
                lhs = mk_bin(BinOp::Ge, std::move(lhs), std::move(rhs), t.line, t.col);
                break;
            case Tok::EqEq:
                lhs = mk_bin(BinOp::Eq, std::move(lhs), std::move(rhs), t.line, t.col);
                break;
            case Tok::Ne:
                lhs = mk_bin(BinOp::Ne, std::move(lhs), std::move(rhs), t.line, t.col);
                break;
            case Tok::AmpAmp:
                lhs = mk_bin(BinOp::LAnd, std::move(lhs), std::move(rhs), t.line, t.col);
                break;
            case Tok::PipePipe:
                lhs = mk_bin(BinOp::LOr, std::move(lhs), std::move(rhs), t.line, t.col);
                break;
            default:
                err(t, "unexpected operator");
            }
        }
    }

    ExprPtr parse_unary() {
        Token t = lex_.peek();
        reject_unsupported(t);
        if (t.kind == Tok::Minus) {
            lex_.take();
            // -e  =>  (0 - e)
            ExprPtr zero = make_int_lit(0, ast::make_basic(ast::BasicKind::Int), t.line, t.col);
            return mk_bin(BinOp::Sub, std::move(zero), parse_unary(), t.line, t.col);
        }
        if (t.kind == Tok::Plus) {
            lex_.take();
            return parse_unary();
        }
        if (t.kind == Tok::Bang) {
            lex_.take();
            // !e  =>  (e == 0)
            ExprPtr zero = make_int_lit(0, ast::make_basic(ast::BasicKind::Int), t.line, t.col);
            return mk_bin(BinOp::Eq, parse_unary(), std::move(zero), t.line, t.col);
        }
        if (t.kind == Tok::Star) {
            lex_.take();
            auto e = std::make_unique<Expr>();
            e->kind = Expr::K::Deref;
            e->lhs = parse_unary();
            e->line = t.line;
            e->col = t.col;
            return e;
        }
        if (t.kind == Tok::LParen && starts_cast()) {
            lex_.take();
            TypePtr ty = parse_basic_type();
            expect(Tok::RParen, "')'");
            auto e = std::make_unique<Expr>();
            e->kind = Expr::K::Cast;
            e->cast_to = std::move(ty);
            e->lhs = parse_unary();
            e->line = t.line;
            e->col = t.col;
            return e;
        }
        return parse_postfix(parse_primary());
    }

    // after '(' in expression context: is this a cast? (basic types only)
    bool starts_cast() {
        // lookahead one raw character stream position is not available; use
        // the token after '(' — safe because '(' is current peek
        // we need a 2-token lookahead: implement via lexer copy
        // NOTE: Lexer is cheap to copy (string + indices)
        Lexer probe = lex_;
        probe.take(); // '('
        switch (probe.peek().kind) {
        case Tok::KwChar:
        case Tok::KwShort:
        case Tok::KwInt:
        case Tok::KwLong:
        case Tok::KwFloat:
        case Tok::KwDouble:
        case Tok::KwBool:
        case Tok::KwSigned:
        case Tok::KwUnsigned:
            return true;
        default:
            return false;
        }
    }

    ExprPtr parse_primary() {
        Token t = lex_.take();
        reject_unsupported(t);
        switch (t.kind) {
        case Tok::IntLit: {
            auto e = make_int_lit(t.ival, make_basic(t.lit_type), t.line, t.col);
            return e;
        }
        case Tok::FloatLit: {
            auto e = std::make_unique<Expr>();
            e->kind = Expr::K::FloatLit;
            e->fval = t.fval;
            e->type = make_basic(t.lit_type);
            e->line = t.line;
            e->col = t.col;
            return e;
        }
        case Tok::LParen: {
            ExprPtr e = parse_expr();
            expect(Tok::RParen, "')'");
            return e;
        }
        case Tok::Ident:
            return parse_postfix_from_ident(t);
        default:
            err(t, "expected an expression");
        }
    }

    ExprPtr parse_postfix_from_ident(const Token& id) {
        ExprPtr e;
        if (lex_.peek().kind == Tok::LParen) {
            lex_.take();
            auto c = std::make_unique<Expr>();
            c->kind = Expr::K::Call;
            c->name = id.text;
            c->line = id.line;
            c->col = id.col;
            if (!accept(Tok::RParen)) {
                while (true) {
                    c->args.push_back(parse_expr());
                    if (accept(Tok::RParen)) break;
                    expect(Tok::Comma, "','");
                }
            }
            e = std::move(c);
        } else {
            e = std::make_unique<Expr>();
            e->kind = Expr::K::Var;
            e->name = id.text;
            e->line = id.line;
            e->col = id.col;
        }
        return parse_postfix(std::move(e));
    }

    ExprPtr parse_postfix(ExprPtr e) {
        while (true) {
            Token t = lex_.peek();
            if (t.kind == Tok::LBracket) {
                lex_.take();
                auto ix = std::make_unique<Expr>();
                ix->kind = Expr::K::Index;
                ix->lhs = std::move(e);
                ix->rhs = parse_expr();
                ix->line = t.line;
                ix->col = t.col;
                expect(Tok::RBracket, "']'");
                e = std::move(ix);
                continue;
            }
            if (t.kind == Tok::Dot) {
                lex_.take();
                Token f = expect(Tok::Ident, "field name");
                auto fe = std::make_unique<Expr>();
                fe->kind = Expr::K::Field;
                fe->lhs = std::move(e);
                fe->name = f.text;
                fe->line = t.line;
                fe->col = t.col;
                e = std::move(fe);
                continue;
            }
            return e;
        }
    }
};

} // namespace detail

namespace detail {

// Strings are excluded from the subset; flag them up front so the report
// names the feature even when a declaration form trips the parser earlier.
inline void reject_string_literals(const std::string& src,
                                   const std::string& file) {
    int line = 1, col = 1;
    for (size_t i = 0; i < src.size(); ++i, ++col) {
        char c = src[i];
        if (c == '\n') {
            ++line;
            col = 0;
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') ++i;
            ++line;
            col = 0;
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
            i += 2;
            while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) {
                if (src[i] == '\n') {
                    ++line;
                    col = 0;
                }
                ++i;
            }
            i += 1;
            continue;
        }
        if (c == '\'') {
            ++i;
            while (i < src.size() && src[i] != '\'') {
                if (src[i] == '\\') ++i;
                ++i;
            }
            col = 1; // close enough; char constants don't span lines
            continue;
        }
        if (c == '"') fail(file, line, col, "string literals are not supported");
    }
}

} // namespace detail

inline ast::Program parse(const std::string& source,
                          const std::string& filename = "<input>") {
    detail::reject_string_literals(source, filename);
    detail::Parser p(source, filename);
    return p.parse_program();
}

// ---- pretty printer ----

namespace detail {

inline void print_type_prefix(std::ostream& os, const TypePtr& t);

inline void print_fields(std::ostream& os, const Type& t, int indent) {
    std::string pad(indent, ' ');
    for (auto& f : t.fields) {
        os << pad;
        if (f.type->kind == Type::K::Struct || f.type->kind == Type::K::Union ||
            (f.type->kind == Type::K::Array &&
             (f.type->elem->kind == Type::K::Struct ||
              f.type->elem->kind == Type::K::Union))) {
            const Type* inner =
                f.type->kind == Type::K::Array ? f.type->elem.get() : f.type.get();
            os << (inner->kind == Type::K::Union ? "union" : "struct");
            if (!inner->tag.empty()) os << ' ' << inner->tag;
            os << " {\n";
            print_fields(os, *inner, indent + 4);
            os << pad << "}";
            if (!f.name.empty()) os << ' ' << f.name;
            if (f.type->kind == Type::K::Array) os << '[' << f.type->len << ']';
            os << ";\n";
        } else if (f.type->kind == Type::K::Array) {
            print_type_prefix(os, f.type->elem);
            os << ' ' << f.name << '[' << f.type->len << "];\n";
        } else {
            print_type_prefix(os, f.type);
            os << ' ' << f.name << ";\n";
        }
    }
}

inline void print_type_prefix(std::ostream& os, const TypePtr& t) {
    switch (t->kind) {
    case Type::K::Basic: os << basic_name(t->basic); break;
    case Type::K::Void: os << "void"; break;
    case Type::K::Struct:
    case Type::K::Union:
        if (!t->tag.empty()) {
            os << (t->kind == Type::K::Union ? "union " : "struct ") << t->tag;
        } else {
            os << (t->kind == Type::K::Union ? "union {\n" : "struct {\n");
            print_fields(os, *t, 4);
            os << "}";
        }
        break;
    default: os << "?"; break;
    }
}

inline void print_expr(std::ostream& os, const Expr* e) {
    switch (e->kind) {
    case Expr::K::IntLit: {
        // literal type decides the printed suffix so reparse is faithful
        BasicKind k = e->type ? e->type->basic : BasicKind::Int;
        if (k == BasicKind::ULongLong) os << e->value << "ull";
        else if (k == BasicKind::LongLong) os << i64(e->value) << "ll";
        else if (k == BasicKind::UInt) os << u32(e->value) << "u";
        else os << i64(i32(u32(e->value)));
        break;
    }
    case Expr::K::FloatLit: {
        std::ostringstream tmp;
        tmp.precision(17);
        tmp << e->fval;
        std::string s = tmp.str();
        if (s.find('.') == std::string::npos && s.find('e') == std::string::npos)
            s += ".0";
        os << s;
        if (e->type && e->type->basic == BasicKind::Float) os << "f";
        break;
    }
    case Expr::K::Var: os << e->name; break;
    case Expr::K::Binary:
        os << '(';
        print_expr(os, e->lhs.get());
        os << ' ' << binop_name(e->op) << ' ';
        print_expr(os, e->rhs.get());
        os << ')';
        break;
    case Expr::K::Cast:
        os << '(';
        os << '(';
        print_type_prefix(os, e->cast_to);
        os << ')';
        print_expr(os, e->lhs.get());
        os << ')';
        break;
    case Expr::K::Index:
        print_expr(os, e->lhs.get());
        os << '[';
        print_expr(os, e->rhs.get());
        os << ']';
        break;
    case Expr::K::Deref:
        os << "(*";
        print_expr(os, e->lhs.get());
        os << ')';
        break;
    case Expr::K::Field:
        print_expr(os, e->lhs.get());
        os << '.' << e->name;
        break;
    case Expr::K::Call:
        os << e->name << '(';
        for (size_t i = 0; i < e->args.size(); ++i) {
            if (i) os << ", ";
            print_expr(os, e->args[i].get());
        }
        os << ')';
        break;
    }
}

inline void print_decl(std::ostream& os, const Stmt* st) {
    if (st->decl_type->kind == Type::K::Pointer) {
        os << "restrict " << st->decl_type->into << ' ';
        print_type_prefix(os, st->decl_type->pointee);
        os << " *" << st->name;
    } else if (st->decl_type->kind == Type::K::Array) {
        print_type_prefix(os, st->decl_type->elem);
        os << ' ' << st->name << '[' << st->decl_type->len << ']';
    } else {
        print_type_prefix(os, st->decl_type);
        os << ' ' << st->name;
    }
    if (st->value) {
        os << " = ";
        print_expr(os, st->value.get());
    }
}

inline void print_stmts(std::ostream& os, const std::vector<StmtPtr>& body,
                        int indent);
inline void print_function(std::ostream& os, const Function* fn, int indent);

inline void print_stmt(std::ostream& os, const Stmt* st, int indent) {
    std::string pad(indent, ' ');
    switch (st->kind) {
    case Stmt::K::Decl:
        os << pad;
        print_decl(os, st);
        os << ";\n";
        break;
    case Stmt::K::Assign:
        os << pad;
        print_expr(os, st->target.get());
        os << " = ";
        print_expr(os, st->value.get());
        os << ";\n";
        break;
    case Stmt::K::If:
        os << pad << "if (";
        print_expr(os, st->cond.get());
        os << ") {\n";
        print_stmts(os, st->body, indent + 4);
        os << pad << "}";
        if (!st->else_body.empty()) {
            os << " else {\n";
            print_stmts(os, st->else_body, indent + 4);
            os << pad << "}";
        }
        os << "\n";
        break;
    case Stmt::K::While:
        os << pad << "while (";
        print_expr(os, st->cond.get());
        os << ") {\n";
        print_stmts(os, st->body, indent + 4);
        os << pad << "}\n";
        break;
    case Stmt::K::Block:
        os << pad << "{\n";
        print_stmts(os, st->body, indent + 4);
        os << pad << "}\n";
        break;
    case Stmt::K::Goto: os << pad << "goto " << st->name << ";\n"; break;
    case Stmt::K::LabelDecl:
        os << pad << "__label__ " << st->name << ";\n";
        break;
    case Stmt::K::Label: os << pad << st->name << ":\n"; break;
    case Stmt::K::Return:
        os << pad << "return";
        if (st->value) {
            os << ' ';
            print_expr(os, st->value.get());
        }
        os << ";\n";
        break;
    case Stmt::K::Emit:
        os << pad << "emit(";
        print_expr(os, st->value.get());
        os << ");\n";
        break;
    case Stmt::K::Call:
        os << pad;
        if (st->target) {
            print_expr(os, st->target.get());
            os << " = ";
        }
        os << st->name << '(';
        for (size_t i = 0; i < st->args.size(); ++i) {
            if (i) os << ", ";
            print_expr(os, st->args[i].get());
        }
        os << ");\n";
        break;
    case Stmt::K::ExprStmt:
        os << pad;
        print_expr(os, st->value.get());
        os << ";\n";
        break;
    case Stmt::K::InteriorFn:
        print_function(os, st->fn.get(), indent);
        break;
    }
}

inline void print_stmts(std::ostream& os, const std::vector<StmtPtr>& body,
                        int indent) {
    for (auto& st : body) print_stmt(os, st.get(), indent);
}

inline void print_function(std::ostream& os, const Function* fn, int indent) {
    std::string pad(indent, ' ');
    os << pad;
    print_type_prefix(os, fn->ret);
    os << ' ' << fn->name << '(';
    for (size_t i = 0; i < fn->params.size(); ++i) {
        if (i) os << ", ";
        print_type_prefix(os, fn->params[i].type);
        os << ' ' << fn->params[i].name;
    }
    os << ") {\n";
    print_stmts(os, fn->body, indent + 4);
    os << pad << "}\n";
}

} // namespace detail

inline std::string print_program(const ast::Program& prog) {
    std::ostringstream os;
    for (auto& [name, ty] : prog.tags) {
        os << (ty->kind == Type::K::Union ? "union " : "struct ") << name
           << " {\n";
        detail::print_fields(os, *ty, 4);
        os << "};\n";
    }
    for (auto& g : prog.globals) {
        detail::print_decl(os, g.get());
        os << ";\n";
    }
    for (auto& fn : prog.functions) detail::print_function(os, fn.get(), 0);
    return os.str();
}

// ---- type checker ----

namespace detail {

// Looks a field up in a struct/union, descending into anonymous members.
inline const StructField* find_field(const Type& agg, const std::string& name) {
    for (auto& f : agg.fields) {
        if (f.name == name) return &f;
        if (f.name.empty() && (f.type->kind == Type::K::Struct ||
                               f.type->kind == Type::K::Union)) {
            if (const StructField* inner = find_field(*f.type, name))
                return inner;
        }
    }
    return nullptr;
}

class Checker {
  public:
    Checker(Program& prog, std::string file)
        : prog_(prog), file_(std::move(file)) {}

    void run() {
        scopes_.emplace_back(); // global scope
        for (auto& g : prog_.globals) {
            if (contains_call(g->value.get()))
                err(g.get(), "calls are not allowed in global initializers");
            check_decl(g.get());
        }
        for (auto& fn : prog_.functions) {
            if (funcs_.count(fn->name))
                err_at(fn->line, fn->col,
                       "function '" + fn->name + "' redefined");
            register_function(fn.get());
            check_function(fn.get());
        }
        if (!prog_.find_function("main"))
            err_at(1, 1, "program has no main function");
    }

  private:
    Program& prog_;
    std::string file_;

    std::vector<std::map<std::string, TypePtr>> scopes_;
    struct FuncSig {
        TypePtr ret;
        std::vector<TypePtr> params;
    };
    std::map<std::string, FuncSig> funcs_;
    int temp_counter_ = 0;

    // per-function label bookkeeping
    struct LabelInfo {
        bool declared = false;
        bool defined = false;
        const void* block = nullptr;      // block the __label__ lives in
        std::set<std::string> vars_after; // declared after __label__, pre-definition
    };
    std::map<std::string, LabelInfo> labels_;
    std::vector<const void*> block_stack_;
    std::vector<std::pair<std::string, int>> pending_gotos_; // name, line

    const Function* current_fn_ = nullptr;

    [[noreturn]] void err_at(int line, int col, const std::string& m) {
        fail(file_, line, col, m);
    }
    [[noreturn]] void err(const Stmt* s, const std::string& m) {
        err_at(s->line, s->col, m);
    }
    [[noreturn]] void err(const Expr* e, const std::string& m) {
        err_at(e->line, e->col, m);
    }

    // ---- helpers ----

    static bool contains_call(const Expr* e) {
        if (!e) return false;
        if (e->kind == Expr::K::Call) return true;
        if (contains_call(e->lhs.get()) || contains_call(e->rhs.get()))
            return true;
        for (auto& a : e->args)
            if (contains_call(a.get())) return true;
        return false;
    }

    TypePtr* lookup(const std::string& name) {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            auto f = it->find(name);
            if (f != it->end()) return &f->second;
        }
        return nullptr;
    }

    void declare(const Stmt* at, const std::string& name, TypePtr t) {
        if (name == "emit") err(at, "'emit' is reserved");
        auto& scope = scopes_.back();
        if (scope.count(name))
            err(at, "redeclaration of '" + name + "' in the same scope");
        scope[name] = std::move(t);
    }

    // valid union member layouts: basic scalars, arrays of basics, structs of
    // those (all flattenable to 32-bit words)
    bool word_layout_ok(const TypePtr& t) {
        switch (t->kind) {
        case Type::K::Basic: return true;
        case Type::K::Array: return t->elem->kind == Type::K::Basic;
        case Type::K::Struct:
            for (auto& f : t->fields)
                if (!word_layout_ok(f.type)) return false;
            return true;
        default: return false;
        }
    }

    void validate_var_type(const Stmt* at, const TypePtr& t) {
        switch (t->kind) {
        case Type::K::Basic:
        case Type::K::Pointer:
            return;
        case Type::K::Void:
            err(at, "variables cannot have void type");
        case Type::K::Array: {
            const TypePtr& e = t->elem;
            if (e->kind == Type::K::Basic) return;
            if (e->kind == Type::K::Struct) {
                // struct-array entries: basic or nested-struct fields only
                for (auto& f : e->fields)
                    if (f.type->kind != Type::K::Basic &&
                        !(f.type->kind == Type::K::Struct && word_layout_ok(f.type)))
                        err(at, "unsupported struct-array field type");
                for (auto& f : e->fields)
                    if (f.type->kind == Type::K::Struct)
                        for (auto& g : f.type->fields)
                            if (g.type->kind != Type::K::Basic)
                                err(at, "unsupported struct-array field type");
                return;
            }
            err(at, "unsupported array element type");
        }
        case Type::K::Struct:
            for (auto& f : t->fields)
                if (f.type->kind != Type::K::Basic &&
                    f.type->kind != Type::K::Struct)
                    err(at, "struct fields must be scalars or nested structs "
                            "(arrays only inside unions)");
                else if (f.type->kind == Type::K::Struct)
                    validate_var_type(at, f.type);
            return;
        case Type::K::Union:
            for (auto& f : t->fields)
                if (!word_layout_ok(f.type))
                    err(at, "unsupported union member type");
            return;
        }
    }

    // canonical computation kinds: Int, UInt, LongLong, ULongLong, Float, Double
    static BasicKind computation_kind(BasicKind k) {
        switch (k) {
        case BasicKind::Bool:
        case BasicKind::Char:
        case BasicKind::Short:
        case BasicKind::UChar:
        case BasicKind::UShort:
        case BasicKind::Int:
        case BasicKind::Long: return BasicKind::Int;
        case BasicKind::UInt:
        case BasicKind::ULong: return BasicKind::UInt;
        default: return k;
        }
    }

    static BasicKind common_kind(BasicKind a, BasicKind b) {
        a = computation_kind(a);
        b = computation_kind(b);
        auto either = [&](BasicKind k) { return a == k || b == k; };
        if (either(BasicKind::Double)) return BasicKind::Double;
        if (either(BasicKind::Float)) return BasicKind::Float;
        if (either(BasicKind::ULongLong)) return BasicKind::ULongLong;
        if (either(BasicKind::LongLong)) return BasicKind::LongLong;
        if (either(BasicKind::UInt)) return BasicKind::UInt;
        return BasicKind::Int;
    }

    ExprPtr coerced(ExprPtr e, const TypePtr& to) {
        if (type_equal(e->type, to)) return e;
        auto c = std::make_unique<Expr>();
        c->kind = Expr::K::Cast;
        c->cast_to = to;
        c->type = to;
        c->line = e->line;
        c->col = e->col;
        c->lhs = std::move(e);
        return c;
    }

    void coerce(ExprPtr& e, const TypePtr& to) { e = coerced(std::move(e), to); }

    TypePtr basic(BasicKind k) { return make_basic(k); }

    // ---- expressions ----

    bool is_pointerish(const Expr* e) {
        return e->type &&
               (e->type->kind == Type::K::Pointer ||
                (e->type->kind == Type::K::Array && e->kind == Expr::K::Var));
    }

    TypePtr decay(const Expr* e) {
        if (e->type->kind == Type::K::Pointer) return e->type;
        return make_pointer(e->name, e->type->elem);
    }

    TypePtr check_expr(Expr* e) {
        switch (e->kind) {
        case Expr::K::IntLit:
            if (!e->type) e->type = basic(BasicKind::Int);
            return e->type;
        case Expr::K::FloatLit:
            if (!e->type) e->type = basic(BasicKind::Double);
            return e->type;
        case Expr::K::Var: {
            TypePtr* t = lookup(e->name);
            if (!t) err(e, "undeclared identifier '" + e->name + "'");
            e->type = *t;
            return e->type;
        }
        case Expr::K::Binary: return check_binary(e);
        case Expr::K::Cast: {
            TypePtr from = check_expr(e->lhs.get());
            if (e->cast_to->kind != Type::K::Basic)
                err(e, "cast target must be a basic type");
            if (from->kind != Type::K::Basic)
                err(e, "only basic types can be cast");
            e->type = e->cast_to;
            return e->type;
        }
        case Expr::K::Index: {
            TypePtr base = check_expr(e->lhs.get());
            TypePtr ixt = check_expr(e->rhs.get());
            if (ixt->kind != Type::K::Basic || is_float_kind(ixt->basic))
                err(e, "array index must be an integer");
            coerce(e->rhs, basic(BasicKind::Int));
            if (base->kind == Type::K::Array) e->type = base->elem;
            else if (base->kind == Type::K::Pointer) e->type = base->pointee;
            else err(e, "subscripted value is not an array or pointer");
            return e->type;
        }
        case Expr::K::Deref: {
            TypePtr t = check_expr(e->lhs.get());
            if (t->kind == Type::K::Array && e->lhs->kind == Expr::K::Var)
                t = decay(e->lhs.get());
            if (t->kind != Type::K::Pointer)
                err(e, "cannot dereference a non-pointer");
            e->type = t->pointee;
            return e->type;
        }
        case Expr::K::Field: {
            TypePtr base = check_expr(e->lhs.get());
            if (base->kind != Type::K::Struct && base->kind != Type::K::Union)
                err(e, "member access on a non-struct value");
            const StructField* f = find_field(*base, e->name);
            if (!f) err(e, "no member named '" + e->name + "'");
            e->type = f->type;
            return e->type;
        }
        case Expr::K::Call:
            err(e, "internal error: call not hoisted");
        }
        throw Error("unreachable");
    }

    TypePtr check_binary(Expr* e) {
        if (e->op == BinOp::LAnd || e->op == BinOp::LOr) {
            normalize_cond(e->lhs);
            normalize_cond(e->rhs);
            e->type = basic(BasicKind::Int);
            return e->type;
        }
        TypePtr lt = check_expr(e->lhs.get());
        TypePtr rt = check_expr(e->rhs.get());
        bool lptr = is_pointerish(e->lhs.get());
        bool rptr = is_pointerish(e->rhs.get());
        if (lptr || rptr) {
            if (is_comparison(e->op)) err(e, "pointer comparison is not supported");
            if (e->op != BinOp::Add && e->op != BinOp::Sub)
                err(e, "invalid pointer arithmetic");
            if (lptr && rptr) err(e, "pointer-pointer arithmetic is not supported");
            if (rptr && e->op == BinOp::Sub)
                err(e, "cannot subtract a pointer from an integer");
            Expr* pside = lptr ? e->lhs.get() : e->rhs.get();
            ExprPtr& iside = lptr ? e->rhs : e->lhs;
            TypePtr it = iside->type;
            if (it->kind != Type::K::Basic || is_float_kind(it->basic))
                err(e, "pointer offset must be an integer");
            coerce(iside, basic(BasicKind::Int));
            e->type = pside->type->kind == Type::K::Pointer ? pside->type
                                                            : decay(pside);
            return e->type;
        }
        if (lt->kind != Type::K::Basic || rt->kind != Type::K::Basic)
            err(e, "invalid operands to '" + std::string(binop_name(e->op)) + "'");
        BasicKind ck = common_kind(lt->basic, rt->basic);
        coerce(e->lhs, basic(ck));
        coerce(e->rhs, basic(ck));
        e->type = is_comparison(e->op) ? basic(BasicKind::Int) : basic(ck);
        return e->type;
    }

    // Conditions are normalized so codegen sees only comparison nodes and
    // &&/|| combinations of them: a bare value c becomes (c != 0).
    void normalize_cond(ExprPtr& c) {
        if (c->kind == Expr::K::Binary &&
            (c->op == BinOp::LAnd || c->op == BinOp::LOr)) {
            normalize_cond(c->lhs);
            normalize_cond(c->rhs);
            c->type = basic(BasicKind::Int);
            return;
        }
        if (c->kind == Expr::K::Binary && is_comparison(c->op)) {
            check_binary(c.get());
            return;
        }
        TypePtr t = check_expr(c.get());
        if (t->kind != Type::K::Basic)
            err(c.get(), "condition must be a scalar value");
        auto zero = std::make_unique<Expr>();
        if (is_float_kind(t->basic)) {
            zero->kind = Expr::K::FloatLit;
            zero->fval = 0.0;
        } else {
            zero->kind = Expr::K::IntLit;
            zero->value = 0;
        }
        zero->type = basic(computation_kind(t->basic));
        zero->line = c->line;
        zero->col = c->col;
        auto cmp = std::make_unique<Expr>();
        cmp->kind = Expr::K::Binary;
        cmp->op = BinOp::Ne;
        cmp->line = c->line;
        cmp->col = c->col;
        cmp->lhs = std::move(c);
        cmp->rhs = std::move(zero);
        check_binary(cmp.get());
        c = std::move(cmp);
    }

    // ---- call hoisting ----

    // Replaces every Call in e with a fresh temp var, emitting the temp decl
    // and call statement into `pre` (post-order, so argument calls run first).
    // The emitted statements are declared and checked here, so check_block
    // inserts them without touching them again.
    void hoist_calls(ExprPtr& e, std::vector<StmtPtr>& pre) {
        if (!e) return;
        hoist_calls(e->lhs, pre);
        hoist_calls(e->rhs, pre);
        for (auto& a : e->args) hoist_calls(a, pre);
        if (e->kind != Expr::K::Call) return;
        auto sig = funcs_.find(e->name);
        if (sig == funcs_.end())
            err(e.get(), "call to unknown function '" + e->name + "'");
        if (sig->second.ret->kind == Type::K::Void)
            err(e.get(), "void function used as a value");
        std::string tmp = "$t" + std::to_string(++temp_counter_);
        auto decl = std::make_unique<Stmt>();
        decl->kind = Stmt::K::Decl;
        decl->name = tmp;
        decl->decl_type = sig->second.ret;
        decl->line = e->line;
        decl->col = e->col;
        declare(decl.get(), tmp, decl->decl_type);
        auto call = std::make_unique<Stmt>();
        call->kind = Stmt::K::Call;
        call->name = e->name;
        call->args = std::move(e->args);
        call->line = e->line;
        call->col = e->col;
        auto tv = std::make_unique<Expr>();
        tv->kind = Expr::K::Var;
        tv->name = tmp;
        tv->line = e->line;
        tv->col = e->col;
        call->target = std::move(tv);
        check_call_stmt(call.get());
        pre.push_back(std::move(decl));
        pre.push_back(std::move(call));
        auto rep = std::make_unique<Expr>();
        rep->kind = Expr::K::Var;
        rep->name = tmp;
        rep->line = e->line;
        rep->col = e->col;
        check_expr(rep.get());
        e = std::move(rep);
    }

    // ---- statements ----

    void register_function(const Function* fn) {
        if (fn->ret->kind != Type::K::Basic && fn->ret->kind != Type::K::Void)
            err_at(fn->line, fn->col, "function return type must be basic or void");
        FuncSig sig;
        sig.ret = fn->ret;
        for (auto& p : fn->params) {
            if (p.type->kind != Type::K::Basic)
                err_at(fn->line, fn->col,
                       "parameter '" + p.name + "' must have a basic type");
            sig.params.push_back(p.type);
        }
        funcs_[fn->name] = std::move(sig);
    }

    void check_function(Function* fn) {
        const Function* saved_fn = current_fn_;
        auto saved_labels = std::move(labels_);
        auto saved_gotos = std::move(pending_gotos_);
        labels_.clear();
        pending_gotos_.clear();
        current_fn_ = fn;

        scopes_.emplace_back();
        for (auto& p : fn->params) {
            if (scopes_.back().count(p.name))
                err_at(fn->line, fn->col, "duplicate parameter '" + p.name + "'");
            scopes_.back()[p.name] = p.type;
        }
        check_block(fn->body);
        scopes_.pop_back();

        for (auto& [name, line] : pending_gotos_)
            if (!labels_[name].defined)
                err_at(line, 1, "goto targets label '" + name +
                                    "' which is never placed");

        current_fn_ = saved_fn;
        labels_ = std::move(saved_labels);
        pending_gotos_ = std::move(saved_gotos);
    }

    void check_decl(Stmt* st) {
        validate_var_type(st, st->decl_type);
        if (st->value) {
            if (st->decl_type->kind == Type::K::Pointer) {
                check_pointer_value(st->value, st->decl_type);
            } else if (st->decl_type->kind == Type::K::Basic) {
                TypePtr vt = check_expr(st->value.get());
                if (vt->kind != Type::K::Basic)
                    err(st, "initializer must be a basic value");
                coerce(st->value, st->decl_type);
            } else {
                err(st, "aggregate initializers are not supported");
            }
        }
        declare(st, st->name, st->decl_type);
    }

    // value must be a pointer into the same restrict array
    void check_pointer_value(ExprPtr& v, const TypePtr& pt) {
        TypePtr vt = check_expr(v.get());
        if (vt->kind == Type::K::Array && v->kind == Expr::K::Var)
            vt = decay(v.get());
        if (vt->kind != Type::K::Pointer)
            err(v.get(), "expected a pointer into array '" + pt->into + "'");
        if (vt->into != pt->into)
            err(v.get(), "pointer into '" + vt->into +
                             "' cannot bind to a pointer into '" + pt->into + "'");
        if (!type_equal(vt->pointee, pt->pointee))
            err(v.get(), "pointer element type mismatch");
    }

    void collect_var_refs(const Expr* e, std::set<std::string>& out) {
        if (!e) return;
        if (e->kind == Expr::K::Var) out.insert(e->name);
        collect_var_refs(e->lhs.get(), out);
        collect_var_refs(e->rhs.get(), out);
        for (auto& a : e->args) collect_var_refs(a.get(), out);
    }

    void collect_var_refs(const Stmt* st, std::set<std::string>& out) {
        collect_var_refs(st->target.get(), out);
        collect_var_refs(st->value.get(), out);
        collect_var_refs(st->cond.get(), out);
        for (auto& a : st->args) collect_var_refs(a.get(), out);
        collect_var_refs(st->body, out);
        collect_var_refs(st->else_body, out);
        if (st->fn) collect_var_refs(st->fn->body, out);
    }

    void collect_var_refs(const std::vector<StmtPtr>& body,
                          std::set<std::string>& out) {
        for (auto& st : body) collect_var_refs(st.get(), out);
    }

    void check_label_region(const Stmt* at, const std::string& label,
                            const std::set<std::string>& referenced) {
        for (const std::string& v : labels_[label].vars_after)
            if (referenced.count(v))
                err(at, "variable '" + v + "' is used after label '" + label +
                            "' but was declared after its __label__ declaration");
    }

    void check_block(std::vector<StmtPtr>& body) {
        block_stack_.push_back(&body);
        std::vector<std::string> labels_here;
        std::vector<StmtPtr> out;
        out.reserve(body.size());
        std::vector<std::string> interior_here;
        for (size_t i = 0; i < body.size(); ++i) {
            StmtPtr st = std::move(body[i]);
            std::vector<StmtPtr> pre; // already checked by hoist_calls
            check_stmt(st, pre, &body, i, labels_here);
            if (st && st->kind == Stmt::K::InteriorFn)
                interior_here.push_back(st->name);
            for (auto& p : pre) out.push_back(std::move(p));
            if (st) out.push_back(std::move(st));
        }
        body = std::move(out);
        // interior functions are not callable past their block
        for (auto& n : interior_here) funcs_.erase(n);
        block_stack_.pop_back();
    }

    void check_call_stmt(Stmt* st) {
        auto sig = funcs_.find(st->name);
        if (sig == funcs_.end())
            err(st, "call to unknown function '" + st->name + "'");
        if (st->args.size() != sig->second.params.size())
            err(st, "wrong number of arguments to '" + st->name + "'");
        for (size_t i = 0; i < st->args.size(); ++i) {
            TypePtr at = check_expr(st->args[i].get());
            if (at->kind != Type::K::Basic)
                err(st, "arguments must be basic values");
            coerce(st->args[i], sig->second.params[i]);
        }
        if (st->target) {
            TypePtr tt = check_expr(st->target.get());
            if (sig->second.ret->kind == Type::K::Void)
                err(st, "void function result cannot be assigned");
            if (!type_equal(tt, sig->second.ret))
                err(st, "internal error: call target type mismatch");
        }
        st->decl_type = sig->second.ret;
    }

    void check_assign_target(Expr* target) {
        switch (target->kind) {
        case Expr::K::Var:
        case Expr::K::Index:
        case Expr::K::Deref:
        case Expr::K::Field:
            break;
        default:
            err(target, "invalid assignment target");
        }
        TypePtr t = check_expr(target);
        if (t->kind == Type::K::Basic || t->kind == Type::K::Pointer) return;
        err(target, "cannot assign to a whole aggregate");
    }

    void check_stmt(StmtPtr& st, std::vector<StmtPtr>& pre,
                    std::vector<StmtPtr>* block, size_t index,
                    std::vector<std::string>& labels_here) {
        switch (st->kind) {
        case Stmt::K::Decl: {
            if (st->value) hoist_calls(st->value, pre);
            check_decl(st.get());
            // track declarations that follow an open __label__ in this block
            for (auto& ln : labels_here)
                if (!labels_[ln].defined) labels_[ln].vars_after.insert(st->name);
            return;
        }
        case Stmt::K::Assign: {
            hoist_calls(st->value, pre);
            if (st->target->kind == Expr::K::Index ||
                st->target->kind == Expr::K::Deref ||
                st->target->kind == Expr::K::Field) {
                // index/address parts must be pure too
                hoist_calls(st->target, pre);
                if (st->target->kind == Expr::K::Var)
                    err(st.get(), "internal error: target hoisted away");
            }
            check_assign_target(st->target.get());
            TypePtr tt = st->target->type;
            if (tt->kind == Type::K::Pointer) {
                check_pointer_value(st->value, tt);
            } else {
                TypePtr vt = check_expr(st->value.get());
                if (vt->kind != Type::K::Basic)
                    err(st.get(), "assigned value must be a basic value");
                coerce(st->value, tt);
            }
            return;
        }
        case Stmt::K::If: {
            hoist_calls(st->cond, pre);
            normalize_cond(st->cond);
            scopes_.emplace_back();
            check_block(st->body);
            scopes_.pop_back();
            scopes_.emplace_back();
            check_block(st->else_body);
            scopes_.pop_back();
            return;
        }
        case Stmt::K::While: {
            if (contains_call(st->cond.get()))
                err(st.get(), "calls in loop conditions are not supported");
            normalize_cond(st->cond);
            scopes_.emplace_back();
            check_block(st->body);
            scopes_.pop_back();
            return;
        }
        case Stmt::K::Block: {
            scopes_.emplace_back();
            check_block(st->body);
            scopes_.pop_back();
            return;
        }
        case Stmt::K::Goto: {
            auto it = labels_.find(st->name);
            if (it == labels_.end() || !it->second.declared)
                err(st.get(), "goto before '__label__ " + st->name +
                                  "' declaration");
            bool visible = false;
            for (const void* b : block_stack_)
                if (b == it->second.block) visible = true;
            if (!visible)
                err(st.get(), "label '" + st->name + "' is not in scope here");
            pending_gotos_.emplace_back(st->name, st->line);
            return;
        }
        case Stmt::K::LabelDecl: {
            if (!current_fn_) err(st.get(), "__label__ outside a function");
            LabelInfo& li = labels_[st->name];
            if (li.declared)
                err(st.get(), "label '" + st->name + "' declared twice");
            li.declared = true;
            li.block = block;
            labels_here.push_back(st->name);
            return;
        }
        case Stmt::K::Label: {
            auto it = labels_.find(st->name);
            if (it == labels_.end() || !it->second.declared)
                err(st.get(), "label '" + st->name +
                                  "' placed without a __label__ declaration");
            if (it->second.defined)
                err(st.get(), "label '" + st->name + "' placed twice");
            if (it->second.block != block)
                err(st.get(), "label '" + st->name +
                                  "' must be placed in the block that declares it");
            it->second.defined = true;
            std::set<std::string> refs;
            for (size_t j = index + 1; j < block->size(); ++j)
                collect_var_refs((*block)[j].get(), refs);
            check_label_region(st.get(), st->name, refs);
            return;
        }
        case Stmt::K::Return: {
            if (!current_fn_) err(st.get(), "return outside a function");
            if (st->value) {
                if (current_fn_->ret->kind == Type::K::Void)
                    err(st.get(), "void function cannot return a value");
                hoist_calls(st->value, pre);
                TypePtr vt = check_expr(st->value.get());
                if (vt->kind != Type::K::Basic)
                    err(st.get(), "return value must be a basic value");
                coerce(st->value, current_fn_->ret);
            }
            return;
        }
        case Stmt::K::Emit: {
            hoist_calls(st->value, pre);
            TypePtr vt = check_expr(st->value.get());
            if (vt->kind != Type::K::Basic)
                err(st.get(), "emit takes a basic value");
            BasicKind ck = computation_kind(vt->basic);
            coerce(st->value, basic(ck));
            st->decl_type = st->value->type;
            st->emit_slot = prog_.emit_slots++;
            return;
        }
        case Stmt::K::Call: {
            // parsed call statements never carry a result target; those come
            // in as assignments with a call value and get hoisted there
            for (auto& a : st->args) hoist_calls(a, pre);
            check_call_stmt(st.get());
            return;
        }
        case Stmt::K::ExprStmt: {
            hoist_calls(st->value, pre);
            // a bare hoisted call leaves just the temp var behind; that and
            // any other pure expression still gets evaluated for traps
            check_expr(st->value.get());
            return;
        }
        case Stmt::K::InteriorFn: {
            auto it = labels_.find(st->name);
            if (it == labels_.end() || !it->second.declared)
                err(st.get(), "interior function '" + st->name +
                                  "' needs a '__label__ " + st->name +
                                  "' declaration first");
            if (it->second.defined)
                err(st.get(), "label '" + st->name + "' placed twice");
            if (it->second.block != block)
                err(st.get(), "interior function '" + st->name +
                                  "' must be defined in the block that "
                                  "declares its label");
            it->second.defined = true;
            if (funcs_.count(st->name))
                err(st.get(), "function '" + st->name + "' redefined");
            register_function(st->fn.get());
            FuncSig sig = funcs_[st->name];
            funcs_.erase(st->name); // no self-recursion for interior functions
            // the body may reference enclosing locals declared before the
            // __label__ only
            std::set<std::string> body_refs;
            collect_var_refs(st->fn->body, body_refs);
            check_label_region(st.get(), st->name, body_refs);
            check_function(st->fn.get());
            funcs_[st->name] = std::move(sig);
            return;
        }
        }
    }
};

} // namespace detail

inline void typecheck(ast::Program& prog,
                      const std::string& filename = "<input>") {
    detail::Checker c(prog, filename);
    c.run();
}

} // namespace fxa::frontend
