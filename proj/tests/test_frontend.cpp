// Parser and type checker behavior: grammar coverage, diagnostics for the
// unsupported C features, promotion/conversion cast insertion, call hoisting,
// label visibility rules, and the pretty-printer round trip.
#include <catch2/catch_amalgamated.hpp>

#include "fxa/frontend.hpp"

#include <regex>

using namespace fxa;
using namespace fxa::ast;
using frontend::CompileError;
using Catch::Matchers::ContainsSubstring;

namespace {

Program parsed(const std::string& src) { return frontend::parse(src, "t.c"); }

Program checked(const std::string& src) {
    Program p = frontend::parse(src, "t.c");
    frontend::typecheck(p, "t.c");
    return p;
}

std::string error_of(const std::string& src) {
    try {
        checked(src);
    } catch (const CompileError& e) {
        return e.what();
    }
    return "";
}

// every diagnostic carries file:line:col
void require_located(const std::string& msg) {
    INFO(msg);
    REQUIRE(std::regex_search(msg, std::regex("^t\\.c:[0-9]+:[0-9]+: ")));
}

// walk all expressions in a statement list
template <typename F>
void for_each_expr(const Expr* e, F&& f) {
    if (!e) return;
    f(e);
    for_each_expr(e->lhs.get(), f);
    for_each_expr(e->rhs.get(), f);
    for (auto& a : e->args) for_each_expr(a.get(), f);
}

template <typename F>
void for_each_expr(const std::vector<StmtPtr>& body, F&& f) {
    for (auto& st : body) {
        for_each_expr(st->target.get(), f);
        for_each_expr(st->value.get(), f);
        for_each_expr(st->cond.get(), f);
        for (auto& a : st->args) for_each_expr(a.get(), f);
        for_each_expr(st->body, f);
        for_each_expr(st->else_body, f);
        if (st->fn) for_each_expr(st->fn->body, f);
    }
}

} // namespace

TEST_CASE("a minimal program parses to one function") {
    Program p = parsed("int main(int x){return x+1;}");
    REQUIRE(p.functions.size() == 1);
    const Function* f = p.find_function("main");
    REQUIRE(f != nullptr);
    REQUIRE(f->params.size() == 1);
    REQUIRE(f->params[0].name == "x");
    REQUIRE(f->body.size() == 1);
    REQUIRE(f->body[0]->kind == Stmt::K::Return);
    const Expr* v = f->body[0]->value.get();
    REQUIRE(v->kind == Expr::K::Binary);
    REQUIRE(v->op == BinOp::Add);
}

TEST_CASE("restrict declarations produce pointers bound to their array") {
    Program p = checked("int main() {"
                        "  int A[8];"
                        "  restrict A int *p;"
                        "  p = A + 2;"
                        "  *p = 5;"
                        "  return p[1];"
                        "}");
    const Function* f = p.find_function("main");
    const Stmt* decl = f->body[1].get();
    REQUIRE(decl->kind == Stmt::K::Decl);
    REQUIRE(decl->name == "p");
    REQUIRE(decl->decl_type->kind == Type::K::Pointer);
    REQUIRE(decl->decl_type->into == "A");
    REQUIRE(decl->decl_type->pointee->basic == BasicKind::Int);

    SECTION("a pointer cannot bind into a different array") {
        std::string msg = error_of("int main() {"
                                   "  int A[4]; int B[4];"
                                   "  restrict A int *p;"
                                   "  p = B;"
                                   "  return 0;"
                                   "}");
        REQUIRE_THAT(msg, ContainsSubstring("cannot bind"));
    }
    SECTION("element types must match") {
        std::string msg = error_of("int main() {"
                                   "  float A[4];"
                                   "  restrict A int *p;"
                                   "  p = A;"
                                   "  return 0;"
                                   "}");
        REQUIRE_THAT(msg, ContainsSubstring("element type"));
    }
    SECTION("pointer comparisons are rejected") {
        std::string msg = error_of("int main() {"
                                   "  int A[4];"
                                   "  restrict A int *p; p = A;"
                                   "  if (p < A + 2) { return 1; }"
                                   "  return 0;"
                                   "}");
        REQUIRE_THAT(msg, ContainsSubstring("pointer comparison"));
    }
}

TEST_CASE("excluded language features get explicit diagnostics") {
    SECTION("string literals") {
        std::string msg = error_of("int main() { char *s = \"hi\"; return 0; }");
        require_located(msg);
        REQUIRE_THAT(msg, ContainsSubstring("string literals are not supported"));
    }
    SECTION("preprocessor directives") {
        std::string msg = error_of("#include <stdio.h>\nint main() { return 0; }");
        require_located(msg);
        REQUIRE_THAT(msg, ContainsSubstring("preprocessor"));
    }
    SECTION("varargs") {
        std::string msg = error_of("int f(int a, ...) { return a; }"
                                   "int main() { return f(1); }");
        require_located(msg);
        REQUIRE_THAT(msg, ContainsSubstring("not supported"));
    }
    SECTION("switch") {
        std::string msg = error_of("int main(int x) {"
                                   "  switch (x) { default: return 1; }"
                                   "}");
        require_located(msg);
        REQUIRE_THAT(msg, ContainsSubstring("not supported"));
    }
    SECTION("the ternary operator") {
        std::string msg = error_of("int main(int x) { return x ? 1 : 2; }");
        REQUIRE_THAT(msg, ContainsSubstring("?:"));
    }
    SECTION("bitwise operators") {
        std::string msg = error_of("int main(int x) { return x & 1; }");
        REQUIRE_THAT(msg, ContainsSubstring("bitwise"));
    }
    SECTION("assignment inside an expression") {
        std::string msg = error_of("int main(int x) { int y; return y = x; }");
        require_located(msg);
        REQUIRE_THAT(msg, ContainsSubstring("assignment inside an expression"));
    }
}

TEST_CASE("the pretty printer round-trips parse output") {
    const char* sources[] = {
        "int main(int x){return x+1;}",

        "int g = 3;\n"
        "int add(int a, int b) { return a + b; }\n"
        "int main(int n) { int v; v = add(n, g); return v * 2; }",

        "struct Pt { int x; int y; };\n"
        "int main() { struct Pt p; p.x = 1; p.y = 2; return p.x + p.y; }",

        "union U { int i; float f; };\n"
        "int main() { union U u; u.f = 1.5f; return u.i; }",

        "int main(int n) {\n"
        "  int A[8];\n"
        "  restrict A int *p;\n"
        "  p = A + 1;\n"
        "  for (int i = 0; i < 8; i = i + 1) { A[i] = i % 3; }\n"
        "  *p = -A[0];\n"
        "  if (n > 0 && A[1] != 0) { emit(A[1]); } else { emit(0); }\n"
        "  while (n) { n = n - 1; }\n"
        "  return p[0];\n"
        "}",

        "double scale(double d, float f) { return d * f; }\n"
        "int main() {\n"
        "  long long w = 123456789012345ll;\n"
        "  unsigned u = 4000000000u;\n"
        "  short s = (short)70000;\n"
        "  char c = 'A';\n"
        "  _Bool b = !c;\n"
        "  emit(scale(2.5, 1.5f));\n"
        "  return s + c + b + (int)u + (int)w;\n"
        "}",

        "int main() {\n"
        "  int i = 0;\n"
        "  __label__ top;\n"
        "  top:\n"
        "  i = i + 1;\n"
        "  if (i < 4) { goto top; }\n"
        "  return i;\n"
        "}",
    };
    for (const char* src : sources) {
        INFO(src);
        Program once = parsed(src);
        std::string printed = frontend::print_program(once);
        INFO(printed);
        Program twice = frontend::parse(printed, "t.c");
        REQUIRE(program_equal(once, twice));
        // printing is a fixed point after one round
        REQUIRE(frontend::print_program(twice) == printed);
    }
}

TEST_CASE("narrow integer operands are promoted with explicit casts") {
    Program p = checked("int main() {"
                        "  short a = 1; short b = 2;"
                        "  int r = a + b;"
                        "  return r;"
                        "}");
    const Function* f = p.find_function("main");
    const Stmt* decl = f->body[2].get();
    REQUIRE(decl->name == "r");
    const Expr* sum = decl->value.get();
    REQUIRE(sum->kind == Expr::K::Binary);
    REQUIRE(sum->lhs->kind == Expr::K::Cast);
    REQUIRE(sum->lhs->cast_to->basic == BasicKind::Int);
    REQUIRE(sum->lhs->lhs->kind == Expr::K::Var);
    REQUIRE(sum->rhs->kind == Expr::K::Cast);
    REQUIRE(sum->rhs->cast_to->basic == BasicKind::Int);

    SECTION("no arithmetic node keeps an operand narrower than 32 bits") {
        const char* srcs[] = {
            "int main() { char c = 'a'; short s = 2; unsigned char u = 3;"
            "  return c * s + u - c / s; }",
            "int main() { _Bool b = 1; short s = -2;"
            "  if (b < s) { return s; } return b + s; }",
            "int main() { short s = 5; float f = 0.5f;"
            "  double d = s * f; emit(d); return 0; }",
        };
        for (const char* src : srcs) {
            Program q = checked(src);
            for_each_expr(q.find_function("main")->body, [](const Expr* e) {
                if (e->kind != Expr::K::Binary) return;
                if (e->op == BinOp::LAnd || e->op == BinOp::LOr) return;
                for (const Expr* side : {e->lhs.get(), e->rhs.get()}) {
                    REQUIRE(side->type != nullptr);
                    if (side->type->kind != Type::K::Basic) continue;
                    BasicKind k = side->type->basic;
                    if (is_float_kind(k)) continue;
                    REQUIRE(int_width(k) >= 32);
                }
            });
        }
    }
}

TEST_CASE("usual arithmetic conversions pick the wider type") {
    Program p = checked("int main() {"
                        "  int i = 3; double d = 0.5;"
                        "  double r = i * d;"
                        "  unsigned u = 1; long long w = 2;"
                        "  long long m = u + w;"
                        "  return (int)r + (int)m;"
                        "}");
    const Function* f = p.find_function("main");
    const Expr* prod = f->body[2]->value.get();
    REQUIRE(prod->type->basic == BasicKind::Double);
    REQUIRE(prod->lhs->kind == Expr::K::Cast);
    REQUIRE(prod->lhs->cast_to->basic == BasicKind::Double);
    const Expr* sum = f->body[5]->value.get();
    REQUIRE(sum->type->basic == BasicKind::LongLong);
    REQUIRE(sum->lhs->cast_to->basic == BasicKind::LongLong);
}

TEST_CASE("assigning an int into a double inserts a conversion") {
    Program p = checked("int main() { int i = 7; double d; d = i; return 0; }");
    const Stmt* assign = p.find_function("main")->body[2].get();
    REQUIRE(assign->kind == Stmt::K::Assign);
    REQUIRE(assign->value->kind == Expr::K::Cast);
    REQUIRE(assign->value->cast_to->basic == BasicKind::Double);
    REQUIRE(assign->value->lhs->kind == Expr::K::Var);
}

TEST_CASE("goto is only legal after its label declaration") {
    SECTION("goto before __label__") {
        std::string msg = error_of("int main() {"
                                   "  goto L;"
                                   "  __label__ L;"
                                   "  L: return 0;"
                                   "}");
        require_located(msg);
        REQUIRE_THAT(msg, ContainsSubstring("goto before"));
    }
    SECTION("goto with no declaration at all") {
        std::string msg = error_of("int main() { goto L; return 0; }");
        REQUIRE_THAT(msg, ContainsSubstring("goto before"));
    }
    SECTION("a declared label must be placed somewhere") {
        std::string msg = error_of("int main() {"
                                   "  __label__ L;"
                                   "  goto L;"
                                   "  return 0;"
                                   "}");
        REQUIRE_THAT(msg, ContainsSubstring("never placed"));
    }
    SECTION("valid label use checks out") {
        REQUIRE_NOTHROW(checked("int main() {"
                                "  int i = 0;"
                                "  __label__ again;"
                                "  again:"
                                "  i = i + 1;"
                                "  if (i < 3) { goto again; }"
                                "  return i;"
                                "}"));
    }
}

TEST_CASE("variables used after a label predate its __label__ declaration") {
    std::string msg = error_of("int main() {"
                               "  __label__ L;"
                               "  int w = 1;" // declared inside the window
                               "  goto L;"
                               "  L:"
                               "  emit(w);" // referenced after the label
                               "  return 0;"
                               "}");
    require_located(msg);
    REQUIRE_THAT(msg, ContainsSubstring("declared after its __label__"));

    SECTION("declaring the variable first is fine") {
        REQUIRE_NOTHROW(checked("int main() {"
                                "  int w = 1;"
                                "  __label__ L;"
                                "  goto L;"
                                "  L:"
                                "  emit(w);"
                                "  return 0;"
                                "}"));
    }
    SECTION("window variables may be used before the label is placed") {
        REQUIRE_NOTHROW(checked("int main() {"
                                "  __label__ L;"
                                "  int w = 1;"
                                "  w = w + 1;" // before L: only
                                "  goto L;"
                                "  L: return 0;"
                                "}"));
    }
}

TEST_CASE("calls are hoisted out of expressions into fresh temps") {
    Program p = checked("int f(int x) { return x + 1; }"
                        "int main() {"
                        "  int y = f(1) + f(f(2));"
                        "  return y;"
                        "}");
    const Function* f = p.find_function("main");
    // expect: $t decl, call, $t decl, call, $t decl, call, y decl, return
    std::vector<Stmt::K> kinds;
    for (auto& st : f->body) kinds.push_back(st->kind);
    REQUIRE(kinds == std::vector<Stmt::K>{
                         Stmt::K::Decl, Stmt::K::Call, Stmt::K::Decl,
                         Stmt::K::Call, Stmt::K::Decl, Stmt::K::Call,
                         Stmt::K::Decl, Stmt::K::Return});
    // every call statement targets a fresh temp
    for (auto& st : f->body) {
        if (st->kind != Stmt::K::Call) continue;
        REQUIRE(st->target != nullptr);
        REQUIRE(st->target->kind == Expr::K::Var);
        REQUIRE(st->target->name.substr(0, 2) == "$t");
    }
    // the y initializer is now call-free
    const Stmt* ydecl = f->body[6].get();
    REQUIRE(ydecl->name == "y");
    for_each_expr(ydecl->value.get(), [](const Expr* e) {
        REQUIRE(e->kind != Expr::K::Call);
    });

    SECTION("calls in loop conditions are rejected") {
        std::string msg = error_of("int f(int x) { return x; }"
                                   "int main() {"
                                   "  while (f(1)) { return 1; }"
                                   "  return 0;"
                                   "}");
        REQUIRE_THAT(msg, ContainsSubstring("loop conditions"));
    }
    SECTION("calls in if conditions are hoisted ahead of the branch") {
        Program q = checked("int f(int x) { return x; }"
                            "int main() {"
                            "  if (f(3) > 2) { return 1; }"
                            "  return 0;"
                            "}");
        const Function* m = q.find_function("main");
        REQUIRE(m->body[0]->kind == Stmt::K::Decl);
        REQUIRE(m->body[1]->kind == Stmt::K::Call);
        REQUIRE(m->body[2]->kind == Stmt::K::If);
    }
}

TEST_CASE("conditions are normalized to comparisons") {
    Program p = checked("int main(int n) {"
                        "  while (n) { n = n - 1; }"
                        "  if (n + 1) { return 2; }"
                        "  return 0;"
                        "}");
    const Function* f = p.find_function("main");
    const Expr* wc = f->body[0]->cond.get();
    REQUIRE(wc->kind == Expr::K::Binary);
    REQUIRE(wc->op == BinOp::Ne);
    REQUIRE(wc->rhs->kind == Expr::K::IntLit);
    const Expr* ic = f->body[1]->cond.get();
    REQUIRE(ic->op == BinOp::Ne);
    REQUIRE(ic->lhs->kind == Expr::K::Binary);
}

TEST_CASE("emit assigns output slots in source order") {
    Program p = checked("int main() {"
                        "  emit(1);"
                        "  emit(2.5);"
                        "  short s = 3;"
                        "  emit(s);"
                        "  return 0;"
                        "}");
    REQUIRE(p.emit_slots == 3);
    const Function* f = p.find_function("main");
    std::vector<const Stmt*> emits;
    for (auto& st : f->body)
        if (st->kind == Stmt::K::Emit) emits.push_back(st.get());
    REQUIRE(emits.size() == 3);
    REQUIRE(emits[0]->emit_slot == 0);
    REQUIRE(emits[1]->emit_slot == 1);
    REQUIRE(emits[2]->emit_slot == 2);
    REQUIRE(emits[0]->decl_type->basic == BasicKind::Int);
    REQUIRE(emits[1]->decl_type->basic == BasicKind::Double);
    // a short emit is promoted to a full word
    REQUIRE(emits[2]->decl_type->basic == BasicKind::Int);
    REQUIRE(emits[2]->value->kind == Expr::K::Cast);
}

TEST_CASE("interior functions require their label and see outer locals") {
    const char* good = "int main(int n) {"
                       "  int acc = 0;"
                       "  __label__ bump;"
                       "  int bump(int d) { acc = acc + d; return acc; }"
                       "  int r;"
                       "  r = bump(n);"
                       "  r = bump(2);"
                       "  return acc + r;"
                       "}";
    REQUIRE_NOTHROW(checked(good));

    SECTION("missing __label__ declaration") {
        std::string msg = error_of("int main() {"
                                   "  int f(int x) { return x; }"
                                   "  return 0;"
                                   "}");
        REQUIRE_THAT(msg, ContainsSubstring("__label__"));
    }
    SECTION("body cannot use variables declared inside the label window") {
        std::string msg = error_of("int main() {"
                                   "  __label__ f;"
                                   "  int v = 1;"
                                   "  int f(int x) { return x + v; }"
                                   "  return 0;"
                                   "}");
        REQUIRE_THAT(msg, ContainsSubstring("declared after its __label__"));
    }
    SECTION("interior functions cannot call themselves") {
        std::string msg = error_of("int main() {"
                                   "  __label__ f;"
                                   "  int f(int x) { int r; r = f(x); return r; }"
                                   "  return 0;"
                                   "}");
        REQUIRE_THAT(msg, ContainsSubstring("unknown function"));
    }
}

TEST_CASE("type errors are reported with locations") {
    struct Case {
        const char* src;
        const char* expect;
    } cases[] = {
        {"int main() { return q; }", "undeclared identifier"},
        {"int main() { int x; int x; return 0; }", "redeclaration"},
        {"struct S { int a; };"
         "int main() { struct S u; struct S v; u = v; return 0; }",
         "aggregate"},
        {"int main() { int A[3]; int B[3]; A = B; return 0; }", "aggregate"},
        {"int main() { float f; return f[0]; }", "not an array"},
        {"int main() { int x; return x.a; }", "non-struct"},
        {"struct S { int a; }; int main() { struct S s; return s.b; }",
         "no member named 'b'"},
        {"int main() { return f(1); }", "unknown function"},
        {"int f(int a) { return a; } int main() { return f(1, 2); }",
         "wrong number of arguments"},
        {"int main() { int x = main; return x; }", "undeclared identifier"},
        {"void v(int a) { emit(a); } int main() { int x = v(1); return x; }",
         "void function used as a value"},
        {"struct S { int a[4]; };" // arrays in plain structs
         "int main() { struct S s; return 0; }",
         "arrays only inside unions"},
    };
    for (auto& c : cases) {
        INFO(c.src);
        std::string msg = error_of(c.src);
        require_located(msg);
        REQUIRE_THAT(msg, ContainsSubstring(c.expect));
    }
}

TEST_CASE("aggregate declarations type-check against their layout rules") {
    SECTION("unions may hold arrays and structs of scalars") {
        REQUIRE_NOTHROW(checked(
            "int main() {"
            "  union { struct { int a; float b[2]; }; double c[2]; } u;"
            "  u.a = 1;"
            "  u.b[0] = 1.5f;"
            "  u.c[1] = 2.5;"
            "  return u.a;"
            "}"));
    }
    SECTION("struct arrays with scalar fields work") {
        REQUIRE_NOTHROW(checked("struct Pt { int x; int y; };"
                                "int main() {"
                                "  struct Pt ps[3];"
                                "  ps[0].x = 1;"
                                "  ps[2].y = ps[0].x + 1;"
                                "  return ps[2].y;"
                                "}"));
    }
    SECTION("anonymous members are looked through") {
        Program p = checked("int main() {"
                            "  union { struct { int a; }; int w; } u;"
                            "  u.a = 5;"
                            "  return u.w;"
                            "}");
        REQUIRE(p.find_function("main") != nullptr);
    }
}

TEST_CASE("literal suffixes and kinds survive parsing") {
    Program p = checked("int main() {"
                        "  long long big = 123456789012345ll;"
                        "  unsigned u = 7u;"
                        "  float f = 1.5f;"
                        "  double d = 2.5;"
                        "  return (int)(big + u) + (int)(f + d);"
                        "}");
    const Function* m = p.find_function("main");
    REQUIRE(m->body[0]->value->type->basic == BasicKind::LongLong);
    REQUIRE(m->body[1]->value->type->basic == BasicKind::UInt);
    REQUIRE(m->body[2]->value->type->basic == BasicKind::Float);
    REQUIRE(m->body[3]->value->type->basic == BasicKind::Double);
}
