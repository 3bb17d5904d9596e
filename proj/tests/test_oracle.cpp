// Reference interpreter semantics. Expected values here are frozen literals
// or host-arithmetic computations made independently of the interpreter, so
// a regression in the evaluator cannot hide behind its own definitions.
#include <catch2/catch_amalgamated.hpp>

#include "fxa/frontend.hpp"
#include "fxa/oracle.hpp"

#include <bit>
#include <cstdint>

using namespace fxa;
using oracle::OracleError;
using oracle::RunResult;

namespace {

ast::Program compile(const std::string& src) {
    ast::Program p = frontend::parse(src, "t.c");
    frontend::typecheck(p, "t.c");
    return p;
}

RunResult run(const std::string& src, std::vector<u64> in = {},
              u64 budget = 10'000'000) {
    ast::Program p = compile(src);
    return oracle::run(p, in, budget);
}

i32 ret_i32(const RunResult& r) { return i32(u32(r.ret_bits)); }

} // namespace

TEST_CASE("basic arithmetic and inputs") {
    REQUIRE(ret_i32(run("int main(int x) { return x + 1; }", {41})) == 42);
    REQUIRE(ret_i32(run("int main(int a, int b) { return a * b - 3; }",
                        {u64(u32(7)), u64(u32(6))})) == 39);
    // wide input arrives as raw 64-bit
    auto r = run("long long main(long long v) { return v / 10; }",
                 {u64(i64(-1234567890123LL))});
    REQUIRE(i64(r.ret_bits) == -123456789012LL);
}

TEST_CASE("integer semantics are frozen where ISO C leaves room") {
    SECTION("division truncates toward zero") {
        REQUIRE(ret_i32(run("int main() { return -7 / 2; }")) == -3);
        REQUIRE(ret_i32(run("int main() { return 7 / -2; }")) == -3);
        REQUIRE(ret_i32(run("int main() { int a = -7; int b = 2;"
                            " return a - (a / b) * b; }")) == -1);
    }
    SECTION("signed overflow wraps") {
        REQUIRE(ret_i32(run("int main() { return 2000000000 + 2000000000; }")) ==
                i32(u32(4000000000u)));
        // INT_MIN / -1 wraps back to INT_MIN instead of faulting
        REQUIRE(u32(run("int main() { int m = -2147483647 - 1;"
                        " return m / -1; }")
                        .ret_bits) == 0x80000000u);
    }
    SECTION("unsigned arithmetic is mod 2^32") {
        REQUIRE(u32(run("unsigned main() { unsigned a = 4000000000u;"
                        " return a + a; }")
                        .ret_bits) == u32(4000000000u + 4000000000u));
    }
    SECTION("64-bit multiplication wraps mod 2^64") {
        u64 expect = u64(9876543210123ull) * u64(9876543210123ull);
        auto r = run("unsigned long long main() {"
                     "  unsigned long long a = 9876543210123ull;"
                     "  return a * a;"
                     "}");
        REQUIRE(r.ret_bits == expect);
    }
}

TEST_CASE("narrowing casts store canonical 32-bit forms") {
    REQUIRE(ret_i32(run("int main() { short s = (short)70000; return s; }")) ==
            4464);
    REQUIRE(ret_i32(run("int main() { char c = (char)300; return c; }")) == 44);
    REQUIRE(ret_i32(run("int main() { char c = (char)200; return c; }")) == -56);
    REQUIRE(ret_i32(run("int main() { unsigned char c = (unsigned char)200;"
                        " return c; }")) == 200);
    REQUIRE(ret_i32(run("int main() { short s = (short)-70000; return s; }")) ==
            i32(std::int16_t(-70000)));
    SECTION("char constants behave as ints") {
        REQUIRE(ret_i32(run("int main() { char c = 'A'; return c + 1; }")) == 66);
    }
}

TEST_CASE("bool conversion tests against zero, not truncation") {
    REQUIRE(ret_i32(run("int main() { _Bool b = (_Bool)0.5; return b; }")) == 1);
    REQUIRE(ret_i32(run("int main() { _Bool b = (_Bool)0.0; return b; }")) == 0);
    REQUIRE(ret_i32(run("int main() { _Bool b = (_Bool)256; return b; }")) == 1);
    REQUIRE(ret_i32(run("int main(int x) { _Bool b = x; return b; }", {2})) == 1);
}

TEST_CASE("float semantics match host IEEE arithmetic bit for bit") {
    SECTION("single precision addition") {
        auto r = run("float main() { float a = 0.1f; float b = 0.2f;"
                     " return a + b; }");
        REQUIRE(u32(r.ret_bits) == std::bit_cast<u32>(0.1f + 0.2f));
    }
    SECTION("double division") {
        auto r = run("double main() { double a = 1.0; double b = 3.0;"
                     " return a / b; }");
        REQUIRE(r.ret_bits == std::bit_cast<u64>(1.0 / 3.0));
    }
    SECTION("float to int truncates toward zero") {
        REQUIRE(ret_i32(run("int main() { return (int)2.9; }")) == 2);
        REQUIRE(ret_i32(run("int main() { double d = -2.9; return (int)d; }")) ==
                -2);
    }
    SECTION("float div by zero gives infinity, not a trap") {
        auto r = run("float main() { float a = 1.0f; float b = 0.0f;"
                     " return a / b; }");
        REQUIRE_FALSE(r.trapped);
        REQUIRE(u32(r.ret_bits) == std::bit_cast<u32>(1.0f / 0.0f));
    }
    SECTION("int to float conversions round like the host") {
        auto r = run("float main() { unsigned u = 4000000000u; return u; }");
        REQUIRE(u32(r.ret_bits) == std::bit_cast<u32>(float(4000000000u)));
        auto r2 = run("double main() { long long v = 123456789012345ll;"
                      " return v; }");
        REQUIRE(r2.ret_bits == std::bit_cast<u64>(double(123456789012345LL)));
    }
    SECTION("float comparisons involving NaN") {
        // NaN != NaN holds; NaN < x is false
        auto r = run("int main() {"
                     "  double z = 0.0;"
                     "  double n = z / z;" // NaN
                     "  if (n != n) { return 1; }"
                     "  return 0;"
                     "}");
        REQUIRE(ret_i32(r) == 1);
    }
}

TEST_CASE("integer division by zero traps like the machine") {
    auto r = run("int main(int b) { int a = 5; return a / b; }", {0});
    REQUIRE(r.trapped);
    REQUIRE(r.trap == "integer division by zero");
    auto r2 = run("int main() { long long a = 5; long long b = 0;"
                  " return (int)(a / b); }");
    REQUIRE(r2.trapped);
}

TEST_CASE("everything is zero-initialized") {
    REQUIRE(ret_i32(run("int g; int main() { int x; return g + x; }")) == 0);
    REQUIRE(ret_i32(run("int main() { int a[5]; return a[3]; }")) == 0);
    REQUIRE(ret_i32(run("struct S { int a; int b; };"
                        "int main() { struct S s; return s.a + s.b; }")) == 0);
    SECTION("a function without a return statement yields zero") {
        REQUIRE(ret_i32(run("int f(int x) { emit(x); }"
                            "int main() { int r; r = f(3); return r + 1; }")) ==
                1);
    }
}

TEST_CASE("globals initialize in declaration order") {
    REQUIRE(ret_i32(run("int g1 = 5; int g2 = g1 * 3;"
                        "int main() { return g2; }")) == 15);
}

TEST_CASE("emit slots hold the last value per site") {
    auto r = run("int main(int n) {"
                 "  for (int i = 0; i < n; i = i + 1) { emit(i * 10); }"
                 "  emit(7);"
                 "  return 0;"
                 "}",
                 {5});
    REQUIRE(r.emits.size() == 2);
    REQUIRE(i32(u32(r.emits[0].bits)) == 40); // last loop iteration
    REQUIRE(i32(u32(r.emits[1].bits)) == 7);

    SECTION("a slot whose emit never runs reads zero with its declared kind") {
        auto q = run("int main(int n) {"
                     "  if (n > 100) { emit(2.5); }"
                     "  return 0;"
                     "}",
                     {1});
        REQUIRE(q.emits.size() == 1);
        REQUIRE(q.emits[0].bits == 0);
        REQUIRE(q.emits[0].kind == ast::BasicKind::Double);
    }
}

TEST_CASE("short-circuit evaluation guards the right-hand side") {
    auto r = run("int main(int b) {"
                 "  if (b != 0 && 10 / b > 1) { return 1; }"
                 "  return 0;"
                 "}",
                 {0});
    REQUIRE_FALSE(r.trapped);
    REQUIRE(ret_i32(r) == 0);
    auto r2 = run("int main(int b) {"
                  "  if (b == 0 || 10 / b > 1) { return 1; }"
                  "  return 0;"
                  "}",
                  {0});
    REQUIRE_FALSE(r2.trapped);
    REQUIRE(ret_i32(r2) == 1);
    SECTION("comparison results materialize as 0 or 1") {
        REQUIRE(ret_i32(run("int main(int x) { int t = x < 5;"
                            " int f = x > 5; return t * 10 + f; }",
                            {3})) == 10);
    }
}

TEST_CASE("arrays and restrict pointers") {
    const char* src = "int main(int n) {"
                      "  int A[6];"
                      "  restrict A int *p;"
                      "  for (int i = 0; i < 6; i = i + 1) { A[i] = i * i; }"
                      "  p = A + n;"
                      "  return *p + p[1] + p[-1];"
                      "}";
    // n=2: 4 + 9 + 1
    REQUIRE(ret_i32(run(src, {2})) == 14);

    SECTION("indexing out of bounds is an interpreter error, not silence") {
        REQUIRE_THROWS_AS(run("int main() { int A[3]; return A[5]; }"),
                          OracleError);
        REQUIRE_THROWS_AS(run("int main() { int A[3];"
                              "  restrict A int *p; p = A + 2;"
                              "  return p[1]; }"),
                          OracleError);
    }
    SECTION("an unbound pointer faults on use") {
        REQUIRE_THROWS_AS(run("int main() { int A[3];"
                              "  restrict A int *p;"
                              "  return *p; }"),
                          OracleError);
    }
    SECTION("wide elements occupy two words transparently") {
        auto r = run("double main() {"
                     "  double D[3];"
                     "  D[0] = 1.25; D[1] = 2.5; D[2] = D[0] + D[1];"
                     "  return D[2];"
                     "}");
        REQUIRE(r.ret_bits == std::bit_cast<u64>(1.25 + 2.5));
    }
}

TEST_CASE("struct values behave as independent per-field scalars") {
    auto r = run("struct Pt { int x; int y; };"
                 "int main() {"
                 "  struct Pt a; struct Pt b;"
                 "  a.x = 3; a.y = 4; b.x = 10; b.y = 20;"
                 "  return a.x * b.y + a.y * b.x;" // 60 + 40
                 "}");
    REQUIRE(ret_i32(r) == 100);
    SECTION("arrays of structs stripe per element") {
        auto q = run("struct P { int v; double w; };"
                     "int main() {"
                     "  struct P ps[3];"
                     "  for (int i = 0; i < 3; i = i + 1) {"
                     "    ps[i].v = i + 1;"
                     "    ps[i].w = ps[i].v * 1.5;"
                     "  }"
                     "  return ps[2].v * (int)ps[1].w;" // 3 * (int)3.0
                     "}");
        REQUIRE(ret_i32(q) == 9);
    }
    SECTION("nested struct fields resolve through the path") {
        auto q = run("struct In { int a; int b; };"
                     "struct Out { int k; struct In in; };"
                     "int main() {"
                     "  struct Out o;"
                     "  o.k = 1; o.in.a = 2; o.in.b = 3;"
                     "  return o.k + o.in.a * o.in.b;"
                     "}");
        REQUIRE(ret_i32(q) == 7);
    }
}

TEST_CASE("union members overlay the same words") {
    SECTION("float/int punning matches bit_cast") {
        auto r = run("int main() {"
                     "  union { int i; float f; } u;"
                     "  u.f = 1.5f;"
                     "  return u.i;"
                     "}");
        REQUIRE(u32(r.ret_bits) == std::bit_cast<u32>(1.5f));
    }
    SECTION("a double overlays two words, high word first") {
        auto r = run("int main() {"
                     "  union { struct { int a; float b[2]; }; double c[2]; } u;"
                     "  u.c[0] = 1.0;"
                     "  return u.a;"
                     "}");
        u64 bits = std::bit_cast<u64>(1.0);
        REQUIRE(u32(r.ret_bits) == u32(bits >> 32));
        auto r2 = run("float main() {"
                      "  union { struct { int a; float b[2]; }; double c[2]; } u;"
                      "  u.c[0] = 1.0;"
                      "  return u.b[0];"
                      "}");
        REQUIRE(u32(r2.ret_bits) == u32(bits & 0xFFFFFFFFull));
    }
    SECTION("writes through one member read back through another") {
        auto r = run("int main() {"
                     "  union { unsigned long long w; struct { int hi; int lo; }; } u;"
                     "  u.hi = 2; u.lo = 3;"
                     "  return (int)(u.w / 4294967296ull) * 100 + (int)u.w;"
                     "}");
        REQUIRE(ret_i32(r) == 203);
    }
}

TEST_CASE("control flow runs as written") {
    SECTION("nested if/else") {
        const char* src = "int main(int x) {"
                          "  if (x < 0) { return -1; }"
                          "  else { if (x == 0) { return 0; } return 1; }"
                          "}";
        REQUIRE(ret_i32(run(src, {u64(u32(i32(-5)))})) == -1);
        REQUIRE(ret_i32(run(src, {0})) == 0);
        REQUIRE(ret_i32(run(src, {9})) == 1);
    }
    SECTION("while loops") {
        REQUIRE(ret_i32(run("int main(int n) {"
                            "  int s = 0; int i = 1;"
                            "  while (i <= n) { s = s + i; i = i + 1; }"
                            "  return s;"
                            "}",
                            {100})) == 5050);
    }
    SECTION("goto forward and backward") {
        REQUIRE(ret_i32(run("int main() {"
                            "  int i = 0; int s = 0;"
                            "  __label__ top;"
                            "  top:"
                            "  s = s + i; i = i + 1;"
                            "  if (i < 5) { goto top; }"
                            "  return s;"
                            "}")) == 10);
        REQUIRE(ret_i32(run("int main(int x) {"
                            "  __label__ done;"
                            "  if (x > 0) { goto done; }"
                            "  x = 100;"
                            "  done:"
                            "  return x;"
                            "}",
                            {42})) == 42);
    }
    SECTION("a declaration after a label re-runs on every pass") {
        REQUIRE(ret_i32(run("int main() {"
                            "  int i = 0;"
                            "  __label__ L;"
                            "  L:"
                            "  int w;"
                            "  w = w + 5;"
                            "  i = i + 1;"
                            "  if (i < 3) { goto L; }"
                            "  return w;"
                            "}")) == 5);
    }
}

TEST_CASE("recursion works for top-level functions") {
    REQUIRE(ret_i32(run("int fib(int n) {"
                        "  if (n < 2) { return n; }"
                        "  int a; int b;"
                        "  a = fib(n - 1); b = fib(n - 2);"
                        "  return a + b;"
                        "}"
                        "int main() { return fib(10); }")) == 55);
    SECTION("functions must be defined before use") {
        REQUIRE_THROWS_AS(compile("int f(int n) { return g(n); }"
                                  "int g(int n) { return n; }"
                                  "int main() { return f(1); }"),
                          frontend::CompileError);
    }
    SECTION("runaway recursion hits the depth limit") {
        REQUIRE_THROWS_AS(run("int f(int n) { int r; r = f(n + 1); return r; }"
                              "int main() { return f(0); }"),
                          OracleError);
    }
}

TEST_CASE("interior functions mutate enclosing locals") {
    auto r = run("int main(int n) {"
                 "  int acc = 0;"
                 "  __label__ bump;"
                 "  int bump(int d) { acc = acc + d; return acc; }"
                 "  int r = 0;"
                 "  r = bump(n);"
                 "  r = bump(2);"
                 "  emit(r);"
                 "  return acc;"
                 "}",
                 {40});
    REQUIRE(ret_i32(r) == 42);
    REQUIRE(i32(u32(r.emits[0].bits)) == 42);

    SECTION("the body sees declaration-point bindings, not call-site shadows") {
        auto q = run("int main() {"
                     "  int x = 1;"
                     "  __label__ get;"
                     "  int get(int d) { return x + d; }"
                     "  int r = 0;"
                     "  {"
                     "    int x = 50;"
                     "    r = get(x);" // argument uses the inner x
                     "  }"
                     "  return r;"
                     "}");
        REQUIRE(ret_i32(q) == 51);
    }
    SECTION("interior functions may call top-level functions") {
        auto q = run("int twice(int v) { return v * 2; }"
                     "int main() {"
                     "  int base = 10;"
                     "  __label__ f;"
                     "  int f(int d) { int t; t = twice(d); return base + t; }"
                     "  int r = 0;"
                     "  r = f(5);"
                     "  return r;"
                     "}");
        REQUIRE(ret_i32(q) == 20);
    }
}

TEST_CASE("the step budget stops runaway programs") {
    REQUIRE_THROWS_AS(run("int main() { while (1) { } return 0; }", {}, 5000),
                      OracleError);
    // a branchy but terminating program finishes within a sane budget
    auto r = run("int main() {"
                 "  int s = 0;"
                 "  for (int i = 0; i < 1000; i = i + 1) { s = s + i; }"
                 "  return s;"
                 "}");
    REQUIRE(ret_i32(r) == 499500);
    REQUIRE(r.steps > 1000);
}

TEST_CASE("parameters are coerced at the call boundary") {
    REQUIRE(ret_i32(run("int f(short s) { return s; }"
                        "int main() { int r; r = f(70000); return r; }")) ==
            4464);
    auto r = run("double half(double d) { return d / 2.0; }"
                 "int main() { double r; r = half(7); emit(r); return 0; }");
    REQUIRE(r.emits[0].bits == std::bit_cast<u64>(3.5));
}
