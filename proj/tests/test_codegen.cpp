// Differential tests: every program is compiled at several seeds, executed
// on the simulated machine, and compared bit-for-bit against the plaintext
// reference interpreter. Shape and statistics checks close the loop on the
// properties the code generator promises (uniform displacement draws, fixed
// trace shape across seeds, write storms covering whole stripes).
#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>
#include <string>
#include <vector>

#include "fxa/codegen.hpp"
#include "fxa/frontend.hpp"
#include "fxa/oracle.hpp"
#include "fxa/vm.hpp"

using namespace fxa;

namespace {

ast::Program checked(const std::string& src) {
    ast::Program p = frontend::parse(src);
    frontend::typecheck(p);
    return p;
}

// canonical input bits as the reference interpreter shapes them
u64 canon_input(u64 raw, ast::BasicKind k) {
    u64 v = oracle::sem::canon_int(raw, k);
    if (k == ast::BasicKind::Float) v &= 0xFFFFFFFFull;
    return v;
}

std::vector<vm::IoValue> encrypt_inputs(const cipher::CipherContext& ctx,
                                        const isa::ObjectCode& obj,
                                        const ast::Program& prog,
                                        const std::vector<u64>& raw) {
    const ast::Function* main = prog.find_function("main");
    REQUIRE(main != nullptr);
    auto ins = obj.schedule.inputs();
    REQUIRE(ins.size() == raw.size());
    std::vector<vm::IoValue> out;
    for (size_t i = 0; i < ins.size(); ++i) {
        u64 v = canon_input(raw[i], main->params[i].type->basic);
        vm::IoValue io;
        io.pair = ins[i]->pair;
        if (io.pair) {
            io.p.hi = ctx.encrypt(u32(v >> 32) + ins[i]->delta_hi, cipher::Origin::Runtime);
            io.p.lo = ctx.encrypt(u32(v) + ins[i]->delta_lo, cipher::Origin::Runtime);
        } else {
            io.w = ctx.encrypt(u32(v) + ins[i]->delta_lo, cipher::Origin::Runtime);
        }
        out.push_back(io);
    }
    return out;
}

u64 decrypt_output(const cipher::CipherContext& ctx, const vm::IoValue& v,
                   const isa::IoEntry& e) {
    if (e.pair) {
        u32 hi = ctx.decrypt(v.p.hi) - e.delta_hi;
        u32 lo = ctx.decrypt(v.p.lo) - e.delta_lo;
        return (u64(hi) << 32) | lo;
    }
    return u64(u32(ctx.decrypt(v.w) - e.delta_lo));
}

// Compile at one seed and compare against the reference on each input set.
void diff_one_seed(const ast::Program& prog, u64 seed,
                   const std::vector<std::vector<u64>>& input_sets) {
    cipher::CipherContext ctx(0xC0FFEE00u + seed);
    codegen::CompileResult cr = codegen::compile(prog, ctx, seed);
    cipher::ExecUnit eu(ctx);

    for (size_t t = 0; t < input_sets.size(); ++t) {
        INFO("seed " << seed << " input set " << t);
        oracle::RunResult ref = oracle::run(prog, input_sets[t]);
        auto inputs = encrypt_inputs(ctx, cr.object, prog, input_sets[t]);
        vm::RunResult got = vm::run(eu, cr.object, inputs);

        if (ref.trapped) {
            REQUIRE(got.status == vm::RunStatus::TrapDivide);
            continue;
        }
        REQUIRE(got.status == vm::RunStatus::Ok);

        auto outs = cr.object.schedule.outputs();
        REQUIRE(got.outputs.size() == outs.size());
        for (size_t k = 0; k < outs.size(); ++k) {
            u64 bits = decrypt_output(ctx, got.outputs[k], *outs[k]);
            INFO("output '" << outs[k]->name << "'");
            if (outs[k]->name == "ret") {
                REQUIRE(bits == ref.ret_bits);
            } else {
                size_t slot = std::stoul(outs[k]->name.substr(4));
                REQUIRE(slot < ref.emits.size());
                REQUIRE(bits == ref.emits[slot].bits);
            }
        }
    }
}

void diff(const std::string& src, const std::vector<std::vector<u64>>& input_sets,
          std::vector<u64> seeds = {11, 22, 33}) {
    ast::Program prog = checked(src);
    for (u64 s : seeds) diff_one_seed(prog, s, input_sets);
}

u64 fbits(float f) {
    u32 w;
    std::memcpy(&w, &f, 4);
    return w;
}

u64 dbits(double d) {
    u64 w;
    std::memcpy(&w, &d, 8);
    return w;
}

} // namespace

TEST_CASE("int arithmetic, branches and emits match the reference") {
    diff("int main(int a, int b) {\n"
         "  int c = a * 3 + b / 2;\n"
         "  if (c > b) { c = c - b; } else { c = b - c; }\n"
         "  emit(c % 7);\n"
         "  return c - a;\n"
         "}\n",
         {{5, 9}, {u64(-4) & 0xFFFFFFFF, 3}, {0, 0}, {100, u64(-50) & 0xFFFFFFFF}});
}

TEST_CASE("unsigned arithmetic and unsigned compares match") {
    diff("unsigned int main(unsigned int a, unsigned int b) {\n"
         "  unsigned int q = a / (b + 1u);\n"
         "  if (a < b) { q = q + 13u; }\n"
         "  if (a >= 2000000000u) { q = q * 2u; }\n"
         "  return q * b + a;\n"
         "}\n",
         {{7, 3}, {3000000000ull, 5}, {0, 4000000000ull}, {123456, 123456}});
}

TEST_CASE("long long arithmetic matches") {
    diff("long long main(long long x, long long y) {\n"
         "  long long p = x * y;\n"
         "  if (x < y) { p = p + 1ll; }\n"
         "  long long q = x / (y + 1ll);\n"
         "  emit(p - q);\n"
         "  return p + q * 3ll;\n"
         "}\n",
         {{5, 9}, {u64(-77), 3}, {0x123456789ull, 0x1000ull}, {u64(-1), u64(-2)}});
}

TEST_CASE("unsigned long long division and compares match") {
    diff("unsigned long long main(unsigned long long x, unsigned long long y) {\n"
         "  unsigned long long q = x / (y + 1ull);\n"
         "  if (x > y) { q = q + x; }\n"
         "  return q;\n"
         "}\n",
         {{10, 3}, {0xFFFFFFFFFFFFFFFFull, 2}, {5, 0xFFFFFFFFFFFFFFFFull}});
}

TEST_CASE("float arithmetic and ordered compares match, NaN included") {
    diff("float main(float a, float b) {\n"
         "  float c = a * b + 1.5f;\n"
         "  if (a < b) { c = c / b; }\n"
         "  if (a == a) { c = c + 2.0f; }\n"
         "  emit(c - a);\n"
         "  return c;\n"
         "}\n",
         {{fbits(1.5f), fbits(2.0f)},
          {fbits(-3.25f), fbits(0.0f)},
          {0x7FC00000ull, fbits(1.0f)}, // NaN left
          {fbits(1.0f), 0x7FC00000ull}}); // NaN right
}

TEST_CASE("double arithmetic and compares match") {
    diff("double main(double a, double b) {\n"
         "  double c = a / b;\n"
         "  if (a >= b) { c = c * 2.0; }\n"
         "  if (a != b) { c = c + b; }\n"
         "  return c + a;\n"
         "}\n",
         {{dbits(8.5), dbits(2.0)},
          {dbits(-1.0), dbits(3.0)},
          {dbits(0.0), dbits(0.0)},
          {0x7FF8000000000000ull, dbits(1.0)}}); // NaN
}

TEST_CASE("narrow casts truncate and extend like the reference") {
    diff("int main(int a) {\n"
         "  char c = (char)a;\n"
         "  short s = (short)(a + 100);\n"
         "  unsigned char u = (unsigned char)(a * 3);\n"
         "  unsigned short w = (unsigned short)(a - 7);\n"
         "  emit((int)c);\n"
         "  emit((int)s);\n"
         "  emit((int)w);\n"
         "  return (int)u + (int)c;\n"
         "}\n",
         {{5}, {200}, {u64(-130) & 0xFFFFFFFF}, {70000}, {0x7FFFFFFF}});
}

TEST_CASE("conversion matrix matches the reference") {
    diff("double main(int i, unsigned int u, long long l, float f, double d) {\n"
         "  double s = (double)i + (double)u + (double)l + (double)f + d;\n"
         "  float g = (float)i + (float)u + (float)l + f + (float)d;\n"
         "  long long x = (long long)f + (long long)d + (long long)i + (long long)u;\n"
         "  unsigned long long y = (unsigned long long)i + (unsigned long long)f;\n"
         "  int b = (int)f + (int)d + (int)l;\n"
         "  unsigned int c = (unsigned int)l + (unsigned int)d;\n"
         "  emit(g);\n"
         "  emit(x);\n"
         "  emit(y);\n"
         "  emit(b);\n"
         "  emit(c);\n"
         "  return s;\n"
         "}\n",
         {{17, 40, 1000, fbits(2.5f), dbits(9.25)},
          {u64(-8) & 0xFFFFFFFF, 3000000000ull, u64(-123456), fbits(-7.75f), dbits(-2.5)},
          {0, 0, 0, fbits(0.0f), dbits(0.0)}});
}

TEST_CASE("logical operators short-circuit like the reference") {
    diff("int main(int a, int b) {\n"
         "  _Bool t = a > 0 && b / a > 1;\n" // divide guarded by &&
         "  int r = 0;\n"
         "  if (t || a == b) { r = 10; }\n"
         "  if (!t && b < 0) { r = r + 5; }\n"
         "  return r + (int)t;\n"
         "}\n",
         {{2, 6}, {0, 6}, {0, 0}, {3, u64(-9) & 0xFFFFFFFF}});
}

TEST_CASE("while loops keep the displacement scheme consistent") {
    diff("int main(int n) {\n"
         "  int s = 0;\n"
         "  int i = 0;\n"
         "  while (i < n) {\n"
         "    s = s + i * i;\n"
         "    i = i + 1;\n"
         "  }\n"
         "  return s;\n"
         "}\n",
         {{0}, {1}, {10}, {50}});
}

TEST_CASE("nested loops and conditionals match") {
    diff("int main(int n) {\n"
         "  int total = 0;\n"
         "  for (int i = 0; i < n; i = i + 1) {\n"
         "    for (int j = 0; j < i; j = j + 1) {\n"
         "      if (j % 2 == 0) { total = total + j; } else { total = total - 1; }\n"
         "    }\n"
         "  }\n"
         "  return total;\n"
         "}\n",
         {{0}, {3}, {9}});
}

TEST_CASE("goto forward and backward preserves the scheme") {
    diff("int main(int n) {\n"
         "  int acc = 0;\n"
         "  int i = 0;\n"
         "  __label__ again;\n"
         "  __label__ done;\n"
         "again:\n"
         "  acc = acc + i;\n"
         "  i = i + 1;\n"
         "  if (i < n) { goto again; }\n"
         "  if (acc > 100) { goto done; }\n"
         "  acc = acc * 2;\n"
         "done:\n"
         "  return acc + i;\n"
         "}\n",
         {{0}, {5}, {20}});
}

TEST_CASE("arrays and restrict pointers match the reference") {
    diff("int main(int n) {\n"
         "  int A[4];\n"
         "  restrict A int *p;\n"
         "  A[0] = n;\n"
         "  A[1] = n + 1;\n"
         "  A[2] = n * 2;\n"
         "  A[3] = 7;\n"
         "  p = A + 1;\n"
         "  int s = p[0] + p[1];\n"
         "  *p = s;\n"
         "  return A[1] + A[3] + p[2];\n"
         "}\n",
         {{0}, {5}, {u64(-3) & 0xFFFFFFFF}});
}

TEST_CASE("dynamic array indexing matches") {
    diff("int main(int n) {\n"
         "  int A[8];\n"
         "  for (int i = 0; i < 8; i = i + 1) { A[i] = i * n; }\n"
         "  int s = 0;\n"
         "  for (int i = 0; i < 8; i = i + 1) { s = s + A[7 - i]; }\n"
         "  return s + A[n % 8];\n"
         "}\n",
         {{1}, {5}, {12}});
}

TEST_CASE("register structs match the reference") {
    diff("struct Pt { int x; int y; };\n"
         "int main(int a) {\n"
         "  struct Pt p;\n"
         "  p.x = a;\n"
         "  p.y = a * 2;\n"
         "  struct Pt q;\n"
         "  q.x = p.y - 1;\n"
         "  q.y = p.x + p.y;\n"
         "  return q.x * 10 + q.y;\n"
         "}\n",
         {{0}, {7}, {u64(-4) & 0xFFFFFFFF}});
}

TEST_CASE("struct arrays with static and dynamic indices match") {
    diff("struct Pt { int x; int y; };\n"
         "int main(int n) {\n"
         "  struct Pt ps[3];\n"
         "  int i = 0;\n"
         "  while (i < 3) {\n"
         "    ps[i].x = n + i;\n"
         "    ps[i].y = i * i;\n"
         "    i = i + 1;\n"
         "  }\n"
         "  ps[1].y = ps[0].x + ps[2].y;\n"
         "  return ps[0].x + ps[1].y * 10 + ps[2].x;\n"
         "}\n",
         {{0}, {4}, {100}});
}

TEST_CASE("union punning matches the reference") {
    diff("int main(float f) {\n"
         "  union { float f; unsigned int u; } v;\n"
         "  v.f = f;\n"
         "  unsigned int b = v.u / 65536u;\n"
         "  v.u = b;\n"
         "  emit(v.f);\n"
         "  return (int)b;\n"
         "}\n",
         {{fbits(1.5f)}, {fbits(-2.25f)}, {fbits(0.0f)}});
}

TEST_CASE("union with anonymous struct and arrays matches") {
    diff("int main(int n) {\n"
         "  union { struct { int a; float b[2]; }; double c[2]; } u;\n"
         "  u.a = n;\n"
         "  u.b[0] = 1.5f;\n"
         "  u.b[1] = 2.5f;\n"
         "  int k = n % 2;\n"
         "  u.c[k] = 3.25;\n"
         "  emit(u.b[1]);\n"
         "  emit(u.c[0]);\n"
         "  return u.a;\n"
         "}\n",
         {{0}, {1}, {9}});
}

TEST_CASE("wide union members overlap like the reference") {
    diff("int main(long long x) {\n"
         "  union { long long v; unsigned int w[2]; } u;\n"
         "  u.v = x;\n"
         "  unsigned int lo = u.w[1];\n"
         "  unsigned int hi = u.w[0];\n"
         "  u.w[0] = lo;\n"
         "  u.w[1] = hi;\n"
         "  emit(u.v);\n"
         "  return (int)(u.v / 65536ll);\n"
         "}\n",
         {{0x0102030405060708ull}, {u64(-1)}, {42}});
}

TEST_CASE("interior functions share their defining frame") {
    diff("int main(int n) {\n"
         "  int acc = 0;\n"
         "  __label__ bump;\n"
         "  int bump(int d) {\n"
         "    acc = acc + d;\n"
         "    return acc;\n"
         "  }\n"
         "  int r = bump(n);\n"
         "  r = bump(r);\n"
         "  return r + acc;\n"
         "}\n",
         {{1}, {5}, {u64(-2) & 0xFFFFFFFF}});
}

TEST_CASE("calls instantiate one body per call site") {
    ast::Program prog = checked(
        "int inc(int x) { return x + 1; }\n"
        "int twice(int x) { return inc(x) + inc(x + 10); }\n"
        "int main(int a) { return twice(a) + inc(a); }\n");
    cipher::CipherContext ctx(0xAB);
    codegen::CompileResult cr = codegen::compile(prog, ctx, 5);
    // main, twice, two incs inside twice, inc in main
    REQUIRE(cr.stats.instance_count == 5);
    for (u64 s : {11ull, 22ull, 33ull})
        diff_one_seed(prog, s, {{0}, {41}, {u64(-11) & 0xFFFFFFFF}});
}

TEST_CASE("recursion re-enters the active instance") {
    ast::Program prog = checked(
        "int fib(int n) {\n"
        "  if (n < 2) { return n; }\n"
        "  return fib(n - 1) + fib(n - 2);\n"
        "}\n"
        "int main(int n) { return fib(n); }\n");
    cipher::CipherContext ctx(0xAC);
    codegen::CompileResult cr = codegen::compile(prog, ctx, 5);
    REQUIRE(cr.stats.instance_count == 2); // main and one fib body
    for (u64 s : {11ull, 22ull, 33ull})
        diff_one_seed(prog, s, {{0}, {1}, {8}});
}

TEST_CASE("globals persist across calls") {
    diff("int g;\n"
         "int counter() { g = g + 1; return g; }\n"
         "int main(int n) {\n"
         "  g = n;\n"
         "  int a = counter();\n"
         "  int b = counter();\n"
         "  return a * 100 + b + g;\n"
         "}\n",
         {{0}, {40}});
}

TEST_CASE("integer division by zero traps in both worlds") {
    diff("int main(int a, int b) { return a / b; }\n",
         {{10, 2}, {10, 0}, {u64(-10) & 0xFFFFFFFF, 0}});
    diff("int main(int a, int b) { return a % b; }\n",
         {{10, 3}, {10, 0}});
    diff("long long main(long long a, long long b) { return a / b; }\n",
         {{100, 7}, {100, 0}});
    diff("unsigned int main(unsigned int a, unsigned int b) { return a / b; }\n",
         {{100, 7}, {100, 0}});
}

TEST_CASE("compilation is deterministic for a fixed key and seed") {
    const std::string src =
        "int main(int n) {\n"
        "  int A[4];\n"
        "  for (int i = 0; i < 4; i = i + 1) { A[i] = i * n; }\n"
        "  if (n > 2) { return A[3]; }\n"
        "  return A[1];\n"
        "}\n";
    ast::Program p1 = checked(src);
    ast::Program p2 = checked(src);
    cipher::CipherContext c1(0x99), c2(0x99);
    codegen::CompileResult r1 = codegen::compile(p1, c1, 42);
    codegen::CompileResult r2 = codegen::compile(p2, c2, 42);
    REQUIRE(isa::encode_object(r1.object) == isa::encode_object(r2.object));
}

namespace {

struct ShapeEntry {
    isa::Opcode op;
    std::vector<u32> regs;
    bool cmp_outcome; // branch outcome normalized for polarity
    bool has_slot;
    u32 slot;
    i32 jump; // absolute transfers only; relative displacements vary
    bool operator==(const ShapeEntry&) const = default;
};

std::vector<ShapeEntry> trace_shape(const vm::Trace& tr) {
    std::vector<ShapeEntry> out;
    for (const auto& e : tr) {
        if (e.op == isa::Opcode::b) continue;
        ShapeEntry s;
        s.op = isa::canonical_branch(e.op);
        s.regs = e.regs;
        s.cmp_outcome = e.has_branch &&
                        (e.branch_taken != isa::is_negated_branch(e.op));
        s.has_slot = e.has_slot;
        s.slot = e.has_slot ? e.slot : 0;
        s.jump = isa::op_info(e.op).jump == isa::JumpKind::Absolute ? e.jump : 0;
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace

TEST_CASE("trace shape is invariant across seeds") {
    const std::string src =
        "int main(int n) {\n"
        "  int A[6];\n"
        "  int s = 0;\n"
        "  for (int i = 0; i < 6; i = i + 1) { A[i] = i; }\n"
        "  for (int i = 0; i < n; i = i + 1) {\n"
        "    if (i % 2 == 0) { s = s + A[i % 6]; } else { s = s - 1; }\n"
        "  }\n"
        "  return s;\n"
        "}\n";
    ast::Program prog = checked(src);

    std::vector<ShapeEntry> base;
    size_t base_len = 0;
    for (u64 seed = 1; seed <= 8; ++seed) {
        cipher::CipherContext ctx(0x5000 + seed);
        codegen::CompileResult cr = codegen::compile(prog, ctx, seed);
        cipher::ExecUnit eu(ctx);
        auto inputs = encrypt_inputs(ctx, cr.object, prog, {9});
        vm::RunResult rr = vm::run(eu, cr.object, inputs);
        REQUIRE(rr.status == vm::RunStatus::Ok);
        auto shape = trace_shape(rr.trace);
        if (seed == 1) {
            base = std::move(shape);
            base_len = cr.object.instructions.size();
        } else {
            REQUIRE(cr.object.instructions.size() == base_len);
            REQUIRE(shape == base);
        }
    }
}

TEST_CASE("a store into an n-word stripe issues exactly n stores") {
    struct Case {
        u32 n;
        const char* src;
    };
    const Case cases[] = {
        {1, "int main(int v) { int A[1]; A[0] = v; return A[0]; }"},
        {4, "int main(int v) { int A[4]; A[2] = v; return A[2]; }"},
        {8, "int main(int v) { int A[8]; A[v % 8] = v; return A[3]; }"},
        {64, "int main(int v) { int A[64]; A[5] = v; return A[5]; }"},
        {100, "int main(int v) { int A[100]; A[v % 100] = v; return A[7]; }"},
    };
    for (const auto& c : cases) {
        INFO("stripe of " << c.n);
        ast::Program prog = checked(c.src);
        cipher::CipherContext ctx(0x600 + c.n);
        codegen::CompileResult cr = codegen::compile(prog, ctx, 3);
        // one storm for the assignment; the zero fill at the declaration is
        // not a storm and must not be recorded
        REQUIRE(cr.stats.storm_sizes == std::vector<u32>{c.n});

        // count executed stores: fill writes each word once, the storm adds
        // exactly n more
        cipher::ExecUnit eu(ctx);
        auto inputs = encrypt_inputs(ctx, cr.object, prog, {9});
        vm::RunResult rr = vm::run(eu, cr.object, inputs);
        REQUIRE(rr.status == vm::RunStatus::Ok);
        u32 stores = 0;
        for (const auto& e : rr.trace)
            if (e.op == isa::Opcode::sw) ++stores;
        REQUIRE(stores == 2 * c.n);
    }
}

TEST_CASE("field storms stay inside their own stripe") {
    // every write takes a fresh physical slot, so read slots reveal which
    // write last touched each word: y reads must still see the declaration
    // fill, x reads must all see the storm
    ast::Program prog = checked(
        "struct Pt { int x; int y; };\n"
        "int main(int n) {\n"
        "  struct Pt ps[3];\n"
        "  ps[n % 3].x = n;\n"
        "  return ps[0].y + ps[1].y + ps[2].y + ps[0].x + ps[1].x + ps[2].x;\n"
        "}\n");
    cipher::CipherContext ctx(0x700);
    codegen::CompileResult cr = codegen::compile(prog, ctx, 9);
    // the x stripe holds three words
    REQUIRE(cr.stats.storm_sizes == std::vector<u32>{3});

    cipher::ExecUnit eu(ctx);
    auto inputs = encrypt_inputs(ctx, cr.object, prog, {4});
    vm::RunResult rr = vm::run(eu, cr.object, inputs);
    REQUIRE(rr.status == vm::RunStatus::Ok);

    std::vector<u32> store_slots, load_slots;
    for (const auto& e : rr.trace) {
        if (e.op == isa::Opcode::sw) store_slots.push_back(e.slot);
        if (e.op == isa::Opcode::lw) load_slots.push_back(e.slot);
    }
    // fill of both stripes (slots 0..5), then the three-store storm (6..8)
    REQUIRE(store_slots == std::vector<u32>{0, 1, 2, 3, 4, 5, 6, 7, 8});
    // the storm's own decoy traffic loads two x words, then the return
    // expression reads all six fields
    REQUIRE(load_slots.size() == 8);
    auto tail = load_slots.end() - 6;
    // y reads come first and hit fill-era slots; x reads hit storm-era slots
    REQUIRE(std::set<u32>(tail, tail + 3) == std::set<u32>{3, 4, 5});
    REQUIRE(std::set<u32>(tail + 3, load_slots.end()) == std::set<u32>{6, 7, 8});
}

TEST_CASE("union overlap classes collapse to shared stripes") {
    auto stripe_count = [](const std::string& src) {
        ast::Program prog = checked(src);
        cipher::CipherContext ctx(0x800);
        codegen::CompileResult cr = codegen::compile(prog, ctx, 4);
        u32 stripes = 0;
        for (const auto& [loc, off] : cr.offsets)
            if (loc.kind == obf::Loc::Kind::Stripe) ++stripes;
        return stripes;
    };
    // two wide scalars overlap word-for-word but hi and lo words never mix
    REQUIRE(stripe_count("union { long long x; long long y; } u;\n"
                         "int main(int a) { u.x = (long long)a; return (int)u.y; }\n") == 2);
    // an int array ties both words of the wide member into one class
    REQUIRE(stripe_count("union { int a[2]; long long x; } u;\n"
                         "int main(int v) { u.a[0] = v; return (int)u.x; }\n") == 1);
    // plain struct array: one stripe per field
    REQUIRE(stripe_count("struct Pt { int x; int y; };\n"
                         "struct Pt ps[4];\n"
                         "int main(int v) { ps[0].x = v; return ps[0].y; }\n") == 2);
}

TEST_CASE("every control-flow merge restores the scheme") {
    const std::string src =
        "int main(int n) {\n"
        "  int A[4];\n"
        "  int s = 0;\n"
        "  for (int i = 0; i < 4; i = i + 1) { A[i] = i; }\n"
        "  for (int i = 0; i < n; i = i + 1) {\n"
        "    if (i % 2 == 0) { A[i % 4] = s; } else { s = s + A[i % 4]; }\n"
        "  }\n"
        "  return s;\n"
        "}\n";
    ast::Program prog = checked(src);
    for (u64 seed = 1; seed <= 6; ++seed) {
        cipher::CipherContext ctx(0x900 + seed);
        codegen::CompileResult cr = codegen::compile(prog, ctx, seed);
        REQUIRE(cr.stats.join_checks > 0);
        REQUIRE(cr.stats.join_failures == 0);
    }
}

TEST_CASE("narrowing divisors are blinded, never bare powers of two") {
    ast::Program prog = checked(
        "int main(int a) { char c = (char)a; short s = (short)a; return (int)c + (int)s; }\n");
    u32 bare = 0;
    for (u64 seed = 1; seed <= 40; ++seed) {
        cipher::CipherContext ctx(0xB000 + seed);
        codegen::CompileResult cr = codegen::compile(prog, ctx, seed);
        for (const auto& ins : cr.object.instructions) {
            for (const auto& c : ins.consts) {
                if (const auto* w = std::get_if<cipher::Ciphertext>(&c)) {
                    u32 v = ctx.decrypt(*w);
                    if (v == (1u << 24) || v == (1u << 16)) ++bare;
                }
            }
        }
    }
    REQUIRE(bare <= 1); // a displaced constant may collide once by chance
}

TEST_CASE("output displacements spread across the word") {
    ast::Program prog = checked("int main(int a) { return a + 1; }\n");
    std::set<u32> bins;
    for (u64 seed = 0; seed < 64; ++seed) {
        cipher::CipherContext ctx(0xD000 + seed);
        codegen::CompileResult cr = codegen::compile(prog, ctx, seed);
        for (const auto* out : cr.object.schedule.outputs())
            if (out->name == "ret") bins.insert(out->delta_lo >> 28);
    }
    REQUIRE(bins.size() >= 8); // 64 draws over 16 bins
}
