// Copyright (c) fxacc contributors
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <boost/math/distributions/chi_squared.hpp>

#include "fxa/obfuscation.hpp"

using namespace fxa;
using obf::Loc;
using obf::Offset;

TEST_CASE("offset draws are deterministic in seed and draw index") {
    obf::Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) REQUIRE(obf::fresh_offset(a) == obf::fresh_offset(b));

    obf::Rng c(42);
    obf::fresh_offset(c); // one draw ahead
    obf::Rng d(42);
    bool all_equal = true;
    for (int i = 0; i < 16; ++i)
        if (obf::fresh_offset(c) != obf::fresh_offset(d)) all_equal = false;
    REQUIRE_FALSE(all_equal);
}

TEST_CASE("different seeds give different first draws") {
    obf::Rng a(1), b(2);
    REQUIRE(obf::fresh_offset(a) != obf::fresh_offset(b));
    obf::Rng c(0xdeadbeef), d(0xdeadbef0);
    REQUIRE(obf::fresh_offset(c) != obf::fresh_offset(d));
}

TEST_CASE("2000 draws spread uniformly across the top four bits") {
    obf::Rng rng(7);
    constexpr int kDraws = 2000, kBins = 16;
    int bins[kBins] = {};
    for (int i = 0; i < kDraws; ++i) ++bins[obf::fresh_offset(rng) >> 28];

    double expected = double(kDraws) / kBins;
    double stat = 0;
    for (int b = 0; b < kBins; ++b) {
        double d = bins[b] - expected;
        stat += d * d / expected;
    }
    boost::math::chi_squared dist(kBins - 1);
    double p = boost::math::cdf(boost::math::complement(dist, stat));
    INFO("chi-square statistic " << stat << ", p = " << p);
    REQUIRE(p > 0.001);
}

TEST_CASE("wide offsets take two draws, hi first") {
    obf::Rng a(99), b(99);
    u32 hi = obf::fresh_offset(b);
    u32 lo = obf::fresh_offset(b);
    Offset w = obf::fresh_wide(a);
    REQUIRE(w.wide);
    REQUIRE(w.hi == hi);
    REQUIRE(w.lo == lo);
}

TEST_CASE("temporary allocation moves strictly upward") {
    REQUIRE(obf::ralph_alloc(0) == 1);
    REQUIRE(obf::ralph_alloc(7) == 8);

    std::mt19937 rng(3);
    for (int i = 0; i < 1000; ++i) {
        u32 r = rng() % 100000;
        REQUIRE(obf::ralph_alloc(r) > r);
    }
    u32 t = 0;
    u32 prev = t;
    for (int i = 0; i < 500; ++i) {
        t = obf::ralph_alloc(t);
        REQUIRE(t > prev);
        prev = t;
    }
}

TEST_CASE("allocation past the register file is stack-backed") {
    Loc below = obf::temp_loc(obf::kSprBound - 1);
    REQUIRE(below.kind == Loc::Kind::Reg);
    REQUIRE(below.a == obf::kSprBound - 1);

    Loc first = obf::temp_loc(obf::kSprBound);
    REQUIRE(first.kind == Loc::Kind::Mem);
    REQUIRE(first.a == obf::kStackBase);

    Loc later = obf::temp_loc(obf::kSprBound + 5);
    REQUIRE(later.kind == Loc::Kind::Mem);
    REQUIRE(later.a == obf::kStackBase + 5);
}

TEST_CASE("offset database stores one entry per field stripe") {
    obf::OffsetDB db;
    Loc stripe = Loc::stripe(3, 1);
    db.set(stripe, Offset::word(17));
    db.set(stripe, Offset::word(23)); // same stripe, any element count
    REQUIRE(db.size() == 1);
    REQUIRE(db.at(stripe).lo == 23);
    REQUIRE_FALSE(db.contains(Loc::stripe(3, 2)));
    REQUIRE_THROWS_AS(db.at(Loc::reg(5)), Error);
}

TEST_CASE("a location backs at most one live variable") {
    obf::VarBinding vars;
    vars.bind("x", Loc::reg(5));
    REQUIRE_THROWS_AS(vars.bind("y", Loc::reg(5)), Error);

    vars.bind("y", Loc::reg(6));
    size_t m = vars.mark();
    vars.bind("x", Loc::reg(7)); // inner shadow
    REQUIRE(vars.lookup("x")->a == 7);
    REQUIRE_THROWS_AS(vars.bind("z", Loc::reg(5)), Error); // outer x is still live
    vars.unbind_to(m);
    REQUIRE(vars.lookup("x")->a == 5);
    vars.bind("z", Loc::reg(7)); // released by the block exit
    REQUIRE(vars.lookup("z")->a == 7);
}

namespace {

struct Fixture {
    cipher::CipherContext ctx{0x1234};
    cipher::ExecUnit eu{ctx};
    obf::OffsetDB db;
    obf::VarBinding vars;

    Fixture() {
        vars.bind("a", Loc::reg(5));
        vars.bind("b", Loc::reg(6)); // wide pair at r6/r7
        vars.bind("c", Loc::reg(8));
        db.set(Loc::reg(5), Offset::word(100));
        db.set(Loc::reg(6), Offset::pair(40, 50));
        db.set(Loc::reg(8), Offset::word(7));
    }
};

} // namespace

TEST_CASE("an unchanged scheme restores with zero instructions") {
    Fixture f;
    auto snap = obf::snapshot("L", f.db, f.vars);
    REQUIRE(snap.entries.size() == 3);
    auto code = obf::restore_code(snap, f.db, f.vars, f.ctx);
    REQUIRE(code.empty());
}

TEST_CASE("one drifted variable restores with one add of snap minus now") {
    Fixture f;
    auto snap = obf::snapshot("L", f.db, f.vars);
    f.db.set(Loc::reg(5), Offset::word(105)); // drifted +5

    auto code = obf::restore_code(snap, f.db, f.vars, f.ctx);
    REQUIRE(code.size() == 1);
    REQUIRE(code[0].op == isa::Opcode::addi);
    REQUIRE(code[0].regs[0] == 5);
    REQUIRE(code[0].regs[1] == 5);
    u32 k = f.ctx.decrypt(std::get<cipher::Ciphertext>(code[0].consts[0]));
    REQUIRE(k == u32(-5));
    REQUIRE(f.db.at(Loc::reg(5)) == Offset::word(100));

    // Differential check: applying the add really moves a resident value
    // back onto the snapshot displacement.
    u32 value = 1234;
    auto resident = f.ctx.encrypt(value + 105, cipher::Origin::Runtime);
    auto after = f.eu.ct_op(cipher::WOp::Add, resident,
                            std::get<cipher::Ciphertext>(code[0].consts[0]));
    REQUIRE(f.ctx.decrypt(after) == value + 100);
}

TEST_CASE("several drifted variables restore in declaration order") {
    Fixture f;
    auto snap = obf::snapshot("L", f.db, f.vars);
    f.db.set(Loc::reg(8), Offset::word(7 + 11));
    f.db.set(Loc::reg(6), Offset::pair(40 + 1, 50 - 2));

    auto code = obf::restore_code(snap, f.db, f.vars, f.ctx);
    REQUIRE(code.size() == 2);

    REQUIRE(code[0].op == isa::Opcode::addi2); // b declared before c
    REQUIRE(code[0].regs[0] == 6);
    auto pair = std::get<cipher::CipherPair>(code[0].consts[0]);
    REQUIRE(f.ctx.decrypt(pair.hi) == u32(-1));
    REQUIRE(f.ctx.decrypt(pair.lo) == u32(2));

    REQUIRE(code[1].op == isa::Opcode::addi);
    REQUIRE(code[1].regs[0] == 8);
    REQUIRE(f.ctx.decrypt(std::get<cipher::Ciphertext>(code[1].consts[0])) == u32(-11));

    REQUIRE(f.db.at(Loc::reg(6)) == Offset::pair(40, 50));
    REQUIRE(f.db.at(Loc::reg(8)) == Offset::word(7));

    // Pair adds are component-wise: each half keeps its own displacement.
    u64 value = 0x1111'2222'3333'4444ull;
    cipher::CipherPair resident = {
        f.ctx.encrypt(u32(value >> 32) + 41, cipher::Origin::Runtime),
        f.ctx.encrypt(u32(value) + 48, cipher::Origin::Runtime)};
    auto fixed = f.eu.ct_op(cipher::POp::AddCw, resident, pair);
    REQUIRE(f.ctx.decrypt(fixed.hi) == u32(value >> 32) + 40);
    REQUIRE(f.ctx.decrypt(fixed.lo) == u32(value) + 50);
}

TEST_CASE("restoring an unbound variable is a compile error") {
    Fixture f;
    auto snap = obf::snapshot("L", f.db, f.vars);
    obf::VarBinding fewer;
    fewer.bind("a", Loc::reg(5));
    fewer.bind("c", Loc::reg(8));
    REQUIRE_THROWS_AS(obf::restore_code(snap, f.db, fewer, f.ctx), Error);

    // Rebound elsewhere counts as unbound too.
    obf::VarBinding moved;
    moved.bind("a", Loc::reg(5));
    moved.bind("b", Loc::reg(9));
    moved.bind("c", Loc::reg(8));
    REQUIRE_THROWS_AS(obf::restore_code(snap, f.db, moved, f.ctx), Error);
}

TEST_CASE("snapshots keep declaration order and skip memory schemes") {
    obf::OffsetDB db;
    obf::VarBinding vars;
    vars.bind("n", Loc::reg(4));
    vars.bind("A", Loc::stripe(0, 0));
    vars.bind("m", Loc::reg(5));
    db.set(Loc::reg(4), Offset::word(1));
    db.set(Loc::stripe(0, 0), Offset::word(2));
    db.set(Loc::reg(5), Offset::word(3));

    auto snap = obf::snapshot("top", db, vars);
    REQUIRE(snap.label == "top");
    REQUIRE(snap.entries.size() == 2);
    REQUIRE(snap.entries[0].var == "n");
    REQUIRE(snap.entries[1].var == "m");
}
