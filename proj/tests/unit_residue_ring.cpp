#include <doctest.h>

#include <detfactor/residue_ring.hpp>

#include "oracles.hpp"

#include <random>

using namespace detfactor;

TEST_CASE("bitlen is ceil(log2 N)") {
    CHECK(ModulusContext(mpz_class(2)).bitlen() == 1);
    CHECK(ModulusContext(mpz_class(3)).bitlen() == 2);
    CHECK(ModulusContext(mpz_class(4)).bitlen() == 2);
    CHECK(ModulusContext(mpz_class(5)).bitlen() == 3);
    CHECK(ModulusContext(mpz_class(91)).bitlen() == 7);
    CHECK(ModulusContext(mpz_class(1009)).bitlen() == 10);
    CHECK(ModulusContext((mpz_class(1) << 61) - 1).bitlen() == 61);
    CHECK(ModulusContext(mpz_class(1) << 61).bitlen() == 61);
    CHECK(ModulusContext((mpz_class(1) << 61) + 1).bitlen() == 62);
}

TEST_CASE("construction rejects N < 2") {
    CHECK_THROWS_AS(ModulusContext(mpz_class(1)), std::invalid_argument);
    CHECK_THROWS_AS(ModulusContext(mpz_class(0)), std::invalid_argument);
    CHECK_THROWS_AS(ModulusContext(mpz_class(-7)), std::invalid_argument);
}

TEST_CASE("residue canonicalizes signed input") {
    ModulusContext ctx(mpz_class(97));
    CHECK(ctx.residue(mpz_class(0)).value() == 0);
    CHECK(ctx.residue(mpz_class(-1)).value() == 96);
    CHECK(ctx.residue(mpz_class(97)).value() == 0);
    CHECK(ctx.residue(mpz_class(-970)).value() == 0);
    CHECK(ctx.residue(mpz_class(100)).value() == 3);

    std::mt19937_64 rng(11);
    for (int t = 0; t < 200; ++t) {
        const mpz_class N = oracle::random_bits(rng, 100) + 2;
        ModulusContext c(N);
        const mpz_class z = oracle::random_signed(rng, 256);
        const Residue r = c.residue(z);
        CHECK(r.value() == oracle::mod_n(z, N));
        CHECK(r.value() >= 0);
        CHECK(r.value() < N);
    }
}

TEST_CASE("ring operations match direct integer arithmetic") {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 100; ++t) {
        const mpz_class N = oracle::random_bits(rng, 80) + 2;
        ModulusContext c(N);
        const mpz_class za = oracle::random_signed(rng, 120), zb = oracle::random_signed(rng, 120);
        const Residue a = c.residue(za), b = c.residue(zb);
        CHECK(c.add(a, b).value() == oracle::mod_n(za + zb, N));
        CHECK(c.sub(a, b).value() == oracle::mod_n(za - zb, N));
        CHECK(c.mul(a, b).value() == oracle::mod_n(za * zb, N));
        CHECK(c.neg(a).value() == oracle::mod_n(-za, N));
        Residue acc = a;
        c.mul_assign(acc, b);
        CHECK(acc.value() == oracle::mod_n(za * zb, N));
        acc = a;
        c.add_assign(acc, b);
        CHECK(acc.value() == oracle::mod_n(za + zb, N));
    }
}

TEST_CASE("invert_or_divisor covers all three outcomes") {
    ModulusContext ctx(mpz_class(91)); // 7 * 13

    const InvertOutcome inv = ctx.invert_or_divisor(ctx.residue(3L));
    REQUIRE(inv.is_inverse());
    CHECK(ctx.mul(inv.inverse_value(), ctx.residue(3L)).value() == 1);

    const InvertOutcome div = ctx.invert_or_divisor(ctx.residue(21L));
    REQUIRE(div.is_divisor());
    CHECK(div.witness().g == 7);
    CHECK(div.witness().g > 1);
    CHECK(mpz_divisible_p(ctx.modulus().get_mpz_t(), div.witness().g.get_mpz_t()));

    const InvertOutcome zero = ctx.invert_or_divisor(ctx.zero());
    CHECK(zero.is_zero());
    CHECK(!zero.is_inverse());
    CHECK(!zero.is_divisor());
}

TEST_CASE("invert_or_divisor ticks the gcd counter") {
    auto counters = std::make_shared<OpCounters>();
    ModulusContext ctx(mpz_class(1009), counters);
    (void)ctx.invert_or_divisor(ctx.residue(5L));
    (void)ctx.invert_or_divisor(ctx.residue(6L));
    CHECK(counters->snapshot().gcd_calls == 2);
}

TEST_CASE("batch_invert inverts everything within the multiplication budget") {
    std::mt19937_64 rng(13);
    const mpz_class N = mpz_class("2305843009213693951"); // prime near the top of range
    auto counters = std::make_shared<OpCounters>();
    ModulusContext ctx(N, counters);

    for (std::size_t n : {std::size_t(1), std::size_t(2), std::size_t(7), std::size_t(64)}) {
        std::vector<Residue> rs;
        Residue prod = ctx.one();
        for (std::size_t i = 0; i < n; ++i) {
            rs.push_back(ctx.residue(oracle::random_bits(rng, 50) + 1));
            ctx.mul_assign(prod, rs.back());
        }
        const InvertOutcome po = ctx.invert_or_divisor(prod);
        REQUIRE(po.is_inverse());

        const std::uint64_t before = counters->snapshot().ring_mults;
        const std::vector<Residue> inv = ctx.batch_invert(rs, po.inverse_value());
        const std::uint64_t spent = counters->snapshot().ring_mults - before;

        REQUIRE(inv.size() == n);
        for (std::size_t i = 0; i < n; ++i) CHECK(ctx.mul(rs[i], inv[i]).value() == 1);
        CHECK(spent <= 3 * n + 1);
    }
}

TEST_CASE("batch_invert rejects a wrong product inverse") {
    ModulusContext ctx(mpz_class(1009));
    std::vector<Residue> rs{ctx.residue(2L), ctx.residue(3L)};
    CHECK_THROWS_AS((void)ctx.batch_invert(rs, ctx.residue(5L)), std::invalid_argument);
}

TEST_CASE("residues from another context are rejected") {
    ModulusContext a(mpz_class(97)), b(mpz_class(97));
    CHECK(!a.same_context(b));
    CHECK(a.same_context(a));
    const Residue x = a.residue(5L), y = b.residue(7L);
    CHECK_THROWS_AS((void)a.mul(x, y), std::invalid_argument);
    CHECK_THROWS_AS((void)a.add(x, y), std::invalid_argument);
    CHECK_THROWS_AS((void)b.invert_or_divisor(x), std::invalid_argument);
}

TEST_CASE("context copies share counters") {
    auto counters = std::make_shared<OpCounters>();
    ModulusContext ctx(mpz_class(101), counters);
    ModulusContext copy = ctx;
    CHECK(ctx.same_context(copy));
    (void)copy.mul(copy.residue(3L), copy.residue(4L));
    CHECK(counters->snapshot().ring_mults == 1);
}

TEST_CASE("counter snapshot and reset") {
    OpCounters c;
    c.add_ring_mults(5);
    c.add_poly_mult();
    c.note_poly_degree(17);
    c.note_poly_degree(4);
    c.add_gcd_calls(2);
    c.add_shift_eval();
    CounterSnapshot s = c.snapshot();
    CHECK(s.ring_mults == 5);
    CHECK(s.poly_mults == 1);
    CHECK(s.max_poly_degree == 17);
    CHECK(s.gcd_calls == 2);
    CHECK(s.shift_eval_calls == 1);
    c.reset();
    CHECK(c.snapshot().ring_mults == 0);
    CHECK(c.snapshot().max_poly_degree == 0);
}
