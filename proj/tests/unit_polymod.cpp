#include <doctest.h>

#include <detfactor/polymod.hpp>

#include "oracles.hpp"

#include <random>

using namespace detfactor;

namespace {

PolyModN make_poly(const ModulusContext& ctx, const std::vector<mpz_class>& coeffs) {
    std::vector<Residue> rs;
    rs.reserve(coeffs.size());
    for (const auto& c : coeffs) rs.push_back(ctx.residue(c));
    return PolyModN::from_coeffs(ctx, std::move(rs));
}

std::vector<mpz_class> to_ints(const PolyModN& f) {
    std::vector<mpz_class> out;
    for (int i = 0; i <= f.degree(); ++i) out.push_back(f.coeff(static_cast<std::size_t>(i)).value());
    return out;
}

std::vector<mpz_class> random_coeffs(std::mt19937_64& rng, std::size_t len, const mpz_class& N) {
    std::vector<mpz_class> out;
    out.reserve(len);
    for (std::size_t i = 0; i < len; ++i) out.push_back(oracle::mod_n(oracle::random_bits(rng, 90), N));
    if (!out.empty() && out.back() == 0) out.back() = 1; // keep the degree honest
    return out;
}

} // namespace

TEST_CASE("polynomial basics") {
    ModulusContext ctx(mpz_class(1009));
    const PolyModN z = PolyModN::zero(ctx);
    CHECK(z.degree() == -1);
    CHECK(z.coeff(0).value() == 0);
    CHECK(z.coeff(5).value() == 0);

    const PolyModN c = PolyModN::constant(ctx, ctx.residue(42L));
    CHECK(c.degree() == 0);
    CHECK(c.coeff(0).value() == 42);

    // trailing zeros are stripped, including a whole-poly collapse to zero
    const PolyModN f = make_poly(ctx, {mpz_class(3), mpz_class(0), mpz_class(7), mpz_class(0)});
    CHECK(f.degree() == 2);
    const PolyModN g = make_poly(ctx, {mpz_class(0), mpz_class(1009)});
    CHECK(g.degree() == -1);
}

TEST_CASE("evaluation matches the direct formula") {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 50; ++t) {
        const mpz_class N = oracle::random_bits(rng, 60) + 2;
        ModulusContext ctx(N);
        const std::vector<mpz_class> cs = random_coeffs(rng, 1 + rng() % 12, N);
        const PolyModN f = make_poly(ctx, cs);
        const mpz_class x = oracle::mod_n(oracle::random_bits(rng, 60), N);
        CHECK(f.eval(ctx.residue(x)).value() == oracle::horner_mod(cs, x, N));
    }
}

TEST_CASE("poly_mul agrees with the naive product on both code paths") {
    std::mt19937_64 rng(22);
    std::vector<mpz_class> moduli = {mpz_class(2), mpz_class(3), mpz_class(91),
                                     oracle::random_bits(rng, 61),
                                     oracle::random_bits(rng, 80)};
    for (const mpz_class& Nr : moduli) {
        const mpz_class N = Nr < 2 ? mpz_class(2) : Nr;
        ContextTuning school, packed;
        school.schoolbook_threshold = 1 << 30;
        packed.schoolbook_threshold = 0;
        ModulusContext cs(N, nullptr, school), cp(N, nullptr, packed);
        for (int t = 0; t < 12; ++t) {
            const std::size_t lf = 1 + rng() % 40, lg = 1 + rng() % 40;
            const std::vector<mpz_class> fc = random_coeffs(rng, lf, N), gc = random_coeffs(rng, lg, N);
            const std::vector<mpz_class> want = oracle::poly_mul_mod(fc, gc, N);

            const std::vector<mpz_class> got_s = to_ints(poly_mul(make_poly(cs, fc), make_poly(cs, gc)));
            const std::vector<mpz_class> got_p = to_ints(poly_mul(make_poly(cp, fc), make_poly(cp, gc)));

            // the oracle keeps explicit zeros; compare after stripping
            std::vector<mpz_class> want_stripped = want;
            while (!want_stripped.empty() && want_stripped.back() == 0) want_stripped.pop_back();
            CHECK(got_s == want_stripped);
            CHECK(got_p == want_stripped);
        }
    }
}

TEST_CASE("poly_mul with a zero factor counts but short-circuits") {
    auto counters = std::make_shared<OpCounters>();
    ModulusContext ctx(mpz_class(1009), counters);
    const PolyModN f = make_poly(ctx, {mpz_class(1), mpz_class(2)});
    const PolyModN r = poly_mul(f, PolyModN::zero(ctx));
    CHECK(r.degree() == -1);
    CHECK(counters->snapshot().poly_mults == 1);
    CHECK(counters->snapshot().ring_mults == 0);
}

TEST_CASE("poly_mul refuses mixed contexts") {
    ModulusContext a(mpz_class(97)), b(mpz_class(97));
    const PolyModN f = make_poly(a, {mpz_class(1), mpz_class(1)});
    const PolyModN g = make_poly(b, {mpz_class(1), mpz_class(1)});
    CHECK_THROWS_AS((void)poly_mul(f, g), std::invalid_argument);
}

TEST_CASE("poly_mul tracks degree and call counters") {
    auto counters = std::make_shared<OpCounters>();
    ModulusContext ctx(mpz_class(1009), counters);
    std::mt19937_64 rng(3);
    const PolyModN f = make_poly(ctx, random_coeffs(rng, 8, mpz_class(1009)));
    const PolyModN g = make_poly(ctx, {mpz_class(1), mpz_class(2), mpz_class(3)});
    (void)poly_mul(f, g);
    CHECK(counters->snapshot().poly_mults == 1);
    CHECK(counters->snapshot().max_poly_degree == 7);
}

TEST_CASE("product tree root is the full product") {
    std::mt19937_64 rng(23);
    const mpz_class N = oracle::random_bits(rng, 50);
    ModulusContext ctx(N);
    for (std::size_t count : {std::size_t(1), std::size_t(2), std::size_t(5), std::size_t(16)}) {
        std::vector<PolyModN> leaves;
        PolyModN direct = PolyModN::constant(ctx, ctx.one());
        for (std::size_t i = 0; i < count; ++i) {
            const PolyModN leaf = make_poly(ctx, random_coeffs(rng, 1 + rng() % 4, N));
            leaves.push_back(leaf);
            direct = poly_mul(direct, leaf);
        }
        const ProductTree tree = product_tree(std::move(leaves));
        CHECK(to_ints(tree.root()) == to_ints(direct));
    }
}

TEST_CASE("multipoint evaluation equals pointwise evaluation") {
    std::mt19937_64 rng(24);
    const mpz_class N = oracle::random_bits(rng, 61);
    ModulusContext ctx(N);
    for (std::size_t npts : {std::size_t(1), std::size_t(3), std::size_t(7), std::size_t(8),
                             std::size_t(20), std::size_t(33)}) {
        const std::vector<mpz_class> cs = random_coeffs(rng, 12, N);
        const PolyModN f = make_poly(ctx, cs);
        std::vector<Residue> pts;
        for (std::size_t i = 0; i < npts; ++i)
            pts.push_back(ctx.residue(oracle::mod_n(oracle::random_bits(rng, 59), N)));
        const std::vector<Residue> vals = multipoint_eval(f, pts);
        REQUIRE(vals.size() == npts);
        for (std::size_t i = 0; i < npts; ++i)
            CHECK(vals[i].value() == oracle::horner_mod(cs, pts[i].value(), N));
    }
}

TEST_CASE("scalar tree check finds the leftmost noninvertible entry") {
    ModulusContext ctx(mpz_class(91)); // 7 * 13
    std::vector<Residue> vals;
    for (long v : {2L, 3L, 5L, 11L, 26L, 17L, 35L, 4L}) vals.push_back(ctx.residue(v));
    const detail::ScalarTreeCheck chk = detail::scalar_tree_check(ctx, vals);
    REQUIRE(!chk.all_invertible);
    CHECK(chk.bad_index == 4); // 26 shares 13 before 35 shares 7
    CHECK(chk.bad_gcd == 13);
}

TEST_CASE("scalar tree check certifies an invertible batch with one inverse") {
    auto counters = std::make_shared<OpCounters>();
    ModulusContext ctx(mpz_class(1009), counters);
    std::vector<Residue> vals;
    for (long v : {2L, 3L, 5L, 7L, 11L, 13L}) vals.push_back(ctx.residue(v));
    const detail::ScalarTreeCheck chk = detail::scalar_tree_check(ctx, vals);
    REQUIRE(chk.all_invertible);
    CHECK(ctx.mul(chk.product, chk.product_inv).value() == 1);
    CHECK(chk.product.value() == 2 * 3 * 5 * 7 * 11 * 13 % 1009);
    CHECK(counters->snapshot().gcd_calls == 1); // the single root inversion
}

TEST_CASE("hypothesis product enumerates beta, 2..d, and the node ladder") {
    ModulusContext ctx(mpz_class(1009));
    const HypothesisProduct hp(ctx, 3, 2, 2);
    CHECK(hp.alpha() == 3);
    CHECK(hp.beta() == 2);
    CHECK(hp.d() == 2);
    CHECK(hp.factor_count() == 7);
    CHECK(hp.factor_integers() == std::vector<std::int64_t>{2, 2, -1, 1, 3, 5, 7});
    CHECK(hp.product().value() == oracle::mod_n(mpz_class(-420), mpz_class(1009)));
    CHECK(!hp.product_inv().has_value());
}

TEST_CASE("hypothesis product rejects bad parameters") {
    ModulusContext ctx(mpz_class(1009));
    CHECK_THROWS_AS(HypothesisProduct(ctx, 1, 2, 0), std::invalid_argument);
    CHECK_THROWS_AS(HypothesisProduct(ctx, 1, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(HypothesisProduct(ctx, 4, 2, 2), std::invalid_argument); // node at zero
    CHECK_THROWS_AS(HypothesisProduct(ctx, std::int64_t(1) << 62, 1, 1), std::domain_error);
}

TEST_CASE("hyp_product attaches the inverse or surfaces a witness") {
    ModulusContext ok(mpz_class(1009));
    auto got = hyp_product(ok, 3, 2, 2);
    REQUIRE(std::holds_alternative<HypothesisProduct>(got));
    const HypothesisProduct& hp = std::get<HypothesisProduct>(got);
    REQUIRE(hp.product_inv().has_value());
    CHECK(ok.mul(hp.product(), *hp.product_inv()).value() == 1);

    ModulusContext bad(mpz_class(15));
    auto wit = hyp_product(bad, 1, 2, 1); // nodes -1, 1, 3; the 3 shares a factor
    REQUIRE(std::holds_alternative<DivisorWitness>(wit));
    const DivisorWitness& w = std::get<DivisorWitness>(wit);
    CHECK(w.g == 3);
    CHECK(w.source_x == 3);
    CHECK(w.provenance == WitnessSource::HypothesisCheck);
}

TEST_CASE("shift evaluation reproduces the worked square example") {
    ModulusContext ctx(mpz_class(1009));
    auto hp = hyp_product(ctx, 3, 2, 2);
    REQUIRE(std::holds_alternative<HypothesisProduct>(hp));

    // F = x^2 sampled at 0, 2, 4; the shift lands on 3, 5, 7.
    std::vector<Residue> vals{ctx.residue(0L), ctx.residue(4L), ctx.residue(16L)};
    const std::vector<Residue> out = shift_eval(ctx, vals, std::get<HypothesisProduct>(hp));
    REQUIRE(out.size() == 3);
    CHECK(out[0].value() == 9);
    CHECK(out[1].value() == 25);
    CHECK(out[2].value() == 49);
}

TEST_CASE("shift evaluation matches direct evaluation on random polynomials") {
    std::mt19937_64 rng(25);
    const mpz_class N = (mpz_class(1) << 61) - 1;
    ModulusContext ctx(N);
    for (int t = 0; t < 50; ++t) {
        const std::int64_t d = 1 + static_cast<std::int64_t>(rng() % 20);
        const std::int64_t beta = 1 + static_cast<std::int64_t>(rng() % 50);
        const std::int64_t alpha = d * beta + 1 + static_cast<std::int64_t>(rng() % 1000);

        auto hp = hyp_product(ctx, alpha, beta, d);
        REQUIRE(std::holds_alternative<HypothesisProduct>(hp));

        const std::vector<mpz_class> cs = random_coeffs(rng, static_cast<std::size_t>(d) + 1, N);
        std::vector<Residue> vals;
        for (std::int64_t j = 0; j <= d; ++j)
            vals.push_back(ctx.residue(oracle::horner_mod(cs, mpz_class(j * beta), N)));

        const std::vector<Residue> out = shift_eval(ctx, vals, std::get<HypothesisProduct>(hp));
        REQUIRE(out.size() == static_cast<std::size_t>(d) + 1);
        for (std::int64_t k = 0; k <= d; ++k)
            CHECK(out[static_cast<std::size_t>(k)].value() ==
                  oracle::horner_mod(cs, mpz_class(alpha + k * beta), N));
    }
}

TEST_CASE("each shift evaluation is one polynomial product") {
    auto counters = std::make_shared<OpCounters>();
    ModulusContext ctx(mpz_class(1009), counters);
    auto hp = hyp_product(ctx, 7, 1, 3);
    REQUIRE(std::holds_alternative<HypothesisProduct>(hp));
    const ShiftEvaluator ev(ctx, std::get<HypothesisProduct>(hp));

    const CounterSnapshot before = counters->snapshot();
    std::vector<Residue> vals{ctx.residue(1L), ctx.residue(2L), ctx.residue(3L), ctx.residue(4L)};
    (void)ev.eval(vals);
    const CounterSnapshot after = counters->snapshot();
    CHECK(after.shift_eval_calls - before.shift_eval_calls == 1);
    CHECK(after.poly_mults - before.poly_mults == 1);

    std::vector<Residue> short_vals{ctx.residue(1L)};
    CHECK_THROWS_AS((void)ev.eval(short_vals), std::invalid_argument);
}

TEST_CASE("shift evaluator requires an attached inverse") {
    ModulusContext ctx(mpz_class(1009));
    const HypothesisProduct hp(ctx, 3, 2, 2); // constructed raw, no inverse
    CHECK_THROWS_AS(ShiftEvaluator(ctx, hp), std::invalid_argument);
}
