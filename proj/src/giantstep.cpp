#include <detfactor/giantstep.hpp>

#include <cstdlib>
#include <stdexcept>
#include <thread>
#include <utility>

namespace detfactor {

namespace {

constexpr std::int64_t kDrillTreeThreshold = 4096;
// Engine range guards: the wheel integers and grid points live in int64.
const mpz_class kMaxLevelBound = mpz_class(1) << 61;
constexpr std::int64_t kMaxTableSize = std::int64_t(1) << 28;

// Deterministic split of [0, n) into contiguous chunks, one thread each.
// Results do not depend on the split; counters are atomic sums.
template <typename Fn>
void parallel_for(int threads, std::size_t n, Fn&& fn) {
    if (threads <= 1 || n < 4096) {
        fn(std::size_t(0), n);
        return;
    }
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::size_t chunk = (n + nt - 1) / nt;
    for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

} // namespace

mpz_class level_bound(const SieveParams& sp, int r) {
    mpz_class b = mpz_class(1) << (2 * r);
    b *= sp.rho;
    b *= sp.Q;
    return b;
}

BatchCheck check_invertible_batch(const ModulusContext& ctx, std::span<const Residue> vals) {
    detail::ScalarTreeCheck c = detail::scalar_tree_check(ctx, vals);
    BatchCheck out;
    out.all_invertible = c.all_invertible;
    out.product = std::move(c.product);
    out.product_inv = std::move(c.product_inv);
    out.bad_index = c.bad_index;
    out.bad_gcd = std::move(c.bad_gcd);
    return out;
}

EvalTable eval_H_base(const ModulusContext& ctx, const PolyModN& H, std::int64_t beta, std::int64_t rho) {
    if (H.degree() != rho)
        throw std::invalid_argument("eval_H_base: H must have degree rho");
    EvalTable t;
    t.k = 1;
    t.beta = beta;
    t.rho = rho;
    t.values.reserve(static_cast<std::size_t>(rho) + 1);
    for (std::int64_t i = 0; i <= rho; ++i)
        t.values.push_back(H.eval(ctx.residue(mpz_class(i) * beta)));
    return t;
}

std::variant<GrandHypothesis, DivisorWitness>
grand_hypothesis(const ModulusContext& ctx, int r, std::int64_t beta, std::int64_t rho) {
    if (r < 0) throw std::invalid_argument("grand_hypothesis: r must be >= 0");
    GrandHypothesis gh;
    gh.r = r;
    gh.beta = beta;
    gh.rho = rho;
    gh.D = ctx.one();
    gh.D_inv = ctx.one();

    for (int i = 0; i < r; ++i) {
        const std::int64_t d = (std::int64_t(1) << i) * rho;
        const std::int64_t alphas[2] = {std::int64_t(1) << i, (d + 1) * beta};
        std::optional<HypothesisProduct> parts[2];

        for (int s = 0; s < 2; ++s) {
            HypothesisProduct hp(ctx, alphas[s], beta, d);
            std::vector<std::int64_t> ints = hp.factor_integers();
            std::vector<Residue> rs;
            rs.reserve(ints.size());
            for (std::int64_t x : ints) rs.push_back(ctx.residue(static_cast<long>(x)));

            detail::ScalarTreeCheck chk = detail::scalar_tree_check(ctx, rs);
            if (!chk.all_invertible) {
                const std::int64_t x = ints[chk.bad_index];
                DivisorWitness w;
                mpz_class ax(static_cast<long>(x < 0 ? -x : x));
                mpz_gcd(w.g.get_mpz_t(), ax.get_mpz_t(), ctx.modulus().get_mpz_t());
                ctx.counters().add_gcd_calls();
                w.source_x = static_cast<long>(x);
                w.provenance = WitnessSource::HypothesisCheck;
                return w;
            }
            hp.set_product_inv(chk.product_inv);
            parts[s] = std::move(hp);
        }

        ctx.mul_assign(gh.D, parts[0]->product());
        ctx.mul_assign(gh.D, parts[1]->product());
        ctx.mul_assign(gh.D_inv, *parts[0]->product_inv());
        ctx.mul_assign(gh.D_inv, *parts[1]->product_inv());
        gh.per_level.push_back(GrandLevel{std::move(*parts[0]), std::move(*parts[1])});
    }
    return gh;
}

EvalTable extend_double(const ModulusContext& ctx, const EvalTable& tbl, const GrandLevel& level) {
    const std::int64_t d = tbl.k * tbl.rho;
    if (static_cast<std::size_t>(d) + 1 != tbl.values.size())
        throw std::invalid_argument("extend_double: table size does not match k*rho+1");
    if (level.step.d() != d || level.wrap.d() != d)
        throw std::invalid_argument("extend_double: certificate degree does not match the table");
    if (level.step.alpha() != tbl.k || level.wrap.alpha() != (d + 1) * tbl.beta)
        throw std::invalid_argument("extend_double: certificate shifts do not match the table");

    ShiftEvaluator step(ctx, level.step);
    ShiftEvaluator wrap(ctx, level.wrap);

    // H_2k(x) = H_k(x) H_k(x+k). The step shift fills the gap at each grid
    // point; the wrap shift moves the whole grid past its end so the same
    // step shift can fill the gaps there too.
    std::vector<Residue> shifted = step.eval(tbl.values);              // H_k(i*beta + k)
    std::vector<Residue> tail = wrap.eval(tbl.values);                 // H_k((d+1+i)*beta)
    std::vector<Residue> tail_shifted = step.eval(tail);               // H_k((d+1+i)*beta + k)

    const int threads = ctx.tuning().threads;
    EvalTable out;
    out.k = 2 * tbl.k;
    out.beta = tbl.beta;
    out.rho = tbl.rho;
    out.values.resize(2 * static_cast<std::size_t>(d) + 1, ctx.zero());

    parallel_for(threads, static_cast<std::size_t>(d) + 1, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) out.values[i] = ctx.mul(tbl.values[i], shifted[i]);
    });
    // The last tail product would be H_2k past the new grid; drop it.
    parallel_for(threads, static_cast<std::size_t>(d), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
            out.values[static_cast<std::size_t>(d) + 1 + i] = ctx.mul(tail[i], tail_shifted[i]);
    });
    return out;
}

EvalTable fast_eval_Hk(const ModulusContext& ctx, const PolyModN& H, int r, std::int64_t beta,
                       std::int64_t rho, const GrandHypothesis& gh) {
    if (gh.r != r || gh.beta != beta || gh.rho != rho)
        throw std::invalid_argument("fast_eval_Hk: hypothesis built for different parameters");
    EvalTable tbl = eval_H_base(ctx, H, beta, rho);
    for (int i = 0; i < r; ++i) {
        EvalTable next = extend_double(ctx, tbl, gh.per_level[static_cast<std::size_t>(i)]);
        tbl = std::move(next);
    }
    return tbl;
}

DivisorWitness drill_down_witness(const ModulusContext& ctx, std::int64_t table_index, std::int64_t k,
                                  std::int64_t beta, const SieveParams& sp) {
    const std::int64_t q = static_cast<std::int64_t>(sp.q_u64());
    const std::int64_t base = table_index * beta;
    const std::int64_t count = k * sp.rho;

    auto integer_at = [&](std::int64_t idx) {
        const std::int64_t t = idx / sp.rho;
        const std::int64_t jpos = idx % sp.rho;
        return (base + t) * q + static_cast<std::int64_t>(sp.residues[static_cast<std::size_t>(jpos)]);
    };

    DivisorWitness w;
    w.provenance = WitnessSource::DrillDown;
    const mpz_class& N = ctx.modulus();

    if (count <= kDrillTreeThreshold) {
        for (std::int64_t idx = 0; idx < count; ++idx) {
            const std::int64_t x = integer_at(idx);
            mpz_class g;
            mpz_class xz(static_cast<long>(x));
            mpz_gcd(g.get_mpz_t(), xz.get_mpz_t(), N.get_mpz_t());
            ctx.counters().add_gcd_calls();
            if (g > 1) {
                w.g = std::move(g);
                w.source_x = std::move(xz);
                return w;
            }
        }
    } else {
        std::vector<Residue> rs;
        rs.reserve(static_cast<std::size_t>(count));
        for (std::int64_t idx = 0; idx < count; ++idx)
            rs.push_back(ctx.residue(static_cast<long>(integer_at(idx))));
        detail::ScalarTreeCheck chk = detail::scalar_tree_check(ctx, rs);
        if (!chk.all_invertible) {
            w.g = std::move(chk.bad_gcd);
            w.source_x = static_cast<long>(integer_at(static_cast<std::int64_t>(chk.bad_index)));
            return w;
        }
    }
    throw std::logic_error("drill_down_witness: no wheel integer shares a factor with N");
}

mpz_class prime_from_witness(const ModulusContext& ctx, const DivisorWitness& w, const mpz_class& bound,
                             const SieveParams& sp) {
    (void)ctx;
    const mpz_class& g = w.g;
    if (g <= 1 || g > bound)
        throw std::invalid_argument("prime_from_witness: witness gcd out of range");

    mpz_class root;
    mpz_sqrt(root.get_mpz_t(), g.get_mpz_t());
    const std::uint64_t limit = mpz_get_ui(root.get_mpz_t()); // g <= 2^61, so sqrt fits easily
    const std::uint64_t q = sp.q_u64();
    const bool small_g = g.fits_ulong_p();
    const std::uint64_t gu = small_g ? mpz_get_ui(g.get_mpz_t()) : 0;

    // A witness from the wheel preflight can share factors with Q itself,
    // and those never appear among wheel candidates. Probe the wheel primes
    // first; they sit below every wheel candidate, so ascending order holds.
    for (std::uint32_t p : sp.primes) {
        const bool divides = small_g ? (gu % p == 0)
                                     : mpz_divisible_ui_p(g.get_mpz_t(), p) != 0;
        if (divides) return mpz_class(static_cast<unsigned long>(p));
    }

    // Candidates coprime to Q in ascending order. The first divisor found
    // is the smallest nontrivial one, hence prime.
    for (std::uint64_t m = 0;; ++m) {
        bool past = false;
        for (std::uint64_t j : sp.residues) {
            const std::uint64_t c = m * q + j;
            if (c < 2) continue;
            if (c > limit) {
                past = true;
                break;
            }
            const bool divides = small_g ? (gu % c == 0)
                                         : mpz_divisible_ui_p(g.get_mpz_t(), c) != 0;
            if (divides) return mpz_class(static_cast<unsigned long>(c));
        }
        if (past) break;
    }
    return g; // no divisor up to sqrt(g): g is prime
}

SearchOutcome find_divisor_leq_b(const ModulusContext& ctx, const SieveParams& sp, int r) {
    const mpz_class b = level_bound(sp, r);
    if (b >= ctx.modulus())
        throw std::invalid_argument("find_divisor_leq_b: level bound must stay below N");
    if (b > kMaxLevelBound)
        throw std::domain_error("find_divisor_leq_b: level bound exceeds the engine integer range");
    const std::int64_t k = std::int64_t(1) << r;
    const std::int64_t beta = k;
    if (k * sp.rho > kMaxTableSize)
        throw std::domain_error("find_divisor_leq_b: table too large for a desk-scale run");

    // In sieved mode every integer the hypothesis touches is <= b; the
    // degenerate wheel overshoots by one grid step at the wrap shift.
    mpz_class eff_bound = b;
    if (sp.is_degenerate()) eff_bound += beta;

    auto as_found = [&](DivisorWitness w) {
        SearchOutcome o;
        o.found = true;
        o.bound_b = b;
        o.prime = prime_from_witness(ctx, w, eff_bound, sp);
        o.witness = std::move(w);
        return o;
    };

    auto built = build_H(sp, ctx);
    if (std::holds_alternative<DivisorWitness>(built))
        return as_found(std::get<DivisorWitness>(std::move(built)));
    const PolyModN& H = std::get<PolyModN>(built);

    auto hyp = grand_hypothesis(ctx, r, beta, sp.rho);
    if (std::holds_alternative<DivisorWitness>(hyp))
        return as_found(std::get<DivisorWitness>(std::move(hyp)));
    const GrandHypothesis& gh = std::get<GrandHypothesis>(hyp);

    EvalTable tbl = fast_eval_Hk(ctx, H, r, beta, sp.rho, gh);

    // The product identity covers indices 0..k*rho-1; the last grid point
    // is doubling surplus and stays out of the scan.
    const std::size_t scan = static_cast<std::size_t>(k * sp.rho);
    BatchCheck chk = check_invertible_batch(ctx, std::span<const Residue>(tbl.values.data(), scan));
    if (chk.all_invertible) {
        SearchOutcome o;
        o.found = false;
        o.bound_b = b;
        return o;
    }
    DivisorWitness w =
        drill_down_witness(ctx, static_cast<std::int64_t>(chk.bad_index), k, beta, sp);
    return as_found(std::move(w));
}

} // namespace detfactor
