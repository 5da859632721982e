#include <detfactor/factorize.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace detfactor {

namespace {

using clock_type = std::chrono::steady_clock;

double ms_since(clock_type::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

mpz_class isqrt(const mpz_class& n) {
    mpz_class r;
    mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
    return r;
}

void push_power(std::vector<PrimePower>& fs, mpz_class p, unsigned e) {
    if (e > 0) fs.push_back(PrimePower{std::move(p), e});
}

// Divide out all copies of p, returning the multiplicity.
unsigned divide_out(mpz_class& m, const mpz_class& p) {
    return static_cast<unsigned>(mpz_remove(m.get_mpz_t(), m.get_mpz_t(), p.get_mpz_t()));
}

void sort_and_merge(std::vector<PrimePower>& fs) {
    std::sort(fs.begin(), fs.end(), [](const PrimePower& a, const PrimePower& b) { return a.p < b.p; });
    std::vector<PrimePower> out;
    for (auto& f : fs) {
        if (!out.empty() && out.back().p == f.p)
            out.back().e += f.e;
        else
            out.push_back(std::move(f));
    }
    fs = std::move(out);
}

// 2,3 then the 6k+-1 ladder, entirely in machine words.
void trial_u64(std::uint64_t& m, std::uint64_t bound, std::vector<PrimePower>& fs) {
    for (std::uint64_t p : {std::uint64_t(2), std::uint64_t(3)}) {
        if (p > bound) return;
        unsigned e = 0;
        while (m % p == 0) {
            m /= p;
            ++e;
        }
        push_power(fs, mpz_class(static_cast<unsigned long>(p)), e);
    }
    std::uint64_t c = 5, step = 2;
    while (c <= bound && c <= m / c) {
        unsigned e = 0;
        while (m % c == 0) {
            m /= c;
            ++e;
        }
        push_power(fs, mpz_class(static_cast<unsigned long>(c)), e);
        c += step;
        step = 6 - step;
    }
}

bool is_prime_trial(const mpz_class& p) {
    if (p < 2) return false;
    auto [fs, rest] = trial_division_up_to(p, isqrt(p));
    return fs.empty() && rest == p;
}

} // namespace

std::pair<std::vector<PrimePower>, mpz_class> trial_division_up_to(const mpz_class& n,
                                                                   const mpz_class& bound) {
    if (n < 1) throw std::invalid_argument("trial_division_up_to: n must be positive");
    std::vector<PrimePower> fs;
    mpz_class m = n;

    if (m.fits_ulong_p() && bound.fits_ulong_p() && sizeof(unsigned long) == 8) {
        std::uint64_t mu = mpz_get_ui(m.get_mpz_t());
        trial_u64(mu, mpz_get_ui(bound.get_mpz_t()), fs);
        m = mpz_class(static_cast<unsigned long>(mu));
    } else {
        for (long p : {2L, 3L}) {
            if (bound < p) break;
            push_power(fs, mpz_class(p), divide_out(m, mpz_class(p)));
        }
        mpz_class c = 5;
        long step = 2;
        while (c <= bound && c * c <= m) {
            push_power(fs, c, divide_out(m, c));
            c += step;
            step = 6 - step;
        }
    }

    // A leftover within the bound is itself prime; the contract removes it.
    if (m > 1 && m <= bound) {
        push_power(fs, m, 1);
        m = 1;
    }
    return {fs, m};
}

std::pair<std::vector<PrimePower>, mpz_class> strip_small(const mpz_class& n, int B) {
    if (n < 1) throw std::invalid_argument("strip_small: n must be positive");
    std::vector<PrimePower> fs;
    mpz_class m = n;
    for (std::uint32_t p : primes_below(B))
        push_power(fs, mpz_class(static_cast<unsigned long>(p)), divide_out(m, mpz_class(static_cast<unsigned long>(p))));
    return {fs, m};
}

int choose_B(const mpz_class& n) {
    if (n < 1) throw std::invalid_argument("choose_B: n must be positive");
    signed long exp2 = 0;
    const double mant = mpz_get_d_2exp(&exp2, n.get_mpz_t());
    const double ln_n = std::log(mant) + static_cast<double>(exp2) * M_LN2;
    int B = static_cast<int>(std::floor(ln_n / 11.0));
    return std::clamp(B, 3, 64);
}

int predicted_r0(const mpz_class& n, const SieveParams& sp) {
    for (int r = 0;; ++r) {
        const mpz_class b = level_bound(sp, r);
        if (b * b >= n) return r;
    }
}

FactorOutcome factor_trial(const mpz_class& n) {
    const auto t0 = clock_type::now();
    if (n < 1) throw std::invalid_argument("factor_trial: n must be positive");
    FactorOutcome out;
    out.factorization.n = n;
    out.factorization.cofactor_proof = Proof::TrialVerified;
    auto [fs, rest] = trial_division_up_to(n, isqrt(n));
    out.factorization.factors = std::move(fs);
    if (rest > 1) push_power(out.factorization.factors, rest, 1); // no divisor up to sqrt, prime
    sort_and_merge(out.factorization.factors);
    out.stats.wall_ms = ms_since(t0);
    return out;
}

namespace {

// Shared search loop for the wheel engines. Retries the same level after a
// hit (the next-smallest factor may still sit under the same bound) and
// only raises r when a level comes back clean.
FactorOutcome run_wheel_driver(const mpz_class& n, const SieveParams& sp, int B_label,
                               const DriverConfig& cfg) {
    const auto t0 = clock_type::now();
    if (n < 1) throw std::invalid_argument("factor: n must be positive");

    FactorOutcome out;
    out.factorization.n = n;
    out.factorization.cofactor_proof = Proof::TrialVerified;
    out.stats.B = B_label;
    auto counters = std::make_shared<OpCounters>();
    ModulusContext::Tuning tuning;
    tuning.schoolbook_threshold = cfg.schoolbook_threshold;
    tuning.threads = cfg.threads;

    std::vector<PrimePower>& fs = out.factorization.factors;
    mpz_class m = n;
    for (std::uint32_t p : sp.primes)
        push_power(fs, mpz_class(static_cast<unsigned long>(p)),
                   divide_out(m, mpz_class(static_cast<unsigned long>(p))));

    int r = 0;
    while (m > 1) {
        if (m < cfg.small_n_cutoff || level_bound(sp, r) >= m) {
            auto [tf, rest] = trial_division_up_to(m, isqrt(m));
            for (auto& f : tf) fs.push_back(std::move(f));
            if (rest > 1) push_power(fs, rest, 1);
            m = 1;
            break;
        }

        ModulusContext ctx(m, counters, tuning);
        SearchOutcome so = find_divisor_leq_b(ctx, sp, r);
        out.stats.levels_r = std::max(out.stats.levels_r, r);
        out.stats.b_final = so.bound_b;

        if (so.found) {
            push_power(fs, *so.prime, divide_out(m, *so.prime));
            continue;
        }
        if (so.bound_b * so.bound_b >= m) {
            // No divisor up to b and b^2 >= m: the cofactor is prime.
            push_power(fs, m, 1);
            out.factorization.cofactor_proof = Proof::Complete;
            m = 1;
            break;
        }
        ++r;
    }

    sort_and_merge(fs);
    if (cfg.stats_enabled) out.stats.counters = counters->snapshot();
    out.stats.wall_ms = ms_since(t0);
    return out;
}

} // namespace

FactorOutcome factor_sieved(const mpz_class& n, const DriverConfig& cfg) {
    const int B = cfg.B_override ? *cfg.B_override : choose_B(n);
    return run_wheel_driver(n, sieve_params(B), B, cfg);
}

FactorOutcome factor_bgs(const mpz_class& n, const DriverConfig& cfg) {
    return run_wheel_driver(n, SieveParams::degenerate(), 0, cfg);
}

FactorOutcome factor_strassen(const mpz_class& n, const DriverConfig& cfg) {
    const auto t0 = clock_type::now();
    if (n < 1) throw std::invalid_argument("factor_strassen: n must be positive");
    const mpz_class strassen_cap = mpz_class(1) << 44; // K and block integers stay in int64

    FactorOutcome out;
    out.factorization.n = n;
    out.factorization.cofactor_proof = Proof::Complete;
    auto counters = std::make_shared<OpCounters>();
    ModulusContext::Tuning tuning;
    tuning.schoolbook_threshold = cfg.schoolbook_threshold;
    tuning.threads = cfg.threads;

    std::vector<PrimePower>& fs = out.factorization.factors;
    mpz_class m = n;

    while (m > 1) {
        const mpz_class K = isqrt(m);
        if (K < 2) {
            push_power(fs, m, 1); // no divisor at or below sqrt(m)
            break;
        }
        if (K > strassen_cap)
            throw std::domain_error("factor_strassen: cofactor too large for the baseline");
        const std::int64_t k = static_cast<std::int64_t>(mpz_get_ui(K.get_mpz_t()));
        std::int64_t L = static_cast<std::int64_t>(mpz_get_ui(isqrt(K).get_mpz_t()));
        if (L * L < k) ++L;
        const std::int64_t full = k / L;

        ModulusContext ctx(m, counters, tuning);

        // f(x) = (x+1)(x+2)...(x+L); f(iL) is the product of one block.
        std::vector<PolyModN> lin;
        lin.reserve(static_cast<std::size_t>(L));
        for (std::int64_t c = 1; c <= L; ++c)
            lin.push_back(PolyModN::from_coeffs(
                ctx, std::vector<Residue>{ctx.residue(static_cast<long>(c)), ctx.one()}));
        const PolyModN f = product_tree(std::move(lin)).root();

        std::vector<Residue> pts;
        pts.reserve(static_cast<std::size_t>(full));
        for (std::int64_t i = 0; i < full; ++i) pts.push_back(ctx.residue(static_cast<long>(i * L)));
        std::vector<Residue> blocks = multipoint_eval(f, pts);

        if (full * L < k) { // partial tail block covering full*L+1 .. K
            Residue tail = ctx.one();
            for (std::int64_t c = full * L + 1; c <= k; ++c)
                ctx.mul_assign(tail, ctx.residue(static_cast<long>(c)));
            blocks.push_back(std::move(tail));
        }

        BatchCheck chk = check_invertible_batch(ctx, blocks);
        if (chk.all_invertible) {
            push_power(fs, m, 1); // coprime to everything up to sqrt(m), prime
            break;
        }

        // Leftmost bad block, scanned upward: the first integer sharing a
        // factor with m is the smallest prime factor of m.
        const std::int64_t lo = static_cast<std::int64_t>(chk.bad_index) * L + 1;
        const std::int64_t hi = std::min(lo + L - 1, k);
        mpz_class found = 0;
        for (std::int64_t c = lo; c <= hi; ++c) {
            mpz_class g, cz(static_cast<long>(c));
            mpz_gcd(g.get_mpz_t(), cz.get_mpz_t(), m.get_mpz_t());
            ctx.counters().add_gcd_calls();
            if (g > 1) {
                found = cz;
                break;
            }
        }
        if (found == 0) throw std::logic_error("factor_strassen: bad block with no bad integer");
        push_power(fs, found, divide_out(m, found));
    }

    sort_and_merge(fs);
    if (cfg.stats_enabled) out.stats.counters = counters->snapshot();
    out.stats.wall_ms = ms_since(t0);
    return out;
}

FactorOutcome factor(const mpz_class& n, const DriverConfig& cfg) {
    switch (cfg.algorithm) {
    case Algo::Sieved: return factor_sieved(n, cfg);
    case Algo::DegenerateBgs: return factor_bgs(n, cfg);
    case Algo::Strassen: return factor_strassen(n, cfg);
    case Algo::Trial: return factor_trial(n);
    }
    throw std::invalid_argument("factor: unknown algorithm");
}

bool verify_factorization(const Factorization& f) {
    mpz_class prod = 1;
    mpz_class prev = 1;
    for (const auto& pp : f.factors) {
        if (pp.e == 0 || pp.p <= prev) return false;
        if (!is_prime_trial(pp.p)) return false;
        prev = pp.p;
        mpz_class pe;
        mpz_pow_ui(pe.get_mpz_t(), pp.p.get_mpz_t(), pp.e);
        prod *= pe;
    }
    return prod == f.n;
}

} // namespace detfactor
