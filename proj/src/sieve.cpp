#include <detfactor/sieve.hpp>

#include <numeric>
#include <stdexcept>

namespace detfactor {

SieveParams SieveParams::degenerate() { return SieveParams{}; }

std::vector<std::uint32_t> primes_below(int B) {
    std::vector<std::uint32_t> ps;
    if (B <= 2) return ps;
    std::vector<bool> composite(static_cast<std::size_t>(B), false);
    for (std::size_t p = 2; p < composite.size(); ++p) {
        if (composite[p]) continue;
        ps.push_back(static_cast<std::uint32_t>(p));
        for (std::size_t m = p * p; m < composite.size(); m += p) composite[m] = true;
    }
    return ps;
}

SieveParams sieve_params(int B) {
    if (B <= 2 || B > 64) throw std::invalid_argument("sieve_params: B must satisfy 2 < B <= 64");

    SieveParams sp;
    sp.B = B;
    sp.primes = primes_below(B);
    sp.Q = 1;
    for (std::uint32_t p : sp.primes) sp.Q *= p;
    // Enumerating 1..Q stops being a desk-scale job well before B hits the
    // hard cap; past 2^32 even the scan to list the residues is hopeless.
    if (sp.Q > (mpz_class(1) << 32))
        throw std::length_error("sieve_params: primorial too large to enumerate residues (lower B)");

    const std::uint64_t q = mpz_get_ui(sp.Q.get_mpz_t());
    sp.residues.clear();
    for (std::uint64_t j = 1; j <= q; ++j)
        if (std::gcd(j, q) == 1) sp.residues.push_back(j);
    sp.rho = static_cast<std::int64_t>(sp.residues.size());
    return sp;
}

std::variant<PolyModN, DivisorWitness> build_H(const SieveParams& sp, const ModulusContext& ctx) {
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), ctx.modulus().get_mpz_t(), sp.Q.get_mpz_t());
    ctx.counters().add_gcd_calls();
    if (g > 1) {
        DivisorWitness w;
        w.g = std::move(g);
        w.source_x = sp.Q;
        w.provenance = WitnessSource::TrialDivision;
        return w;
    }

    const Residue qr = ctx.residue(sp.Q);
    std::vector<Residue> h{ctx.one()}; // running product, low coefficients first
    h.reserve(static_cast<std::size_t>(sp.rho) + 1);
    for (std::uint64_t j : sp.residues) {
        // h <- h * (Q*x + j)
        const Residue jr = ctx.residue(mpz_class(j));
        std::vector<Residue> next(h.size() + 1, ctx.zero());
        for (std::size_t i = 0; i < h.size(); ++i) {
            Residue t = ctx.mul(h[i], qr);
            ctx.add_assign(next[i + 1], t);
            Residue u = ctx.mul(h[i], jr);
            ctx.add_assign(next[i], u);
        }
        h = std::move(next);
    }
    return PolyModN::from_coeffs(ctx, std::move(h));
}

mpq_class mertens_ratio(const SieveParams& sp) {
    mpq_class r(1);
    for (std::uint32_t p : sp.primes) r *= mpq_class(p - 1, p);
    r.canonicalize();
    return r;
}

} // namespace detfactor
