#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include <detfactor/polymod.hpp>
#include <detfactor/residue_ring.hpp>

namespace detfactor {

// Wheel data for a smoothness bound B: the primes below B, their product Q,
// rho = phi(Q), and the rho residues 1 <= j <= Q coprime to Q. B = 0 is the
// degenerate wheel (Q = 1, rho = 1, residues = {1}); it turns the sieved
// machinery into the plain factorial baseline, reusing every code path.
struct SieveParams {
    int B = 0;
    std::vector<std::uint32_t> primes;
    mpz_class Q = 1;
    std::int64_t rho = 1;
    std::vector<std::uint64_t> residues{1};

    bool is_degenerate() const { return B == 0; }
    std::uint64_t q_u64() const { return mpz_get_ui(Q.get_mpz_t()); }

    static SieveParams degenerate();
};

// Primes p < B by Eratosthenes. B <= 2 gives the empty list.
std::vector<std::uint32_t> primes_below(int B);

// Wheel for bound B. Requires 2 < B <= 64; a primorial too large to
// enumerate (past ~2^62) is rejected with std::length_error.
SieveParams sieve_params(int B);

// H(x) = prod over residues j of (Q*x + j), degree rho, built by repeated
// multiplication with linear factors. If gcd(N, Q) > 1 the caller forgot to
// strip small primes and gets that divisor as a witness instead.
std::variant<PolyModN, DivisorWitness> build_H(const SieveParams& sp, const ModulusContext& ctx);

// rho/Q as an exact rational, i.e. prod (p-1)/p over the wheel primes. The
// engine's table shrinks by sqrt(Q/rho) against the degenerate baseline, so
// this is the knob that says what a bigger B buys.
mpq_class mertens_ratio(const SieveParams& sp);

} // namespace detfactor
