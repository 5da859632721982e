#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include <detfactor/polymod.hpp>
#include <detfactor/residue_ring.hpp>
#include <detfactor/sieve.hpp>

namespace detfactor {

// Values of H_k(x) = H(x) H(x+1) ... H(x+k-1) on the grid 0, beta, ...,
// k*rho*beta. The grid has one surplus point beyond what the divisor scan
// needs; doubling consumes it.
struct EvalTable {
    std::int64_t k = 1;
    std::int64_t beta = 1;
    std::int64_t rho = 1;
    std::vector<Residue> values; // size k*rho + 1
};

// The two shift certificates one doubling step k -> 2k needs: a shift by
// the integer k (applied twice) and a shift by (k*rho+1)*beta.
struct GrandLevel {
    HypothesisProduct step;
    HypothesisProduct wrap;
};

// Everything r doublings need, verified up front: per level i = 0..r-1 the
// certificates for d = 2^i*rho, plus D = the product of all of them with
// its inverse. Being able to build this at all is the invertibility
// hypothesis; a failure surfaces the divisor that broke it.
struct GrandHypothesis {
    int r = 0;
    std::int64_t beta = 1;
    std::int64_t rho = 1;
    std::vector<GrandLevel> per_level;
    Residue D;
    Residue D_inv;
};

// Result of one bounded divisor search.
struct SearchOutcome {
    bool found = false;
    mpz_class bound_b;                   // the b this level certified or searched
    std::optional<mpz_class> prime;      // set when found
    std::optional<DivisorWitness> witness;
};

// Invertibility scan over arbitrary ring values: subproduct tree, one gcd
// at the root, descent to the leftmost noninvertible leaf on failure.
struct BatchCheck {
    bool all_invertible = false;
    Residue product;
    Residue product_inv; // set when all_invertible
    std::size_t bad_index = 0;
    mpz_class bad_gcd;   // gcd(vals[bad_index], N) in (1, N]; N only for values that vanish
};
BatchCheck check_invertible_batch(const ModulusContext& ctx, std::span<const Residue> vals);

// H evaluated at 0, beta, ..., rho*beta by Horner: the k = 1 table.
EvalTable eval_H_base(const ModulusContext& ctx, const PolyModN& H, std::int64_t beta, std::int64_t rho);

// Builds and verifies the doubling certificates for levels 0..r-1. All the
// integers involved are tested for invertibility before any polynomial
// work happens; the first bad one comes back as a witness.
std::variant<GrandHypothesis, DivisorWitness>
grand_hypothesis(const ModulusContext& ctx, int r, std::int64_t beta, std::int64_t rho);

// One doubling k -> 2k: three shifted evaluations (the step shift twice,
// the wrap shift once) and two pointwise ranges, discarding the one
// surplus value past the new grid.
EvalTable extend_double(const ModulusContext& ctx, const EvalTable& tbl, const GrandLevel& level);

// Table for k = 2^r from the base case by r doublings: exactly 3r shifted
// evaluations after the O(rho^2) base evaluation.
EvalTable fast_eval_Hk(const ModulusContext& ctx, const PolyModN& H, int r, std::int64_t beta,
                       std::int64_t rho, const GrandHypothesis& gh);

// A noninvertible table value is a product of k*rho wheel integers; gcd
// them against N in ascending order and return the first hit. Direct scan
// at small sizes, subproduct tree above kDrillTreeThreshold.
DivisorWitness drill_down_witness(const ModulusContext& ctx, std::int64_t table_index, std::int64_t k,
                                  std::int64_t beta, const SieveParams& sp);

// Extracts a prime divisor of N from a witness: reduce to g = gcd(x, N),
// then scan the wheel integers up to sqrt(g) in ascending order; the first
// divisor found is prime, and if none divides then g itself is.
mpz_class prime_from_witness(const ModulusContext& ctx, const DivisorWitness& w, const mpz_class& bound,
                             const SieveParams& sp);

// One level of the search: bound b = 4^r * rho * Q, grid step beta = k =
// 2^r. Either certifies that N has no prime divisor <= b or produces one.
// Requires b < N and gcd taken care of by stripping (a shared factor with
// Q short-circuits into a found divisor).
SearchOutcome find_divisor_leq_b(const ModulusContext& ctx, const SieveParams& sp, int r);

// The level bound 4^r * rho * Q.
mpz_class level_bound(const SieveParams& sp, int r);

} // namespace detfactor
