#pragma once

#include <detfactor/giantstep.hpp>

#include <optional>
#include <utility>
#include <vector>

namespace detfactor {

struct PrimePower {
    mpz_class p;
    unsigned e = 0;
};

// How primality of the listed factors was established. Both are
// deterministic and unconditional; the tag records the route.
//   Complete: at least one factor certified by search-bound exhaustion
//             (no divisor up to b with b*b >= cofactor).
//   TrialVerified: everything came from plain trial division.
enum class Proof { Complete, TrialVerified };

struct Factorization {
    mpz_class n;
    std::vector<PrimePower> factors; // ascending p, distinct
    Proof cofactor_proof = Proof::Complete;
};

enum class Algo { Sieved, DegenerateBgs, Strassen, Trial };

struct DriverConfig {
    Algo algorithm = Algo::Sieved;
    std::optional<int> B_override; // sieved only; default picks from the size of n
    mpz_class small_n_cutoff = mpz_class(1) << 20; // below this, trial-divide outright
    int schoolbook_threshold = 16;
    int threads = 1;
    bool stats_enabled = true; // when false, RunStats.counters stays zeroed
};

struct RunStats {
    CounterSnapshot counters;
    int B = 0;           // wheel parameter actually used (0 when no wheel)
    int levels_r = -1; // highest search level reached, -1 if the engine never ran
    mpz_class b_final = 0; // search bound at the last engine call
    double wall_ms = 0.0;
};

struct FactorOutcome {
    Factorization factorization;
    RunStats stats;
};

// max(3, floor(ln n / 11)), capped at 64.
int choose_B(const mpz_class& n);

// Smallest r >= 0 with level_bound(sp, r)^2 >= n, i.e. the level at which
// a prime n gets certified.
int predicted_r0(const mpz_class& n, const SieveParams& sp);

// Divide out every prime below B. Returns the stripped prime powers and the
// cofactor, which is then coprime to the wheel modulus.
std::pair<std::vector<PrimePower>, mpz_class> strip_small(const mpz_class& n, int B);

// Divide out every prime factor <= bound. The returned cofactor has no
// factor <= min(bound, sqrt(cofactor)); when bound >= sqrt(n) it is 1 or prime.
std::pair<std::vector<PrimePower>, mpz_class> trial_division_up_to(const mpz_class& n,
                                                                   const mpz_class& bound);

FactorOutcome factor_trial(const mpz_class& n);
FactorOutcome factor_sieved(const mpz_class& n, const DriverConfig& cfg = {});
FactorOutcome factor_bgs(const mpz_class& n, const DriverConfig& cfg = {});
FactorOutcome factor_strassen(const mpz_class& n, const DriverConfig& cfg = {});

// Dispatch on cfg.algorithm.
FactorOutcome factor(const mpz_class& n, const DriverConfig& cfg = {});

// Recompute the product and certify each listed prime by trial division.
// Independent of the engine; used as the external check in tests.
bool verify_factorization(const Factorization& f);

} // namespace detfactor
