#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <detfactor/counters.hpp>

namespace detfactor {

class ModulusContext;

namespace detail {
struct ContextState;
}

// Where a divisor witness came from.
enum class WitnessSource {
    HypothesisCheck, // a small integer required invertible turned out not to be
    ProductScan,     // a product value in the evaluation table shared a factor with N
    DrillDown,       // per-element scan inside one noninvertible product value
    TrialDivision,   // plain divisibility (small primes, primorial preflight)
};

// Certificate that g is a nontrivial divisor of the modulus, together with
// the integer whose gcd against N produced it.
struct DivisorWitness {
    mpz_class g;        // 1 < g < N, g | N
    mpz_class source_x; // the integer (or lifted value) that was gcd'd with N
    WitnessSource provenance = WitnessSource::TrialDivision;
};

// Value in Z/NZ. Residues remember which context made them so accidental
// mixing of moduli is caught instead of silently computing garbage.
class Residue {
public:
    Residue() = default; // unattached; usable only as an assignment target

    const mpz_class& value() const { return v_; }
    bool is_zero() const { return v_ == 0; }

    bool operator==(const Residue& o) const { return owner_ == o.owner_ && v_ == o.v_; }
    bool operator!=(const Residue& o) const { return !(*this == o); }

private:
    friend class ModulusContext;
    Residue(mpz_class v, const detail::ContextState* owner) : v_(std::move(v)), owner_(owner) {}

    mpz_class v_;
    const detail::ContextState* owner_ = nullptr;
};

// Result of a single inversion attempt: an inverse, a divisor of N, or the
// report that the input was 0 mod N (gcd degenerates to N itself there).
class InvertOutcome {
public:
    static InvertOutcome inverse(Residue r);
    static InvertOutcome divisor(DivisorWitness w);
    static InvertOutcome zero();

    bool is_inverse() const { return kind_ == Kind::Inverse; }
    bool is_divisor() const { return kind_ == Kind::Divisor; }
    bool is_zero() const { return kind_ == Kind::Zero; }

    const Residue& inverse_value() const;      // throws unless is_inverse()
    const DivisorWitness& witness() const;     // throws unless is_divisor()

private:
    enum class Kind { Inverse, Divisor, Zero };
    Kind kind_ = Kind::Zero;
    Residue inv_;
    DivisorWitness wit_;
};

struct ContextTuning {
    int schoolbook_threshold = 16; // poly_mul switches to packed multiply at this degree
    int threads = 1;               // cap for the few internally parallel loops
};

// Arithmetic provider for one modulus. Cheap to copy; copies share the same
// underlying state (and therefore the same counters). Construction rejects
// N < 2. All operations are pure value functions apart from counter ticks.
class ModulusContext {
public:
    using Tuning = ContextTuning;

    explicit ModulusContext(mpz_class N,
                            std::shared_ptr<OpCounters> counters = nullptr,
                            Tuning tuning = {});

    const mpz_class& modulus() const;
    // ceil(log2 N): number of bits needed so that residues fit strictly below 2^bitlen.
    unsigned bitlen() const;

    OpCounters& counters() const;
    const Tuning& tuning() const;

    bool same_context(const ModulusContext& other) const { return state_.get() == other.state_.get(); }

    // Canonical representative in [0, N) of an arbitrary signed integer.
    Residue residue(const mpz_class& z) const;
    Residue residue(long z) const { return residue(mpz_class(z)); }
    Residue zero() const;
    Residue one() const;

    Residue add(const Residue& a, const Residue& b) const;
    Residue sub(const Residue& a, const Residue& b) const;
    Residue mul(const Residue& a, const Residue& b) const; // counted in ring_mults
    Residue neg(const Residue& a) const;

    // acc <- acc*b and acc <- acc+b without temporaries, for hot loops.
    void mul_assign(Residue& acc, const Residue& b) const;
    void add_assign(Residue& acc, const Residue& b) const;

    // One extended-gcd against N (counted in gcd_calls).
    InvertOutcome invert_or_divisor(const Residue& x) const;

    // Inverses of every entry of rs from one known inverse of their product,
    // by the prefix/suffix-product scheme: at most 3*len(rs)+1 ring
    // multiplications and no gcds. The result is spot-checked on entry 0;
    // an inconsistent prod_inv throws std::invalid_argument.
    std::vector<Residue> batch_invert(std::span<const Residue> rs, const Residue& prod_inv) const;

    // Enforces that r was produced by this context.
    void require_mine(const Residue& r) const;

private:
    std::shared_ptr<detail::ContextState> state_;
};

} // namespace detfactor
