#include <detfactor/residue_ring.hpp>

#include <stdexcept>
#include <utility>

namespace detfactor {

namespace detail {
struct ContextState {
    mpz_class N;
    unsigned bitlen = 0;
    std::shared_ptr<OpCounters> counters;
    ModulusContext::Tuning tuning;
};
}

using detail::ContextState;

InvertOutcome InvertOutcome::inverse(Residue r) {
    InvertOutcome o;
    o.kind_ = Kind::Inverse;
    o.inv_ = std::move(r);
    return o;
}

InvertOutcome InvertOutcome::divisor(DivisorWitness w) {
    InvertOutcome o;
    o.kind_ = Kind::Divisor;
    o.wit_ = std::move(w);
    return o;
}

InvertOutcome InvertOutcome::zero() {
    InvertOutcome o;
    o.kind_ = Kind::Zero;
    return o;
}

const Residue& InvertOutcome::inverse_value() const {
    if (kind_ != Kind::Inverse) throw std::logic_error("InvertOutcome: no inverse present");
    return inv_;
}

const DivisorWitness& InvertOutcome::witness() const {
    if (kind_ != Kind::Divisor) throw std::logic_error("InvertOutcome: no divisor present");
    return wit_;
}

static unsigned ceil_log2(const mpz_class& N) {
    // mpz_sizeinbase returns floor(log2)+1; exact powers of two land one high.
    unsigned sz = static_cast<unsigned>(mpz_sizeinbase(N.get_mpz_t(), 2));
    if (mpz_popcount(N.get_mpz_t()) == 1) return sz - 1;
    return sz;
}

ModulusContext::ModulusContext(mpz_class N, std::shared_ptr<OpCounters> counters, Tuning tuning) {
    if (N < 2) throw std::invalid_argument("ModulusContext: modulus must be >= 2");
    if (tuning.threads < 1) tuning.threads = 1;
    auto st = std::make_shared<ContextState>();
    st->bitlen = ceil_log2(N);
    st->N = std::move(N);
    st->counters = counters ? std::move(counters) : std::make_shared<OpCounters>();
    st->tuning = tuning;
    state_ = std::move(st);
}

const mpz_class& ModulusContext::modulus() const { return state_->N; }
unsigned ModulusContext::bitlen() const { return state_->bitlen; }
OpCounters& ModulusContext::counters() const { return *state_->counters; }
const ModulusContext::Tuning& ModulusContext::tuning() const { return state_->tuning; }

void ModulusContext::require_mine(const Residue& r) const {
    if (r.owner_ != state_.get())
        throw std::invalid_argument("residue belongs to a different modulus context");
}

Residue ModulusContext::residue(const mpz_class& z) const {
    mpz_class r;
    mpz_mod(r.get_mpz_t(), z.get_mpz_t(), state_->N.get_mpz_t()); // always lands in [0, N)
    return Residue(std::move(r), state_.get());
}

Residue ModulusContext::zero() const { return Residue(mpz_class(0), state_.get()); }

Residue ModulusContext::one() const { return Residue(mpz_class(1), state_.get()); }

Residue ModulusContext::add(const Residue& a, const Residue& b) const {
    require_mine(a);
    require_mine(b);
    mpz_class r = a.value() + b.value();
    if (r >= state_->N) r -= state_->N;
    return Residue(std::move(r), state_.get());
}

Residue ModulusContext::sub(const Residue& a, const Residue& b) const {
    require_mine(a);
    require_mine(b);
    mpz_class r = a.value() - b.value();
    if (r < 0) r += state_->N;
    return Residue(std::move(r), state_.get());
}

Residue ModulusContext::mul(const Residue& a, const Residue& b) const {
    require_mine(a);
    require_mine(b);
    mpz_class r = a.value() * b.value();
    mpz_mod(r.get_mpz_t(), r.get_mpz_t(), state_->N.get_mpz_t());
    state_->counters->add_ring_mults();
    return Residue(std::move(r), state_.get());
}

Residue ModulusContext::neg(const Residue& a) const {
    require_mine(a);
    if (a.is_zero()) return a;
    mpz_class r = state_->N - a.value();
    return Residue(std::move(r), state_.get());
}

void ModulusContext::mul_assign(Residue& acc, const Residue& b) const {
    require_mine(acc);
    require_mine(b);
    acc.v_ *= b.value();
    mpz_mod(acc.v_.get_mpz_t(), acc.v_.get_mpz_t(), state_->N.get_mpz_t());
    state_->counters->add_ring_mults();
}

void ModulusContext::add_assign(Residue& acc, const Residue& b) const {
    require_mine(acc);
    require_mine(b);
    acc.v_ += b.value();
    if (acc.v_ >= state_->N) acc.v_ -= state_->N;
}

InvertOutcome ModulusContext::invert_or_divisor(const Residue& x) const {
    require_mine(x);
    state_->counters->add_gcd_calls();
    if (x.is_zero()) return InvertOutcome::zero();
    mpz_class g, s;
    mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), nullptr, x.value().get_mpz_t(), state_->N.get_mpz_t());
    if (g == 1) {
        mpz_mod(s.get_mpz_t(), s.get_mpz_t(), state_->N.get_mpz_t());
        return InvertOutcome::inverse(Residue(std::move(s), state_.get()));
    }
    if (g == state_->N) return InvertOutcome::zero(); // unreachable for canonical residues in [1, N)
    DivisorWitness w;
    w.g = std::move(g);
    w.source_x = x.value();
    w.provenance = WitnessSource::ProductScan;
    return InvertOutcome::divisor(std::move(w));
}

std::vector<Residue> ModulusContext::batch_invert(std::span<const Residue> rs, const Residue& prod_inv) const {
    require_mine(prod_inv);
    const std::size_t d = rs.size();
    std::vector<Residue> out;
    if (d == 0) return out;
    for (const Residue& r : rs) require_mine(r);

    // prefix[i] = rs[0]*...*rs[i]
    std::vector<Residue> prefix;
    prefix.reserve(d);
    prefix.push_back(rs[0]);
    for (std::size_t i = 1; i < d; ++i) prefix.push_back(mul(prefix[i - 1], rs[i]));

    out.resize(d);
    Residue suffix = prod_inv; // inverse of rs[i]*...*rs[d-1], walked right to left
    for (std::size_t i = d; i-- > 1;) {
        out[i] = mul(suffix, prefix[i - 1]);
        mul_assign(suffix, rs[i]);
    }
    out[0] = suffix;

    // out[0] soaks up every factor of prod_inv, so one check covers the batch.
    if (mul(rs[0], out[0]).value() != 1)
        throw std::invalid_argument("batch_invert: prod_inv is not the inverse of the product");
    return out;
}

} // namespace detfactor
