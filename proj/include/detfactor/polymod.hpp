#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <detfactor/residue_ring.hpp>

namespace detfactor {

// Dense polynomial over Z/NZ. Coefficients run low to high and the
// representation is normalized: the last stored coefficient is nonzero,
// the zero polynomial stores nothing. degree() is -1 for the zero
// polynomial, which orders below every real degree.
class PolyModN {
public:
    static PolyModN zero(const ModulusContext& ctx);
    static PolyModN constant(const ModulusContext& ctx, const Residue& c);
    // Takes coefficients low-first and strips trailing zeros.
    static PolyModN from_coeffs(const ModulusContext& ctx, std::vector<Residue> coeffs);

    const ModulusContext& context() const { return ctx_; }
    long degree() const { return static_cast<long>(coeffs_.size()) - 1; }
    bool is_zero() const { return coeffs_.empty(); }
    std::size_t size() const { return coeffs_.size(); }

    // Coefficient of x^i; zero beyond the stored degree.
    Residue coeff(std::size_t i) const;
    const std::vector<Residue>& coeffs() const { return coeffs_; }

    Residue eval(const Residue& x) const; // Horner, degree() ring mults

private:
    explicit PolyModN(const ModulusContext& ctx) : ctx_(ctx) {}
    ModulusContext ctx_;
    std::vector<Residue> coeffs_;
};

// Product, dispatching on operand size: schoolbook below the context's
// degree threshold, otherwise coefficient packing into one big integer
// multiplication (slot width 2*bitlen(N) + ceil(log2(min terms)) bits,
// rounded up to whole 64-bit words so unpacking is limb slicing).
// Operands must share one context; every call ticks poly_mults once.
PolyModN poly_mul(const PolyModN& f, const PolyModN& g);

// Balanced binary product tree. levels[0] are the (normalized) leaves,
// each next level pairs neighbours with poly_mul, an odd node is promoted
// unchanged, levels.back() is the full product.
struct ProductTree {
    std::vector<std::vector<PolyModN>> levels;
    const PolyModN& root() const { return levels.back().front(); }
};

ProductTree product_tree(std::vector<PolyModN> leaves);

// Values F(p) for each point, by remainder tree over the product tree of
// (x - p_i); fewer than 8 points fall back to plain Horner.
std::vector<Residue> multipoint_eval(const PolyModN& F, std::span<const Residue> points);

// The invertibility certificate a shifted evaluation needs for parameters
// (alpha, beta, d): the product of beta, of 2..d, and of alpha+j*beta for
// -d <= j <= d (3d+1 factors), with its inverse once known. Factor lists
// are regenerated on demand instead of stored; at the top doubling level
// they run to millions of entries and keeping them alive would dominate
// memory for no benefit.
class HypothesisProduct {
public:
    HypothesisProduct(const ModulusContext& ctx, std::int64_t alpha, std::int64_t beta, std::int64_t d);

    std::int64_t alpha() const { return alpha_; }
    std::int64_t beta() const { return beta_; }
    std::int64_t d() const { return d_; }
    std::size_t factor_count() const { return static_cast<std::size_t>(3 * d_ + 1); }

    // The defining factors as integers, in fixed order: beta, 2..d, then
    // alpha+j*beta for j = -d..d.
    std::vector<std::int64_t> factor_integers() const;
    // Same factors reduced into the ring.
    std::vector<Residue> factors(const ModulusContext& ctx) const;

    const Residue& product() const { return product_; }
    const std::optional<Residue>& product_inv() const { return product_inv_; }
    void set_product_inv(Residue inv) { product_inv_ = std::move(inv); }

private:
    std::int64_t alpha_;
    std::int64_t beta_;
    std::int64_t d_;
    Residue product_;
    std::optional<Residue> product_inv_;
};

// Builds the certificate and attempts the one inversion of its product.
// A noninvertible product yields the divisor witness instead; when the
// product is 0 mod N a subproduct-tree scan locates a vanishing factor.
std::variant<HypothesisProduct, DivisorWitness>
hyp_product(const ModulusContext& ctx, std::int64_t alpha, std::int64_t beta, std::int64_t d);

// Shifted evaluation: from F(0), F(beta), ..., F(d*beta) of a degree-<=d
// polynomial F (coefficients never seen), the values F(alpha + i*beta) for
// i = 0..d. Requires the matching HypothesisProduct with its inverse.
//
// The frame built from the certificate alone (inverse factorials, the
// inverse node list, the boundary products) is reusable across inputs, so
// it is exposed as an object; extend_double applies the same shift twice.
// One eval() costs one poly_mul plus O(d) ring multiplications.
class ShiftEvaluator {
public:
    ShiftEvaluator(const ModulusContext& ctx, const HypothesisProduct& hp);

    std::vector<Residue> eval(std::span<const Residue> vals) const;

    std::int64_t d() const { return d_; }

private:
    ModulusContext ctx_;
    std::int64_t alpha_;
    std::int64_t beta_;
    std::int64_t d_;
    std::vector<Residue> inv_fact_;   // 1/i! for i = 0..d
    std::vector<Residue> node_inv_;   // 1/(alpha + (m-d)*beta) for m = 0..2d
    std::vector<Residue> node_;       // alpha + (m-d)*beta for m = 0..2d
    Residue inv_beta_pow_d_;          // beta^-d
    std::optional<PolyModN> e_poly_;  // node_inv_ as a polynomial, built once
};

// One-shot convenience over ShiftEvaluator.
std::vector<Residue> shift_eval(const ModulusContext& ctx,
                                std::span<const Residue> vals,
                                const HypothesisProduct& hp);

namespace detail {
// Subproduct-tree invertibility scan shared by several callers: one gcd at
// the root, then one gcd per level while descending to the leftmost
// noninvertible leaf. Returns the root product as well.
struct ScalarTreeCheck {
    bool all_invertible = false;
    Residue product;      // product of all values
    Residue product_inv;  // set when all_invertible
    std::size_t bad_index = 0;
    mpz_class bad_gcd;    // gcd(vals[bad_index], N), in (1, N]
};
ScalarTreeCheck scalar_tree_check(const ModulusContext& ctx, std::span<const Residue> vals);
}

} // namespace detfactor
