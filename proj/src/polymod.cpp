#include <detfactor/polymod.hpp>

#include <bit>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <utility>

namespace detfactor {

static std::uint64_t ceil_log2_u64(std::uint64_t n) {
    if (n <= 1) return 0;
    return std::bit_width(n - 1);
}

PolyModN PolyModN::zero(const ModulusContext& ctx) { return PolyModN(ctx); }

PolyModN PolyModN::constant(const ModulusContext& ctx, const Residue& c) {
    ctx.require_mine(c);
    PolyModN p(ctx);
    if (!c.is_zero()) p.coeffs_.push_back(c);
    return p;
}

PolyModN PolyModN::from_coeffs(const ModulusContext& ctx, std::vector<Residue> coeffs) {
    for (const Residue& c : coeffs) ctx.require_mine(c);
    while (!coeffs.empty() && coeffs.back().is_zero()) coeffs.pop_back();
    PolyModN p(ctx);
    p.coeffs_ = std::move(coeffs);
    return p;
}

Residue PolyModN::coeff(std::size_t i) const {
    if (i < coeffs_.size()) return coeffs_[i];
    return ctx_.zero();
}

Residue PolyModN::eval(const Residue& x) const {
    ctx_.require_mine(x);
    if (coeffs_.empty()) return ctx_.zero();
    Residue acc = coeffs_.back();
    for (std::size_t i = coeffs_.size() - 1; i-- > 0;) {
        ctx_.mul_assign(acc, x);
        ctx_.add_assign(acc, coeffs_[i]);
    }
    return acc;
}

static PolyModN poly_mul_schoolbook(const PolyModN& f, const PolyModN& g) {
    const ModulusContext& ctx = f.context();
    std::vector<Residue> out(f.size() + g.size() - 1, ctx.zero());
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f.coeffs()[i].is_zero()) continue;
        for (std::size_t j = 0; j < g.size(); ++j) {
            Residue t = ctx.mul(f.coeffs()[i], g.coeffs()[j]);
            ctx.add_assign(out[i + j], t);
        }
    }
    return PolyModN::from_coeffs(ctx, std::move(out));
}

static void export_words(const mpz_class& v, std::uint64_t* dst) {
    std::size_t count = 0;
    mpz_export(dst, &count, -1, sizeof(std::uint64_t), 0, 0, v.get_mpz_t());
    // v == 0 writes nothing; the buffer is pre-zeroed.
}

static mpz_class import_words(const std::uint64_t* src, std::size_t n) {
    mpz_class v;
    mpz_import(v.get_mpz_t(), n, -1, sizeof(std::uint64_t), 0, 0, src);
    return v;
}

// Packs both operands into single integers, one slot per coefficient, and
// lets the bignum multiply do the convolution. Slots are wide enough that
// neighbouring coefficients cannot carry into each other, and whole-word
// slots make unpacking a pointer offset instead of a bit shift.
static PolyModN poly_mul_packed(const PolyModN& f, const PolyModN& g) {
    const ModulusContext& ctx = f.context();
    const std::size_t lf = f.size(), lg = g.size();
    const std::uint64_t slot_bits_raw =
        2ull * ctx.bitlen() + ceil_log2_u64(std::min(lf, lg));
    const std::size_t wp = static_cast<std::size_t>((slot_bits_raw + 63) / 64);

    std::vector<std::uint64_t> buf_f(lf * wp, 0), buf_g(lg * wp, 0);
    for (std::size_t i = 0; i < lf; ++i) export_words(f.coeffs()[i].value(), buf_f.data() + i * wp);
    for (std::size_t i = 0; i < lg; ++i) export_words(g.coeffs()[i].value(), buf_g.data() + i * wp);

    mpz_class fa = import_words(buf_f.data(), buf_f.size());
    mpz_class ga = import_words(buf_g.data(), buf_g.size());
    mpz_class prod = fa * ga;

    const std::size_t lout = lf + lg - 1;
    std::vector<std::uint64_t> buf_out((lf + lg) * wp, 0);
    export_words(prod, buf_out.data());

    std::vector<Residue> out;
    out.reserve(lout);
    for (std::size_t i = 0; i < lout; ++i)
        out.push_back(ctx.residue(import_words(buf_out.data() + i * wp, wp)));
    return PolyModN::from_coeffs(ctx, std::move(out));
}

PolyModN poly_mul(const PolyModN& f, const PolyModN& g) {
    if (!f.context().same_context(g.context()))
        throw std::invalid_argument("poly_mul: operands from different modulus contexts");
    const ModulusContext& ctx = f.context();
    ctx.counters().add_poly_mult();
    if (f.is_zero() || g.is_zero()) return PolyModN::zero(ctx);
    ctx.counters().note_poly_degree(static_cast<std::uint64_t>(std::max(f.degree(), g.degree())));
    if (std::min(f.degree(), g.degree()) < ctx.tuning().schoolbook_threshold)
        return poly_mul_schoolbook(f, g);
    return poly_mul_packed(f, g);
}

ProductTree product_tree(std::vector<PolyModN> leaves) {
    if (leaves.empty()) throw std::invalid_argument("product_tree: no leaves");
    for (std::size_t i = 1; i < leaves.size(); ++i)
        if (!leaves[i].context().same_context(leaves[0].context()))
            throw std::invalid_argument("product_tree: leaves from different modulus contexts");
    ProductTree t;
    t.levels.push_back(std::move(leaves));
    while (t.levels.back().size() > 1) {
        const auto& cur = t.levels.back();
        std::vector<PolyModN> next;
        next.reserve((cur.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < cur.size(); i += 2) next.push_back(poly_mul(cur[i], cur[i + 1]));
        if (cur.size() % 2) next.push_back(cur.back()); // odd node rides up unchanged
        t.levels.push_back(std::move(next));
    }
    return t;
}

// Remainder of F by a monic divisor; degree(divisor) >= 1.
static PolyModN poly_rem_monic(const PolyModN& F, const PolyModN& D) {
    const ModulusContext& ctx = F.context();
    const long dd = D.degree();
    if (F.degree() < dd) return F;
    std::vector<Residue> r = F.coeffs();
    for (std::size_t i = r.size(); i-- > static_cast<std::size_t>(dd);) {
        if (r[i].is_zero()) continue;
        Residue c = r[i];
        for (long j = 0; j < dd; ++j) {
            Residue t = ctx.mul(c, D.coeffs()[static_cast<std::size_t>(j)]);
            r[i - static_cast<std::size_t>(dd) + static_cast<std::size_t>(j)] =
                ctx.sub(r[i - static_cast<std::size_t>(dd) + static_cast<std::size_t>(j)], t);
        }
        r[i] = ctx.zero();
    }
    r.resize(static_cast<std::size_t>(dd));
    return PolyModN::from_coeffs(ctx, std::move(r));
}

std::vector<Residue> multipoint_eval(const PolyModN& F, std::span<const Residue> points) {
    const ModulusContext& ctx = F.context();
    std::vector<Residue> out;
    out.reserve(points.size());
    if (points.size() < 8) {
        for (const Residue& p : points) out.push_back(F.eval(p));
        return out;
    }

    std::vector<PolyModN> leaves;
    leaves.reserve(points.size());
    for (const Residue& p : points) {
        std::vector<Residue> lin{ctx.neg(p), ctx.one()};
        leaves.push_back(PolyModN::from_coeffs(ctx, std::move(lin)));
    }
    ProductTree tree = product_tree(std::move(leaves));

    // Push F down the tree: remainder by each node, promoted nodes pass through.
    std::vector<PolyModN> upper{poly_rem_monic(F, tree.root())};
    for (std::size_t lvl = tree.levels.size() - 1; lvl-- > 0;) {
        const auto& nodes = tree.levels[lvl];
        std::vector<PolyModN> lower;
        lower.reserve(nodes.size());
        for (std::size_t j = 0; j < upper.size(); ++j) {
            const std::size_t c0 = 2 * j, c1 = 2 * j + 1;
            if (c1 < nodes.size()) {
                lower.push_back(poly_rem_monic(upper[j], nodes[c0]));
                lower.push_back(poly_rem_monic(upper[j], nodes[c1]));
            } else {
                lower.push_back(std::move(upper[j]));
            }
        }
        upper = std::move(lower);
    }
    for (const PolyModN& r : upper) out.push_back(r.coeff(0));
    return out;
}

namespace detail {

ScalarTreeCheck scalar_tree_check(const ModulusContext& ctx, std::span<const Residue> vals) {
    ScalarTreeCheck res;
    if (vals.empty()) {
        res.all_invertible = true;
        res.product = ctx.one();
        res.product_inv = ctx.one();
        return res;
    }

    std::vector<std::vector<Residue>> levels;
    levels.emplace_back(vals.begin(), vals.end());
    while (levels.back().size() > 1) {
        const auto& cur = levels.back();
        std::vector<Residue> next;
        next.reserve((cur.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < cur.size(); i += 2) next.push_back(ctx.mul(cur[i], cur[i + 1]));
        if (cur.size() % 2) next.push_back(cur.back());
        levels.push_back(std::move(next));
    }

    res.product = levels.back().front();
    InvertOutcome root = ctx.invert_or_divisor(res.product);
    if (root.is_inverse()) {
        res.all_invertible = true;
        res.product_inv = root.inverse_value();
        return res;
    }

    // Walk toward the leftmost noninvertible leaf; a level's left child
    // decides the branch with one gcd (left invertible forces right bad).
    const mpz_class& N = ctx.modulus();
    std::size_t j = 0;
    for (std::size_t lvl = levels.size() - 1; lvl-- > 0;) {
        const auto& nodes = levels[lvl];
        const std::size_t c0 = 2 * j, c1 = 2 * j + 1;
        if (c1 >= nodes.size()) {
            j = c0;
            continue;
        }
        mpz_class g;
        mpz_gcd(g.get_mpz_t(), nodes[c0].value().get_mpz_t(), N.get_mpz_t());
        ctx.counters().add_gcd_calls();
        j = (g > 1) ? c0 : c1;
    }
    res.all_invertible = false;
    res.bad_index = j;
    mpz_gcd(res.bad_gcd.get_mpz_t(), vals[j].value().get_mpz_t(), N.get_mpz_t());
    ctx.counters().add_gcd_calls();
    return res;
}

} // namespace detail

HypothesisProduct::HypothesisProduct(const ModulusContext& ctx, std::int64_t alpha, std::int64_t beta,
                                     std::int64_t d)
    : alpha_(alpha), beta_(beta), d_(d) {
    if (d < 1) throw std::invalid_argument("HypothesisProduct: d must be >= 1");
    if (beta == 0) throw std::invalid_argument("HypothesisProduct: beta must be nonzero");
    const __int128 reach = static_cast<__int128>(std::llabs(alpha)) +
                           static_cast<__int128>(d) * std::llabs(beta);
    if (reach > (static_cast<__int128>(1) << 62))
        throw std::domain_error("HypothesisProduct: parameters exceed the engine integer range");
    if (alpha % beta == 0) {
        const std::int64_t q = alpha / beta;
        if (-d <= q && q <= d)
            throw std::invalid_argument("HypothesisProduct: alpha + j*beta vanishes as an integer");
    }

    Residue acc = ctx.one();
    for (std::int64_t x : factor_integers()) ctx.mul_assign(acc, ctx.residue(static_cast<long>(x)));
    product_ = std::move(acc);
}

std::vector<std::int64_t> HypothesisProduct::factor_integers() const {
    std::vector<std::int64_t> xs;
    xs.reserve(factor_count());
    xs.push_back(beta_);
    for (std::int64_t t = 2; t <= d_; ++t) xs.push_back(t);
    for (std::int64_t j = -d_; j <= d_; ++j) xs.push_back(alpha_ + j * beta_);
    return xs;
}

std::vector<Residue> HypothesisProduct::factors(const ModulusContext& ctx) const {
    std::vector<Residue> rs;
    rs.reserve(factor_count());
    for (std::int64_t x : factor_integers()) rs.push_back(ctx.residue(static_cast<long>(x)));
    return rs;
}

std::variant<HypothesisProduct, DivisorWitness>
hyp_product(const ModulusContext& ctx, std::int64_t alpha, std::int64_t beta, std::int64_t d) {
    HypothesisProduct hp(ctx, alpha, beta, d);

    InvertOutcome o = ctx.invert_or_divisor(hp.product());
    if (o.is_inverse()) {
        hp.set_product_inv(o.inverse_value());
        return hp;
    }

    // Product noninvertible: locate one offending factor so the caller gets
    // an integer-level witness rather than a lump product.
    std::vector<Residue> rs = hp.factors(ctx);
    detail::ScalarTreeCheck chk = detail::scalar_tree_check(ctx, rs);
    if (chk.all_invertible)
        throw std::logic_error("hyp_product: product noninvertible but all factors invertible");
    if (chk.bad_gcd == ctx.modulus())
        throw std::domain_error("hyp_product: a factor vanishes mod N; parameters exceed the modulus");
    const std::int64_t x = hp.factor_integers()[chk.bad_index];
    DivisorWitness w;
    mpz_class ax(static_cast<long>(x < 0 ? -x : x));
    mpz_gcd(w.g.get_mpz_t(), ax.get_mpz_t(), ctx.modulus().get_mpz_t());
    ctx.counters().add_gcd_calls();
    w.source_x = static_cast<long>(x);
    w.provenance = WitnessSource::HypothesisCheck;
    return w;
}

ShiftEvaluator::ShiftEvaluator(const ModulusContext& ctx, const HypothesisProduct& hp)
    : ctx_(ctx), alpha_(hp.alpha()), beta_(hp.beta()), d_(hp.d()) {
    if (!hp.product_inv())
        throw std::invalid_argument("ShiftEvaluator: hypothesis product has no inverse attached");

    std::vector<Residue> rs = hp.factors(ctx);
    std::vector<Residue> inv = ctx.batch_invert(rs, *hp.product_inv());
    const std::size_t d = static_cast<std::size_t>(d_);

    // Factor layout: [0] beta, [1 .. d-1] the integers 2..d, [d .. 3d] the
    // nodes alpha + j*beta for j = -d..d.
    inv_fact_.reserve(d + 1);
    inv_fact_.push_back(ctx.one());
    if (d >= 1) inv_fact_.push_back(ctx.one());
    for (std::size_t t = 2; t <= d; ++t) inv_fact_.push_back(ctx.mul(inv_fact_[t - 1], inv[t - 1]));

    node_.assign(rs.begin() + static_cast<std::ptrdiff_t>(d), rs.end());
    node_inv_.assign(inv.begin() + static_cast<std::ptrdiff_t>(d), inv.end());

    Residue bp = inv[0];
    for (std::int64_t i = 1; i < d_; ++i) ctx.mul_assign(bp, inv[0]);
    inv_beta_pow_d_ = std::move(bp);

    e_poly_ = PolyModN::from_coeffs(ctx, node_inv_); // inverses are nonzero, nothing strips
}

std::vector<Residue> ShiftEvaluator::eval(std::span<const Residue> vals) const {
    const std::size_t d = static_cast<std::size_t>(d_);
    if (vals.size() != d + 1)
        throw std::invalid_argument("ShiftEvaluator: expected d+1 input values");
    ctx_.counters().add_shift_eval();

    // Lagrange through the nodes 0, beta, ..., d*beta:
    //   F(alpha + k*beta) = D_k * sum_j c_j / (alpha + (k-j)*beta)
    // with c_j = F(j*beta) * (-1)^(d-j) / (beta^d j! (d-j)!) and
    // D_k the product of (alpha + (k-t)*beta) over t = 0..d. The sum over
    // j is one convolution against the inverse-node sequence.
    std::vector<Residue> c;
    c.reserve(d + 1);
    for (std::size_t j = 0; j <= d; ++j) {
        Residue v = ctx_.mul(vals[j], inv_fact_[j]);
        ctx_.mul_assign(v, inv_fact_[d - j]);
        ctx_.mul_assign(v, inv_beta_pow_d_);
        if ((d - j) % 2) v = ctx_.neg(v);
        c.push_back(std::move(v));
    }

    PolyModN cp = PolyModN::from_coeffs(ctx_, std::move(c));
    PolyModN conv = poly_mul(cp, *e_poly_);

    std::vector<Residue> out;
    out.reserve(d + 1);
    Residue D = node_[0];
    for (std::size_t m = 1; m <= d; ++m) ctx_.mul_assign(D, node_[m]);
    out.push_back(ctx_.mul(D, conv.coeff(d)));
    for (std::size_t k = 1; k <= d; ++k) {
        ctx_.mul_assign(D, node_[d + k]);
        ctx_.mul_assign(D, node_inv_[k - 1]);
        out.push_back(ctx_.mul(D, conv.coeff(d + k)));
    }
    return out;
}

std::vector<Residue> shift_eval(const ModulusContext& ctx, std::span<const Residue> vals,
                                const HypothesisProduct& hp) {
    return ShiftEvaluator(ctx, hp).eval(vals);
}

} // namespace detfactor
