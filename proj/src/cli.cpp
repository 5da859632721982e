#include <detfactor/cli.hpp>
#include <detfactor/factorize.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

namespace detfactor {

namespace {

using nlohmann::json;

int env_threads() {
    const char* s = std::getenv("DETFACTOR_THREADS");
    if (!s) return 1;
    const int t = std::atoi(s);
    return t < 1 ? 1 : (t > 64 ? 64 : t);
}

Algo algo_from_name(const std::string& name) {
    if (name == "sieved") return Algo::Sieved;
    if (name == "bgs") return Algo::DegenerateBgs;
    if (name == "strassen") return Algo::Strassen;
    if (name == "trial") return Algo::Trial;
    throw CLI::ValidationError("--algo", "expected one of sieved|bgs|strassen|trial");
}

std::string factors_text(const Factorization& f) {
    if (f.factors.empty()) return f.n.get_str() + " has no prime factors";
    if (f.factors.size() == 1 && f.factors[0].e == 1 && f.factors[0].p == f.n)
        return f.n.get_str() + " is prime";
    std::string s = f.n.get_str() + " = ";
    bool first = true;
    for (const auto& pp : f.factors) {
        if (!first) s += " * ";
        first = false;
        s += pp.p.get_str();
        if (pp.e > 1) s += "^" + std::to_string(pp.e);
    }
    return s;
}

json stats_json(const RunStats& st) {
    return json{{"ring_mults", st.counters.ring_mults},
                {"poly_mults", st.counters.poly_mults},
                {"max_poly_degree", st.counters.max_poly_degree},
                {"gcd_calls", st.counters.gcd_calls},
                {"shift_eval_calls", st.counters.shift_eval_calls},
                {"levels_r", st.levels_r},
                {"b_final", st.b_final.get_str()}};
}

json factor_json(const std::string& algo, const FactorOutcome& out, bool with_stats) {
    json jf = json::array();
    for (const auto& pp : out.factorization.factors)
        jf.push_back(json{{"p", pp.p.get_str()}, {"e", pp.e}});
    json j{{"n", out.factorization.n.get_str()},
           {"algo", algo},
           {"B", out.stats.B},
           {"factors", std::move(jf)},
           {"ms", out.stats.wall_ms}};
    if (with_stats) j["stats"] = stats_json(out.stats);
    return j;
}

mpz_class parse_n(const std::string& s) {
    mpz_class n;
    if (mpz_set_str(n.get_mpz_t(), s.c_str(), 10) != 0 || n < 1)
        throw CLI::ValidationError("n", "expected a positive decimal integer");
    return n;
}

mpz_class random_prime(std::mt19937_64& rng, int bits) {
    mpz_class x = 0;
    for (int got = 0; got < bits; got += 64) {
        x <<= 64;
        x += mpz_class(static_cast<unsigned long>(rng()));
    }
    x &= (mpz_class(1) << bits) - 1;
    x |= mpz_class(1) << (bits - 1); // keep the size honest
    mpz_class p;
    mpz_class lo = x - 1;
    mpz_nextprime(p.get_mpz_t(), lo.get_mpz_t());
    return p;
}

struct BenchRow {
    std::string algo;
    int B = 0;
    double wall_ms = 0;
    std::uint64_t ring_mults = 0;
    double predicted = 1.0;
};

int run_bench(int bits, int count, std::uint64_t seed, const std::string& b_list, bool as_json,
              int threads, std::ostream& out) {
    std::vector<int> bs;
    std::stringstream ss(b_list);
    for (std::string tok; std::getline(ss, tok, ',');)
        if (!tok.empty()) bs.push_back(std::stoi(tok));

    std::mt19937_64 rng(seed);
    std::vector<mpz_class> ns;
    for (int i = 0; i < count; ++i) {
        const int pb = bits / 2, qb = bits - bits / 2;
        mpz_class p = random_prime(rng, pb);
        mpz_class q = random_prime(rng, qb);
        if (p == q) {
            mpz_class qq = q + 1;
            mpz_nextprime(q.get_mpz_t(), qq.get_mpz_t());
        }
        ns.push_back(p * q);
    }

    DriverConfig cfg;
    cfg.threads = threads;

    auto run_variant = [&](Algo algo, int B) {
        BenchRow row;
        row.algo = (algo == Algo::DegenerateBgs) ? "bgs" : "sieved";
        row.B = B;
        DriverConfig c = cfg;
        c.algorithm = algo;
        if (algo == Algo::Sieved) {
            c.B_override = B;
            const mpq_class ratio = mertens_ratio(sieve_params(B)); // rho/Q
            row.predicted = std::sqrt(1.0 / mpq_get_d(ratio.get_mpq_t()));
        }
        for (const mpz_class& n : ns) {
            FactorOutcome r = factor(n, c);
            if (!verify_factorization(r.factorization))
                throw std::runtime_error("bench: factorization failed verification");
            row.wall_ms += r.stats.wall_ms;
            row.ring_mults += r.stats.counters.ring_mults;
        }
        return row;
    };

    const BenchRow base = run_variant(Algo::DegenerateBgs, 0);
    std::vector<BenchRow> rows{base};
    for (int B : bs) rows.push_back(run_variant(Algo::Sieved, B));

    auto speedup = [&](double a, double b) { return b > 0 ? a / b : 0.0; };

    if (as_json) {
        json jrows = json::array();
        for (const auto& r : rows)
            jrows.push_back(json{{"algo", r.algo},
                                 {"B", r.B},
                                 {"wall_ms", r.wall_ms},
                                 {"ring_mults", r.ring_mults},
                                 {"speedup_wall", speedup(base.wall_ms, r.wall_ms)},
                                 {"speedup_mults", speedup(static_cast<double>(base.ring_mults),
                                                          static_cast<double>(r.ring_mults))},
                                 {"predicted", r.predicted}});
        json j{{"bits", bits}, {"count", count}, {"seed", seed}, {"rows", std::move(jrows)}};
        json jns = json::array();
        for (const auto& n : ns) jns.push_back(n.get_str());
        j["semiprimes"] = std::move(jns);
        out << j.dump(2) << "\n";
        return 0;
    }

    out << "bench: bits=" << bits << " count=" << count << " seed=" << seed << "\n";
    for (std::size_t i = 0; i < ns.size(); ++i) out << "  n[" << i << "] = " << ns[i].get_str() << "\n";
    out << std::left << std::setw(8) << "algo" << std::setw(5) << "B" << std::right << std::setw(12)
        << "wall_ms" << std::setw(16) << "ring_mults" << std::setw(10) << "sp_wall" << std::setw(10)
        << "sp_mult" << std::setw(11) << "predicted" << "\n";
    for (const auto& r : rows) {
        std::ostringstream line;
        line << std::left << std::setw(8) << r.algo;
        if (r.algo == "bgs")
            line << std::setw(5) << "-";
        else
            line << std::setw(5) << r.B;
        line << std::right << std::fixed << std::setprecision(1) << std::setw(12) << r.wall_ms
             << std::setw(16) << r.ring_mults << std::setprecision(2) << std::setw(10)
             << speedup(base.wall_ms, r.wall_ms) << std::setw(10)
             << speedup(static_cast<double>(base.ring_mults), static_cast<double>(r.ring_mults))
             << std::setw(11) << r.predicted;
        out << line.str() << "\n";
    }
    return 0;
}

int run_selftest(int threads, std::ostream& out) {
    const std::vector<std::string> cases = {
        "2", "4", "91", "97", "1009", "1024", "123456789", "1039509197",
        "2147483647", "65537196611", "1000036000099"};

    DriverConfig engine_cfg;
    engine_cfg.threads = threads;
    engine_cfg.small_n_cutoff = 16; // force the search engine even on tiny inputs

    int failures = 0;
    for (const std::string& s : cases) {
        const mpz_class n(s);
        const Factorization ref = factor_trial(n).factorization;
        struct Variant {
            const char* name;
            DriverConfig cfg;
        };
        std::vector<Variant> variants;
        {
            DriverConfig c = engine_cfg;
            c.algorithm = Algo::Sieved;
            c.B_override = 3;
            variants.push_back({"sieved B=3", c});
            c.B_override = 5;
            variants.push_back({"sieved B=5", c});
            c = engine_cfg;
            c.algorithm = Algo::DegenerateBgs;
            variants.push_back({"bgs", c});
            c = engine_cfg;
            c.algorithm = Algo::Strassen;
            variants.push_back({"strassen", c});
        }
        for (const auto& v : variants) {
            const FactorOutcome got = factor(n, v.cfg);
            bool same = got.factorization.factors.size() == ref.factors.size();
            for (std::size_t i = 0; same && i < ref.factors.size(); ++i)
                same = got.factorization.factors[i].p == ref.factors[i].p &&
                       got.factorization.factors[i].e == ref.factors[i].e;
            if (!same || !verify_factorization(got.factorization)) {
                out << "selftest FAIL: n=" << s << " variant=" << v.name << "\n";
                ++failures;
            }
        }
    }
    if (failures) {
        out << "selftest: " << failures << " failures\n";
        return 1;
    }
    out << "selftest: " << cases.size() << " cases x 4 variants, all ok\n";
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"deterministic integer factorization"};
    app.name("detfactor");
    app.require_subcommand(1);

    std::string n_str, algo_name = "sieved", cutoff_str, b_list = "3,5,7,11,13";
    int B = -1, threads = env_threads();
    bool as_json = false, with_stats = false;
    int bits = 64, count = 2;
    std::uint64_t seed = 1;

    CLI::App* cf = app.add_subcommand("factor", "factor one integer");
    cf->add_option("n", n_str, "positive integer (decimal)")->required();
    cf->add_option("--algo", algo_name, "sieved|bgs|strassen|trial")->capture_default_str();
    cf->add_option("--B", B, "wheel parameter override (sieved only)");
    cf->add_option("--cutoff", cutoff_str, "trial-divide below this instead of searching");
    cf->add_option("--threads", threads, "pointwise-stage threads")->capture_default_str();
    cf->add_flag("--json", as_json, "machine-readable output");
    cf->add_flag("--stats", with_stats, "include operation counters");

    CLI::App* cb = app.add_subcommand("bench", "compare wheel variants on random semiprimes");
    cb->add_option("--bits", bits, "semiprime size in bits")->check(CLI::Range(16, 96))->capture_default_str();
    cb->add_option("--count", count, "how many semiprimes")->check(CLI::Range(1, 64))->capture_default_str();
    cb->add_option("--seed", seed, "deterministic seed")->capture_default_str();
    cb->add_option("--Bs", b_list, "comma-separated wheel parameters")->capture_default_str();
    cb->add_option("--threads", threads, "pointwise-stage threads");
    cb->add_flag("--json", as_json, "machine-readable output");

    CLI::App* cs = app.add_subcommand("selftest", "cross-check the engines on a fixed battery");
    cs->add_option("--threads", threads, "pointwise-stage threads");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("detfactor");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (cf->parsed()) {
            const mpz_class n = parse_n(n_str);
            DriverConfig cfg;
            cfg.algorithm = algo_from_name(algo_name);
            cfg.threads = threads;
            cfg.stats_enabled = with_stats;
            if (B >= 0) cfg.B_override = B;
            if (!cutoff_str.empty()) cfg.small_n_cutoff = parse_n(cutoff_str);
            const FactorOutcome r = factor(n, cfg);
            if (as_json) {
                out << factor_json(algo_name, r, with_stats).dump() << "\n";
            } else {
                out << factors_text(r.factorization) << "\n";
                if (with_stats) {
                    const RunStats& st = r.stats;
                    out << "algo=" << algo_name << " B=" << st.B << " levels=" << st.levels_r
                        << " b_final=" << st.b_final.get_str() << " ms=" << std::fixed
                        << std::setprecision(1) << st.wall_ms << "\n";
                    out << "ring_mults=" << st.counters.ring_mults
                        << " poly_mults=" << st.counters.poly_mults
                        << " max_poly_degree=" << st.counters.max_poly_degree
                        << " gcd_calls=" << st.counters.gcd_calls
                        << " shift_evals=" << st.counters.shift_eval_calls << "\n";
                }
            }
            return 0;
        }
        if (cb->parsed()) return run_bench(bits, count, seed, b_list, as_json, threads, out);
        if (cs->parsed()) return run_selftest(threads, out);
    } catch (const CLI::ValidationError& e) {
        err << "detfactor: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "detfactor: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace detfactor
